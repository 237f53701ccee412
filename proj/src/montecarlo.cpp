#include "restake/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "restake/error.hpp"

namespace restake::montecarlo {

namespace {

inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(std::mt19937_64& rng, double p) { return uniform01(rng) < p; }

inline double standard_normal(std::mt19937_64& rng) {
    double u1 = uniform01(rng);
    double u2 = uniform01(rng);
    while (u1 <= 0) u1 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double background_stake(std::mt19937_64& rng, const SimConfig& config) {
    double s = config.model.sigma_bar;
    if (config.stake_jitter > 0) s *= 1.0 + config.stake_jitter * (2.0 * uniform01(rng) - 1.0);
    return s;
}

// Background stake reaching one service of block b (attacker excluded).
double sample_background_sum(std::mt19937_64& rng, const SimConfig& config, std::size_t block) {
    const auto& model = config.model;
    if (config.background == Background::MeanField) {
        double mu = 0, var = 0;
        for (std::size_t c = 0; c < model.operator_counts.size(); ++c) {
            double n = static_cast<double>(model.operator_counts[c]);
            double pcb = model.p[c][block];
            mu += n * pcb * model.sigma_bar;
            var += n * pcb * (1.0 - pcb) * model.sigma_bar * model.sigma_bar;
        }
        return mu + std::sqrt(var) * standard_normal(rng);
    }
    double total = 0;
    for (std::size_t c = 0; c < model.operator_counts.size(); ++c) {
        double pcb = model.p[c][block];
        for (std::size_t i = 0; i < model.operator_counts[c]; ++i)
            if (bernoulli(rng, pcb)) total += background_stake(rng, config);
    }
    return total;
}

struct Counts {
    std::uint64_t successes = 0;
    std::uint64_t insufficient = 0;
};

template <typename PerReplication>
Counts run_replications(const SimConfig& config, PerReplication fn) {
    const std::uint64_t n = config.replications;
    const unsigned workers = std::max(1u, config.workers);
    if (workers == 1) {
        Counts counts;
        for (std::uint64_t r = 0; r < n; ++r) {
            auto rng = replication_stream(config.seed, r);
            fn(rng, counts);
        }
        return counts;
    }
    std::vector<Counts> partial(workers);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::uint64_t r = w; r < n; r += workers) {
                auto rng = replication_stream(config.seed, r);
                fn(rng, partial[w]);
            }
        });
    }
    for (auto& t : pool) t.join();
    Counts counts;
    for (const auto& p : partial) {
        counts.successes += p.successes;
        counts.insufficient += p.insufficient;
    }
    return counts;
}

SimEstimate finalize(const SimConfig& config, const Counts& counts) {
    SimEstimate est;
    est.successes = counts.successes;
    est.insufficient = counts.insufficient;
    std::uint64_t denom = config.replications;
    if (config.exclude_insufficient) denom -= std::min(denom, counts.insufficient);
    est.replications = denom;
    est.estimate = denom ? static_cast<double>(counts.successes) / denom : 0.0;
    est.std_error = denom ? std::sqrt(est.estimate * (1.0 - est.estimate) / denom) : 0.0;
    return est;
}

}  // namespace

std::mt19937_64 replication_stream(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{
        static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
        static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
        0x9e3779b9u};
    return std::mt19937_64(seq);
}

RestakingGraph sample_graph(const randnet::SbmModel& model, std::mt19937_64& rng) {
    model.validate();
    std::map<ServiceId, ServiceInfo> services;
    std::map<OperatorId, Rat> operators;
    std::set<std::pair<ServiceId, OperatorId>> edges;

    Rat stake = rat_from_double(model.sigma_bar);
    std::vector<std::vector<ServiceId>> by_block(model.block_count());
    for (std::size_t b = 0; b < model.block_count(); ++b) {
        const auto& blk = model.service_blocks[b];
        for (std::size_t i = 0; i < blk.count; ++i) {
            ServiceId id = "s" + std::to_string(b) + "_" + std::to_string(i);
            services[id] = ServiceInfo{rat_from_double(blk.pi), rat_from_double(blk.alpha)};
            by_block[b].push_back(id);
        }
    }
    for (std::size_t c = 0; c < model.operator_counts.size(); ++c) {
        for (std::size_t j = 0; j < model.operator_counts[c]; ++j) {
            OperatorId id = "v" + std::to_string(c) + "_" + std::to_string(j);
            operators[id] = stake;
            for (std::size_t b = 0; b < model.block_count(); ++b)
                for (const auto& s : by_block[b])
                    if (bernoulli(rng, model.p[c][b])) edges.insert({s, id});
        }
    }
    return RestakingGraph(std::move(services), std::move(operators), std::move(edges));
}

SimEstimate estimate_clearance(const SimConfig& config, std::size_t block, double y) {
    config.model.validate();
    if (block >= config.model.block_count()) throw Error("empty-block", "no such service block");
    if (config.model.service_blocks[block].count == 0)
        throw Error("empty-block", "service block has no services");
    double alpha = config.model.service_blocks[block].alpha;
    if (alpha <= 0 || alpha >= 1) throw Error("alpha-degenerate", "clearance needs alpha in (0,1)");
    const double bound = (1.0 - alpha) / alpha * y;

    Counts counts = run_replications(config, [&](std::mt19937_64& rng, Counts& c) {
        if (sample_background_sum(rng, config, block) <= bound) ++c.successes;
    });
    return finalize(config, counts);
}

SimEstimate estimate_success(const SimConfig& config) {
    config.model.validate();
    if (config.sybils < 1) throw Error("config-error", "k must be >= 1");
    const auto& model = config.model;
    const std::size_t R = model.block_count();
    const int k = config.sybils;
    const double per_identity = config.stake / k;

    Counts counts = run_replications(config, [&](std::mt19937_64& rng, Counts& c) {
        // Realized attacker neighborhood per block.
        std::vector<std::uint64_t> neighbors(R, 0);
        std::uint64_t total = 0;
        for (std::size_t b = 0; b < R; ++b) {
            for (std::size_t i = 0; i < model.service_blocks[b].count; ++i)
                if (bernoulli(rng, model.attacker_p[b])) ++neighbors[b];
            total += neighbors[b];
        }
        if (config.policy == TargetPolicy::DistinctNeighbors &&
            total < static_cast<std::uint64_t>(k)) {
            ++c.insufficient;
            return;
        }
        if (total == 0) {
            ++c.insufficient;
            return;
        }

        // Targets chosen uniformly from the realized neighborhood, indexed
        // (block, position); distinct policy draws without replacement.
        std::vector<std::uint64_t> remaining = neighbors;
        std::uint64_t remaining_total = total;
        std::vector<std::pair<std::size_t, std::uint64_t>> targets;
        for (int i = 0; i < k; ++i) {
            if (config.policy == TargetPolicy::DistinctNeighbors) {
                std::uint64_t pick =
                    static_cast<std::uint64_t>(uniform01(rng) * remaining_total);
                if (pick >= remaining_total) pick = remaining_total - 1;
                for (std::size_t b = 0; b < R; ++b) {
                    if (pick < remaining[b]) {
                        targets.emplace_back(b, neighbors[b] - remaining[b]);
                        --remaining[b];
                        --remaining_total;
                        break;
                    }
                    pick -= remaining[b];
                }
            } else {
                std::uint64_t pick = static_cast<std::uint64_t>(uniform01(rng) * total);
                if (pick >= total) pick = total - 1;
                for (std::size_t b = 0; b < R; ++b) {
                    if (pick < neighbors[b]) {
                        targets.emplace_back(b, pick);
                        break;
                    }
                    pick -= neighbors[b];
                }
            }
        }
        std::sort(targets.begin(), targets.end());
        targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

        bool any = false;
        for (const auto& [b, idx] : targets) {
            double alpha = model.service_blocks[b].alpha;
            if (alpha <= 0 || alpha >= 1) continue;
            double bound = (1.0 - alpha) / alpha * per_identity;
            if (sample_background_sum(rng, config, b) <= bound) {
                any = true;
                break;
            }
        }
        if (any) ++c.successes;
    });
    return finalize(config, counts);
}

std::vector<NeighborCheck> neighbor_count_check(const SimConfig& config) {
    config.model.validate();
    const auto& model = config.model;
    const std::size_t R = model.block_count();

    std::vector<std::uint64_t> hits(R, 0);
    for (std::uint64_t r = 0; r < config.replications; ++r) {
        auto rng = replication_stream(config.seed, r);
        for (std::size_t b = 0; b < R; ++b) {
            std::uint64_t d = 0;
            for (std::size_t i = 0; i < model.service_blocks[b].count; ++i)
                if (bernoulli(rng, model.attacker_p[b])) ++d;
            double mean = static_cast<double>(model.service_blocks[b].count) * model.attacker_p[b];
            if (static_cast<double>(d) >= 0.5 * mean) ++hits[b];
        }
    }

    std::vector<NeighborCheck> out;
    for (std::size_t b = 0; b < R; ++b) {
        NeighborCheck check;
        check.block = b;
        double mean = static_cast<double>(model.service_blocks[b].count) * model.attacker_p[b];
        check.threshold = 0.5 * mean;
        check.chernoff_bound = 1.0 - std::exp(-mean / 8.0);
        check.empirical = config.replications
                              ? static_cast<double>(hits[b]) / config.replications
                              : 0.0;
        check.std_error = config.replications
                              ? std::sqrt(check.empirical * (1.0 - check.empirical) /
                                          config.replications)
                              : 0.0;
        check.ok = check.empirical >= check.chernoff_bound - 3.0 * check.std_error;
        out.push_back(check);
    }
    return out;
}

double z_score(const SimEstimate& estimate, double analytic) {
    // Score form: the null (analytic) probability fixes the variance, so the
    // statistic stays defined when the empirical count is 0 or N.
    if (estimate.replications == 0) return 0.0;
    double var = analytic * (1.0 - analytic) / static_cast<double>(estimate.replications);
    if (var <= 0)
        return estimate.estimate == analytic ? 0.0 : std::numeric_limits<double>::infinity();
    return (estimate.estimate - analytic) / std::sqrt(var);
}

}  // namespace restake::montecarlo
