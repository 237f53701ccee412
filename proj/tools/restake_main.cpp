// restake: restaking-network slashing mechanisms, attacker best responses and
// random-graph Sybil analysis from the command line.
//
// Exit codes: 0 ok, 1 reference-check failures, 2 precondition violations,
// 3 statistical rejection, 64 usage errors.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "restake/error.hpp"
#include "restake/io.hpp"
#include "restake/marginal.hpp"
#include "restake/montecarlo.hpp"
#include "restake/multislash.hpp"
#include "restake/randnet.hpp"
#include "restake/reference.hpp"
#include "restake/strategy.hpp"

namespace {

using namespace restake;

struct Output {
    std::string command;
    std::string scenario;
    std::string digest;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

std::string fnv1a_digest(const std::vector<std::string>& paths) {
    std::uint64_t h = 1469598103934665603ull;
    for (const auto& path : paths) {
        std::ifstream in(path, std::ios::binary);
        char c;
        while (in.get(c)) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string fmt(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    return buf;
}

void print_output(const Output& out, const std::string& format) {
    if (format == "csv") {
        std::cout << "# command=" << out.command << " scenario=" << out.scenario
                  << " digest=" << out.digest << "\n";
        io::csv_row(std::cout, out.header);
        for (const auto& row : out.rows) io::csv_row(std::cout, row);
        return;
    }
    std::vector<std::size_t> width(out.header.size(), 0);
    for (std::size_t i = 0; i < out.header.size(); ++i) width[i] = out.header[i].size();
    for (const auto& row : out.rows)
        for (std::size_t i = 0; i < row.size() && i < width.size(); ++i)
            width[i] = std::max(width[i], row[i].size());
    std::cout << out.command << " " << out.scenario << " (digest " << out.digest << ")\n";
    auto line = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i)
            std::cout << (i ? "  " : "") << row[i]
                      << std::string(width[i] > row[i].size() ? width[i] - row[i].size() : 0, ' ');
        std::cout << "\n";
    };
    line(out.header);
    for (const auto& row : out.rows) line(row);
}

int cmd_check(const std::string& graph_path, const std::string& attack_path,
              const std::string& format) {
    RestakingGraph g = io::load_graph(graph_path);
    io::AttackFile af = io::load_attack(g, attack_path);

    Output out;
    out.command = "check";
    out.scenario = af.id;
    out.digest = fnv1a_digest({graph_path, attack_path});
    out.header = {"property", "value"};
    bool feasible = is_feasible(g, af.attack);
    out.add({"feasible", feasible ? "true" : "false"});
    out.add({"profitable", is_profitable(g, af.attack) ? "true" : "false"});
    out.add({"stable", feasible ? (is_stable(g, af.attack) ? "true" : "false") : "n/a"});
    print_output(out, format);
    return 0;
}

int cmd_slash(const std::string& graph_path, const std::string& attack_path,
              const std::string& mechanism, const std::string& format) {
    RestakingGraph g = io::load_graph(graph_path);
    io::AttackFile af = io::load_attack(g, attack_path);

    Output out;
    out.command = "slash";
    out.scenario = af.id;
    out.digest = fnv1a_digest({graph_path, attack_path});

    if (mechanism == "marginal") {
        MarginalSlashOutcome result = marginal_slash(g, af.attack);
        GroupPartition partition = partition_attackers(g, af.attack);
        out.header = {"attack_id", "operator_id", "group_fingerprint",
                      "c_group",   "c_group_dec", "psi",
                      "psi_dec"};
        for (const auto& group : result.groups) {
            for (const auto& v : partition.groups.at(group.fingerprint))
                out.add({af.id, v, fingerprint_label(group.fingerprint),
                         rat_to_fraction(group.cost), rat_to_decimal(group.cost),
                         rat_to_fraction(result.slash.at(v)), rat_to_decimal(result.slash.at(v))});
        }
    } else if (mechanism == "max" || mechanism == "additive") {
        MultSlashOutcome result =
            mechanism == "max" ? mult_slash_max(g, af.attack) : mult_slash_additive(g, af.attack);
        out.header = {"attack_id", "operator_id", "scheme", "binding_service",
                      "phi",       "phi_dec",     "psi",    "psi_dec"};
        for (const auto& [v, psi] : result.slash) {
            const std::string& binding = result.binding.at(v);
            Rat phi = 0;
            if (result.factors.count(binding)) phi = result.factors.at(binding).phi;
            out.add({af.id, v, scheme_name(result.scheme), binding, rat_to_fraction(phi),
                     rat_to_decimal(phi), rat_to_fraction(psi), rat_to_decimal(psi)});
        }
    } else if (mechanism == "minimal") {
        MinimalSlashResult result = minimal_slashing(g, af.attack);
        out.header = {"attack_id", "operator_id", "scheme", "binding_service",
                      "phi",       "phi_dec",     "psi",    "psi_dec"};
        for (const auto& [v, psi] : result.slash) {
            ServiceId binding;
            Rat lambda = 0;
            for (const auto& [s, lam] : result.lambda)
                if (af.attack.services.count(s) && g.has_edge(s, v) && lam > lambda) {
                    lambda = lam;
                    binding = s;
                }
            out.add({af.id, v, "minimal", binding, rat_to_fraction(lambda), rat_to_decimal(lambda),
                     rat_to_fraction(psi), rat_to_decimal(psi)});
        }
    }
    print_output(out, format);
    return 0;
}

int cmd_best_response(const std::string& graph_path, const std::string& attack_path,
                      const std::string& op, const std::string& sharing_id,
                      const std::string& scheme_id, int sweep, const std::string& format) {
    RestakingGraph g = io::load_graph(graph_path);
    io::AttackFile af = io::load_attack(g, attack_path);
    Sharing sharing = sharing_id == "pooled" ? Sharing::Pooled : Sharing::Proportional;
    Scheme scheme = scheme_id == "additive" ? Scheme::Additive : Scheme::Max;

    UtilityContext ctx = make_context(g, af.attack, op, sharing, scheme);
    BestResponse br = best_response_n(ctx);
    double committed = to_double(af.attack.attackers.at(op));
    double gain = br.value - utility(ctx, std::min(committed, ctx.sigma_v));

    Output out;
    out.command = "best-response";
    out.scenario = af.id;
    out.digest = fnv1a_digest({graph_path, attack_path});
    out.header = {"scenario_id", "operator_id", "sharing", "scheme",
                  "x_star",      "regime",      "utility", "deviation_gain"};
    out.add({af.id, op, sharing_name(sharing), scheme_name(scheme), fmt(br.x_star, 12), br.regime,
             fmt(br.value, 12), fmt(gain, 12)});
    print_output(out, format);

    if (sweep > 0) {
        Output grid;
        grid.command = "best-response-sweep";
        grid.scenario = af.id;
        grid.digest = out.digest;
        grid.header = {"x", "utility"};
        for (int i = 0; i <= sweep; ++i) {
            double x = ctx.sigma_v * i / sweep;
            grid.add({fmt(x, 12), fmt(utility(ctx, x), 12)});
        }
        print_output(grid, format);
    }
    return 0;
}

int cmd_enumerate(const std::string& graph_path, std::size_t max_services,
                  std::size_t max_attackers, const std::string& format) {
    RestakingGraph g = io::load_graph(graph_path);
    auto attacks = enumerate_attacks(g, max_services, max_attackers);

    Output out;
    out.command = "enumerate";
    out.scenario = graph_path;
    out.digest = fnv1a_digest({graph_path});
    out.header = {"attack_id", "services", "attackers", "pi_A", "sigma_B"};
    int idx = 0;
    for (const auto& attack : attacks) {
        std::string services, attackers;
        for (const auto& s : attack.services) services += (services.empty() ? "" : "|") + s;
        Rat sigma_b = 0;
        for (const auto& [v, x] : attack.attackers) {
            attackers += (attackers.empty() ? "" : "|") + v;
            sigma_b += g.stake(v);
        }
        out.add({std::to_string(idx++), services, attackers,
                 rat_to_decimal(profit_of(g, attack.services)), rat_to_decimal(sigma_b)});
    }
    print_output(out, format);
    return 0;
}

int cmd_sbm(const std::string& config_path, double stake, int sybils, bool sweep, double x_max,
            int x_steps, const std::string& format) {
    randnet::SbmModel model = io::load_sbm(config_path);
    randnet::ClearanceModel m = randnet::derive_clearance(model);

    Output out;
    out.command = "sbm";
    out.scenario = config_path;
    out.digest = fnv1a_digest({config_path});

    if (!sweep) {
        out.header = {"x", "k", "metric", "value"};
        auto row = [&](const std::string& metric, double value) {
            out.add({fmt(stake, 10), std::to_string(sybils), metric, fmt(value, 10)});
        };
        for (std::size_t b = 0; b < m.blocks.size(); ++b) {
            row("mu_" + std::to_string(b + 1), m.blocks[b].mu);
            row("sigma_" + std::to_string(b + 1), m.blocks[b].sigma);
            row("q_" + std::to_string(b + 1), randnet::clearance(m, b, stake));
        }
        auto count = randnet::min_sybil_count(m, stake);
        row("p_single", count.p_single);
        row("p_k", randnet::success_k_identity(m, stake, sybils));
        row("p_prime", randnet::success_sybil(m, stake, sybils));
        row("k_star", count.k_star ? *count.k_star : -1);
        row("pnl", m.blocks.size() == 1
                       ? randnet::expected_pnl_er(m, stake, m.blocks[0].pi, sybils)
                       : randnet::expected_pnl_sbm(m, stake, sybils));
        print_output(out, format);
        return 0;
    }

    out.header = {"x", "k", "p_single", "p_k", "p_prime", "k_star", "pnl"};
    for (int i = 1; i <= x_steps; ++i) {
        double x = x_max * i / x_steps;
        auto count = randnet::min_sybil_count(m, x);
        for (int k = 1; k <= sybils; ++k) {
            double pnl = m.blocks.size() == 1
                             ? randnet::expected_pnl_er(m, x, m.blocks[0].pi, k)
                             : randnet::expected_pnl_sbm(m, x, k);
            out.add({fmt(x, 10), std::to_string(k), fmt(count.p_single, 10),
                     fmt(randnet::success_k_identity(m, x, k), 10),
                     fmt(randnet::success_sybil(m, x, k), 10),
                     count.k_star ? std::to_string(*count.k_star) : "none", fmt(pnl, 10)});
        }
    }
    print_output(out, format);
    return 0;
}

int cmd_montecarlo(const std::string& config_path, std::uint64_t replications, std::uint64_t seed,
                   double stake, int sybils, unsigned workers, const std::string& background,
                   const std::string& format) {
    randnet::SbmModel model = io::load_sbm(config_path);
    randnet::ClearanceModel m = randnet::derive_clearance(model);

    montecarlo::SimConfig config;
    config.model = model;
    config.replications = replications;
    config.seed = seed;
    config.stake = stake;
    config.sybils = sybils;
    config.workers = workers;
    config.background =
        background == "graph" ? montecarlo::Background::Graph : montecarlo::Background::MeanField;

    Output out;
    out.command = "montecarlo";
    out.scenario = config_path;
    out.digest = fnv1a_digest({config_path});
    out.header = {"config_hash", "estimator", "analytic", "estimate", "stderr", "z"};

    std::cout << "# seed=" << seed << " replications=" << replications << " stake=" << stake
              << " sybils=" << sybils << " background=" << background << " workers=" << workers
              << "\n";
    const std::string& hash = out.digest;

    bool reject = false;
    auto push_estimate = [&](const std::string& name, const montecarlo::SimEstimate& est,
                             double analytic) {
        double z = montecarlo::z_score(est, analytic);
        if (std::abs(z) > 4) reject = true;
        out.add({hash, name, fmt(analytic, 10), fmt(est.estimate, 10), fmt(est.std_error, 6),
                 fmt(z, 6)});
    };

    for (std::size_t b = 0; b < m.blocks.size(); ++b) {
        auto est = montecarlo::estimate_clearance(config, b, stake);
        push_estimate("q_" + std::to_string(b + 1), est, randnet::clearance(m, b, stake));
    }
    {
        montecarlo::SimConfig single = config;
        single.sybils = 1;
        push_estimate("p_single", montecarlo::estimate_success(single),
                      randnet::success_single(m, stake));
    }
    if (sybils > 1)
        push_estimate("p_prime", montecarlo::estimate_success(config),
                      randnet::success_sybil(m, stake, sybils));

    // Chernoff rows are one-sided: only empirical < bound - 3 SE rejects.
    for (const auto& check : montecarlo::neighbor_count_check(config)) {
        double z = check.std_error > 0 ? (check.empirical - check.chernoff_bound) / check.std_error
                                       : 0.0;
        if (!check.ok) reject = true;
        out.add({hash, "neighbor_bound_" + std::to_string(check.block + 1),
                 fmt(check.chernoff_bound, 10), fmt(check.empirical, 10), fmt(check.std_error, 6),
                 fmt(z, 6)});
    }

    print_output(out, format);
    return reject ? 3 : 0;
}

int cmd_paper_examples(const std::string& fixture, double tolerance, const std::string& format) {
    std::vector<reference::CheckRow> rows =
        fixture.empty() ? reference::run_all(tolerance) : reference::run_fixture(fixture, tolerance);

    Output out;
    out.command = "paper-examples";
    out.scenario = fixture.empty() ? "all" : fixture;
    out.digest = "builtin";
    out.header = {"fixture", "name", "computed", "expected", "tolerance", "exact", "status"};
    bool all_pass = true;
    for (const auto& row : rows) {
        all_pass = all_pass && row.pass;
        out.add({row.fixture, row.name, fmt(row.computed, 10), fmt(row.expected, 10),
                 fmt(row.tolerance, 4), row.exact, row.pass ? "PASS" : "FAIL"});
    }
    print_output(out, format);
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"restaking-network slashing mechanisms and Sybil analysis"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    std::string format = "table";
    double tolerance = 0;
    std::uint64_t seed = 0;
    bool seed_given = false;
    app.add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "table"}));
    app.add_option("--tolerance", tolerance, "tolerance override for checks");
    app.add_option("--seed", seed, "random seed")
        ->each([&](const std::string&) { seed_given = true; });

    std::string graph_path, attack_path, operator_id, mechanism = "marginal";
    std::string sharing = "proportional", scheme = "max", fixture, background = "meanfield";
    int sweep_points = 0, sybils = 1, x_steps = 20;
    bool sweep = false;
    double stake = 0, x_max = 0;
    std::uint64_t replications = 10000;
    unsigned workers = 1;
    std::size_t max_services = 10, max_attackers = 10;

    auto* check = app.add_subcommand("check", "feasibility / profitability / stability of an attack");
    check->add_option("graph", graph_path)->required();
    check->add_option("attack", attack_path)->required();

    auto* slash = app.add_subcommand("slash", "per-operator slashes under a mechanism");
    slash->add_option("graph", graph_path)->required();
    slash->add_option("attack", attack_path)->required();
    slash->add_option("--mechanism", mechanism, "marginal|max|additive|minimal")
        ->check(CLI::IsMember({"marginal", "max", "additive", "minimal"}));

    auto* br = app.add_subcommand("best-response", "optimal committed stake for one attacker");
    br->add_option("graph", graph_path)->required();
    br->add_option("attack", attack_path)->required();
    br->add_option("operator", operator_id)->required();
    br->add_option("--sharing", sharing)->check(CLI::IsMember({"proportional", "pooled"}));
    br->add_option("--scheme", scheme)->check(CLI::IsMember({"max", "additive"}));
    br->add_option("--sweep", sweep_points, "also print a utility grid with N points");

    auto* enumerate = app.add_subcommand("enumerate", "all profitable and feasible attacks");
    enumerate->add_option("graph", graph_path)->required();
    enumerate->add_option("--max-services", max_services);
    enumerate->add_option("--max-attackers", max_attackers);

    auto* sbm = app.add_subcommand("sbm", "analytic success probabilities and PNL");
    sbm->add_option("config", graph_path)->required();
    sbm->add_option("--stake", stake)->required();
    sbm->add_option("--sybils", sybils);
    sbm->add_flag("--sweep", sweep);
    sbm->add_option("--x-max", x_max);
    sbm->add_option("--x-steps", x_steps);

    auto* mc = app.add_subcommand("montecarlo", "simulation vs analytic predictions");
    mc->add_option("config", graph_path)->required();
    mc->add_option("--replications", replications);
    std::uint64_t mc_seed = 0;
    bool mc_seed_given = false;
    mc->add_option("--seed", mc_seed)->each([&](const std::string&) { mc_seed_given = true; });
    mc->add_option("--stake", stake)->required();
    mc->add_option("--sybils", sybils);
    mc->add_option("--workers", workers);
    mc->add_option("--background", background)->check(CLI::IsMember({"meanfield", "graph"}));

    auto* ref = app.add_subcommand("paper-examples", "built-in worked examples vs published values");
    ref->add_option("--fixture", fixture, "run a single fixture");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 64;
    }

    if (!seed_given) {
        if (const char* env = std::getenv("RESTAKE_LAB_SEED")) seed = std::strtoull(env, nullptr, 10);
    }
    if (mc_seed_given) seed = mc_seed;

    try {
        if (check->parsed()) return cmd_check(graph_path, attack_path, format);
        if (slash->parsed()) return cmd_slash(graph_path, attack_path, mechanism, format);
        if (br->parsed())
            return cmd_best_response(graph_path, attack_path, operator_id, sharing, scheme,
                                     sweep_points, format);
        if (enumerate->parsed())
            return cmd_enumerate(graph_path, max_services, max_attackers, format);
        if (sbm->parsed()) {
            if (sweep && x_max <= 0) x_max = 2 * stake;
            return cmd_sbm(graph_path, stake, sybils, sweep, x_max, x_steps, format);
        }
        if (mc->parsed())
            return cmd_montecarlo(graph_path, replications, seed, stake, sybils, workers,
                                  background, format);
        if (ref->parsed()) return cmd_paper_examples(fixture, tolerance, format);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 64;
}
