#include "restake/multislash.hpp"

#include <algorithm>
#include <numeric>

#include "restake/error.hpp"
#include "restake/marginal.hpp"

namespace restake {

namespace {

struct FactorContext {
    std::map<ServiceId, ServiceFactor> factors;
    std::map<OperatorId, std::vector<ServiceId>> attacked_by;  // A intersect dv, sorted
};

FactorContext build_factors(const RestakingGraph& g, const AttackSpec& attack) {
    FactorContext ctx;
    for (const auto& s : attack.services) {
        ServiceFactor f;
        f.sigma_T = total_restaked_stake(g, s);
        f.sigma_B = attacking_stake_on(g, attack, s);
        Rat target = g.service(s).alpha * f.sigma_T;
        f.phi = f.sigma_B == 0 ? Rat(0) : Rat(target / f.sigma_B);
        f.clamped = f.phi > 1;
        ctx.factors[s] = std::move(f);
    }
    for (const auto& [v, x] : attack.attackers) {
        auto& list = ctx.attacked_by[v];
        for (const auto& s : attack.services)
            if (g.has_edge(s, v)) list.push_back(s);
    }
    return ctx;
}

void require_feasible(const RestakingGraph& g, const AttackSpec& attack) {
    if (!is_feasible(g, attack))
        throw Error("infeasible-attack", "attack does not meet every feasibility threshold");
}

MultSlashOutcome run_factor_scheme(const RestakingGraph& g, const AttackSpec& attack, Scheme scheme) {
    require_feasible(g, attack);
    FactorContext ctx = build_factors(g, attack);

    MultSlashOutcome out;
    out.scheme = scheme;
    out.factors = ctx.factors;

    // Multi-service attackers are charged by their aggregated factor.
    for (const auto& [v, x] : attack.attackers) {
        const auto& services = ctx.attacked_by[v];
        if (services.size() < 2) continue;
        if (scheme == Scheme::Max) {
            ServiceId best = services.front();
            Rat best_phi = ctx.factors[best].phi;
            for (const auto& s : services) {
                if (ctx.factors[s].phi > best_phi) {
                    best_phi = ctx.factors[s].phi;
                    best = s;
                }
            }
            out.slash[v] = best_phi * x;
            out.binding[v] = best;
        } else {
            Rat sum = 0;
            std::string label;
            for (const auto& s : services) {
                sum += ctx.factors[s].phi;
                label += label.empty() ? s : "|" + s;
            }
            if (sum > 1) {
                sum = 1;
                label = "cap";
            }
            out.slash[v] = sum * x;
            out.binding[v] = label;
        }
    }

    // Each service's residual to the threshold amount goes to its exclusive
    // attackers, proportionally to committed stake.
    for (const auto& s : attack.services) {
        Rat target = g.service(s).alpha * ctx.factors[s].sigma_T;
        Rat charged = 0;
        Rat exclusive_stake = 0;
        std::vector<OperatorId> exclusive;
        for (const auto& [v, x] : attack.attackers) {
            const auto& services = ctx.attacked_by[v];
            if (services.size() >= 2 && g.has_edge(s, v)) charged += out.slash[v];
            if (services.size() == 1 && services.front() == s) {
                exclusive.push_back(v);
                exclusive_stake += x;
            }
        }
        Rat residual = target - charged;
        out.residual_clamped[s] = residual < 0;
        if (residual < 0) residual = 0;
        for (const auto& v : exclusive) {
            Rat share = exclusive_stake == 0 ? Rat(0)
                                             : Rat(residual * attack.attackers.at(v) / exclusive_stake);
            out.slash[v] = share;
            out.binding[v] = s;
        }
    }

    // Operators with no attacked edge contribute nothing and lose nothing.
    for (const auto& [v, x] : attack.attackers)
        if (!out.slash.count(v)) {
            out.slash[v] = 0;
            out.binding[v] = "";
        }

    for (const auto& s : attack.services) {
        Rat total = 0;
        for (const auto& [v, psi] : out.slash)
            if (g.has_edge(s, v)) total += psi;
        out.service_total[s] = total;
    }
    return out;
}

}  // namespace

std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::Max: return "max";
        case Scheme::Additive: return "additive";
        case Scheme::Minimal: return "minimal";
    }
    return "?";
}

Rat MultSlashOutcome::total() const {
    Rat t = 0;
    for (const auto& [v, psi] : slash) t += psi;
    return t;
}

Rat service_factor(const RestakingGraph& g, const AttackSpec& attack, const ServiceId& s) {
    validate_attack(g, attack);
    if (!attack.services.count(s)) throw Error("unknown-service", s + " is not attacked");
    Rat committed = attacking_stake_on(g, attack, s);
    Rat target = g.service(s).alpha * total_restaked_stake(g, s);
    return committed == 0 ? Rat(0) : Rat(target / committed);
}

Rat service_factor_with(const RestakingGraph& g, const AttackSpec& attack, const ServiceId& s,
                        const OperatorId& op, const Rat& x) {
    if (!attack.attackers.count(op)) throw Error("unknown-operator", op);
    if (x < 0 || x > g.stake(op)) throw Error("x-out-of-range", "stake override outside [0, sigma]");
    AttackSpec modified = attack;
    modified.attackers[op] = x;
    return service_factor(g, modified, s);
}

MultSlashOutcome mult_slash_max(const RestakingGraph& g, const AttackSpec& attack) {
    return run_factor_scheme(g, attack, Scheme::Max);
}

MultSlashOutcome mult_slash_additive(const RestakingGraph& g, const AttackSpec& attack) {
    return run_factor_scheme(g, attack, Scheme::Additive);
}

namespace {

// Gaussian elimination over Q. Returns false when singular.
bool solve_linear(std::vector<std::vector<Rat>> m, std::vector<Rat> rhs, std::vector<Rat>& out) {
    const std::size_t n = rhs.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        while (pivot < n && m[pivot][col] == 0) ++pivot;
        if (pivot == n) return false;
        std::swap(m[pivot], m[col]);
        std::swap(rhs[pivot], rhs[col]);
        for (std::size_t row = 0; row < n; ++row) {
            if (row == col || m[row][col] == 0) continue;
            Rat f = m[row][col] / m[col][col];
            for (std::size_t k = col; k < n; ++k) m[row][k] -= f * m[col][k];
            rhs[row] -= f * rhs[col];
        }
    }
    out.assign(n, Rat(0));
    for (std::size_t i = 0; i < n; ++i) out[i] = rhs[i] / m[i][i];
    return true;
}

}  // namespace

MinimalSlashResult minimal_slashing(const RestakingGraph& g, const AttackSpec& attack) {
    validate_attack(g, attack);

    std::vector<ServiceId> services(attack.services.begin(), attack.services.end());
    std::map<ServiceId, Rat> excess;  // committed stake above the threshold
    for (const auto& s : services) {
        Rat e = attacking_stake_on(g, attack, s) - g.service(s).alpha * total_restaked_stake(g, s);
        if (e < 0)
            throw Error("non-binding-input", "attack is below the threshold on " + s);
        excess[s] = e;
    }

    std::vector<ServiceId> active;  // services that need slashing at all
    for (const auto& s : services)
        if (excess[s] > 0) active.push_back(s);

    MinimalSlashResult result;
    for (const auto& s : services) result.lambda[s] = 0;
    for (const auto& [v, x] : attack.attackers) result.slash[v] = 0;
    result.objective = 0;
    if (active.empty()) return result;

    if (active.size() > 6)
        throw Error("instance-too-large", "minimal slashing supports at most 6 binding services");

    // The optimum is factorized: psi_v = (max binding lambda over v's attacked
    // services) x_v. Enumerate binding sets and multiplier orderings, solve the
    // resulting linear system exactly, and keep the cheapest valid candidate.
    struct Candidate {
        std::map<ServiceId, Rat> lambda;
        std::map<OperatorId, Rat> slash;
        Rat objective;
    };
    std::optional<Candidate> best;

    std::vector<std::vector<ServiceId>> orderings;
    const std::size_t n_active = active.size();
    for (std::uint32_t mask = 1; mask < (1u << n_active); ++mask) {
        std::vector<ServiceId> subset;
        for (std::size_t i = 0; i < n_active; ++i)
            if (mask & (1u << i)) subset.push_back(active[i]);
        std::sort(subset.begin(), subset.end());
        do { orderings.push_back(subset); } while (std::next_permutation(subset.begin(), subset.end()));
    }

    for (const auto& order : orderings) {
        const std::size_t k = order.size();
        // first_of[v] = index in `order` of the highest-ranked service v attacks.
        std::map<OperatorId, std::optional<std::size_t>> first_of;
        for (const auto& [v, x] : attack.attackers) {
            std::optional<std::size_t> idx;
            for (std::size_t i = 0; i < k && !idx; ++i)
                if (g.has_edge(order[i], v)) idx = i;
            first_of[v] = idx;
        }

        std::vector<std::vector<Rat>> m(k, std::vector<Rat>(k, Rat(0)));
        std::vector<Rat> rhs(k);
        for (std::size_t i = 0; i < k; ++i) {
            rhs[i] = excess[order[i]];
            for (const auto& [v, x] : attack.attackers)
                if (g.has_edge(order[i], v) && first_of[v]) m[i][*first_of[v]] += x;
        }
        std::vector<Rat> lambda;
        if (!solve_linear(m, rhs, lambda)) continue;

        // Ordering consistency: lambda_1 >= ... >= lambda_k > 0.
        bool ok = lambda[k - 1] > 0;
        for (std::size_t i = 0; ok && i + 1 < k; ++i) ok = lambda[i] >= lambda[i + 1];
        if (!ok) continue;

        Candidate cand;
        for (const auto& s : services) cand.lambda[s] = 0;
        for (std::size_t i = 0; i < k; ++i) cand.lambda[order[i]] = lambda[i];
        cand.objective = 0;
        for (const auto& [v, x] : attack.attackers) {
            Rat psi = first_of[v] ? lambda[*first_of[v]] * x : Rat(0);
            cand.slash[v] = psi;
            cand.objective += psi;
        }

        // Non-binding constraints must still be satisfied.
        bool feasible = true;
        for (const auto& s : services) {
            if (cand.lambda[s] > 0) continue;
            Rat slashed_on_s = 0;
            for (const auto& [v, x] : attack.attackers)
                if (g.has_edge(s, v)) slashed_on_s += cand.slash[v];
            if (slashed_on_s < excess[s]) {
                feasible = false;
                break;
            }
        }
        if (!feasible) continue;

        if (!best || cand.objective < best->objective) best = std::move(cand);
    }

    if (!best) throw Error("infeasible-program", "no factorized optimum found");
    result.lambda = std::move(best->lambda);
    result.slash = std::move(best->slash);
    result.objective = best->objective;
    return result;
}

AggregationRule agg_max() {
    return {"max", [](const std::vector<Rat>& v) {
                Rat m = 0;
                for (const auto& x : v) m = std::max(m, x);
                return m;
            }};
}

AggregationRule agg_sum() {
    return {"sum", [](const std::vector<Rat>& v) {
                Rat s = 0;
                for (const auto& x : v) s += x;
                return s;
            }};
}

ComponentwiseReport check_componentwise_minimal(const RestakingGraph& g, const AttackSpec& attack,
                                                const AggregationRule& alt) {
    MinimalSlashResult minimal = minimal_slashing(g, attack);

    ComponentwiseReport report;
    report.all_geq = true;
    report.any_strict = false;
    report.total_max = 0;
    report.total_alt = 0;

    std::map<OperatorId, Rat> psi_alt;
    for (const auto& [v, x] : attack.attackers) {
        std::vector<Rat> lambdas;
        for (const auto& s : attack.services)
            if (g.has_edge(s, v)) lambdas.push_back(minimal.lambda.at(s));
        Rat alt_factor = lambdas.empty() ? Rat(0) : alt.fn(lambdas);
        psi_alt[v] = alt_factor * x;

        ComponentwiseRow row;
        row.op = v;
        row.psi_max = minimal.slash.at(v);
        row.psi_alt = psi_alt[v];
        row.strict = row.psi_alt > row.psi_max;
        row.over_stake = row.psi_alt > x;
        report.all_geq = report.all_geq && row.psi_alt >= row.psi_max;
        report.any_strict = report.any_strict || row.strict;
        report.total_max += row.psi_max;
        report.total_alt += row.psi_alt;
        report.rows.push_back(std::move(row));
    }

    // The alternative must still restore every threshold.
    for (const auto& s : attack.services) {
        Rat retained = 0;
        for (const auto& [v, x] : attack.attackers)
            if (g.has_edge(s, v)) retained += x - psi_alt[v];
        if (retained > g.service(s).alpha * total_restaked_stake(g, s))
            throw Error("alt-rule-infeasible", alt.name + " does not restore feasibility on " + s);
    }
    return report;
}

}  // namespace restake
