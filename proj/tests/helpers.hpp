// Shared test utilities: deterministic instance generators and independent
// oracles (grid argmax, LP vertex enumeration, binomial CDF, high-precision
// normal CDF). Oracles are written from scratch here so they share no code
// with the implementation paths they check.
#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "restake/graph.hpp"

namespace testutil {

using restake::AttackSpec;
using restake::OperatorId;
using restake::Rat;
using restake::RestakingGraph;
using restake::ServiceId;
using restake::ServiceInfo;

inline Rat random_rat(std::mt19937_64& rng, int max_num = 12, int max_den = 6) {
    std::uniform_int_distribution<int> num(1, max_num);
    std::uniform_int_distribution<int> den(1, max_den);
    Rat r(num(rng), den(rng));
    r.canonicalize();
    return r;
}

inline Rat random_alpha(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> den(2, 8);
    int d = den(rng);
    std::uniform_int_distribution<int> num(1, d - 1);
    Rat r(num(rng), d);
    r.canonicalize();
    return r;
}

inline RestakingGraph random_graph(std::mt19937_64& rng, int n_services, int n_operators,
                                   double edge_p, int max_pi = 20) {
    std::map<ServiceId, ServiceInfo> services;
    std::map<OperatorId, Rat> operators;
    std::set<std::pair<ServiceId, OperatorId>> edges;
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < n_services; ++i)
        services["s" + std::to_string(i)] =
            ServiceInfo{random_rat(rng, max_pi, 4), random_alpha(rng)};
    for (int j = 0; j < n_operators; ++j) operators["v" + std::to_string(j)] = random_rat(rng);
    for (int i = 0; i < n_services; ++i)
        for (int j = 0; j < n_operators; ++j)
            if (u(rng) < edge_p) edges.insert({"s" + std::to_string(i), "v" + std::to_string(j)});
    return RestakingGraph(std::move(services), std::move(operators), std::move(edges));
}

// Full-stake attack by every operator touching the chosen services; feasible
// by construction whenever each alpha < 1.
inline std::optional<AttackSpec> covering_attack(const RestakingGraph& g,
                                                 const std::set<ServiceId>& services) {
    std::set<OperatorId> attackers;
    for (const auto& s : services)
        for (const auto& v : g.service_neighbors(s)) attackers.insert(v);
    if (attackers.empty()) return std::nullopt;
    return AttackSpec::full_stake(g, services, attackers);
}

// Greedily drops redundant attackers until no removal keeps the attack
// feasible; the survivor (if any) is stable.
inline std::optional<AttackSpec> prune_to_stable(const RestakingGraph& g, AttackSpec attack) {
    if (!restake::is_feasible(g, attack)) return std::nullopt;
    bool pruned = true;
    while (pruned) {
        pruned = false;
        for (const auto& [v, x] : attack.attackers) {
            AttackSpec without = attack;
            without.attackers.erase(v);
            if (without.attackers.empty()) break;
            if (restake::is_feasible(g, without)) {
                attack = std::move(without);
                pruned = true;
                break;
            }
        }
    }
    if (!restake::is_stable(g, attack)) return std::nullopt;
    return attack;
}

// Argmax of f over [lo, hi] on an (n+1)-point grid. Returns (x, f(x)).
template <typename F>
std::pair<double, double> grid_argmax(F&& f, double lo, double hi, int n = 10000) {
    double best_x = lo, best_v = f(lo);
    for (int i = 1; i <= n; ++i) {
        double x = lo + (hi - lo) * i / n;
        double v = f(x);
        if (v > best_v) {
            best_v = v;
            best_x = x;
        }
    }
    return {best_x, best_v};
}

// Exact LP oracle for:  min sum psi  s.t.  psi >= 0,  sum_{v in S_j} psi_v >= E_j.
// Vertex enumeration over all choices of n active constraints, solved by
// rational Gaussian elimination. Intended for n <= 5, m <= 3.
struct LpOracleResult {
    Rat objective;
    std::vector<Rat> psi;
};

inline std::optional<std::vector<Rat>> solve_square(std::vector<std::vector<Rat>> m,
                                                    std::vector<Rat> rhs) {
    const std::size_t n = rhs.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        while (pivot < n && m[pivot][col] == 0) ++pivot;
        if (pivot == n) return std::nullopt;
        std::swap(m[pivot], m[col]);
        std::swap(rhs[pivot], rhs[col]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col || m[r][col] == 0) continue;
            Rat f = m[r][col] / m[col][col];
            for (std::size_t k = col; k < n; ++k) m[r][k] -= f * m[col][k];
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<Rat> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = rhs[i] / m[i][i];
    return out;
}

inline std::optional<LpOracleResult> lp_min_cover(const std::vector<std::vector<int>>& members,
                                                  const std::vector<Rat>& excess,
                                                  std::size_t n_vars) {
    // Constraint rows: n_vars bound rows (psi_v = 0) then the cover rows.
    const std::size_t m = members.size();
    const std::size_t total = n_vars + m;
    std::optional<LpOracleResult> best;

    std::vector<std::size_t> pick;
    std::function<void(std::size_t)> recurse = [&](std::size_t start) {
        if (pick.size() == n_vars) {
            std::vector<std::vector<Rat>> a(n_vars, std::vector<Rat>(n_vars, Rat(0)));
            std::vector<Rat> rhs(n_vars, Rat(0));
            for (std::size_t i = 0; i < n_vars; ++i) {
                std::size_t c = pick[i];
                if (c < n_vars) {
                    a[i][c] = 1;
                    rhs[i] = 0;
                } else {
                    for (int v : members[c - n_vars]) a[i][v] = 1;
                    rhs[i] = excess[c - n_vars];
                }
            }
            auto sol = solve_square(a, rhs);
            if (sol) {
                bool ok = true;
                for (const auto& x : *sol)
                    if (x < 0) ok = false;
                for (std::size_t j = 0; ok && j < m; ++j) {
                    Rat covered = 0;
                    for (int v : members[j]) covered += (*sol)[v];
                    if (covered < excess[j]) ok = false;
                }
                if (ok) {
                    Rat obj = 0;
                    for (const auto& x : *sol) obj += x;
                    if (!best || obj < best->objective) best = LpOracleResult{obj, *sol};
                }
            }
            return;
        }
        for (std::size_t c = start; c < total; ++c) {
            pick.push_back(c);
            recurse(c + 1);
            pick.pop_back();
        }
    };
    recurse(0);
    return best;
}

// Phi(z) by Taylor series around 0 in long double; an independent reference
// accurate far below 1e-12 on |z| <= 8.
inline long double normal_cdf_series(long double z) {
    bool negate = z < 0;
    long double a = negate ? -z : z;
    long double term = a;
    long double sum = a;
    for (int k = 1; k < 500; ++k) {
        term *= a * a / (2 * k + 1);
        sum += term;
        if (term < 1e-24L * sum) break;
    }
    long double phi = expl(-a * a / 2) / sqrtl(2 * acosl(-1.0L));
    long double upper = 0.5L + phi * sum;
    return negate ? 1.0L - upper : upper;
}

// P(Bin(n, p) <= m) via log-space pmf summation.
inline double binomial_cdf(int n, double p, int m) {
    if (m < 0) return 0;
    if (m >= n) return 1;
    if (p <= 0) return 1;
    if (p >= 1) return 0;
    double total = 0;
    for (int k = 0; k <= m; ++k) {
        double logpmf = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                        k * std::log(p) + (n - k) * std::log1p(-p);
        total += std::exp(logpmf);
    }
    return std::min(total, 1.0);
}

}  // namespace testutil
