#include "restake/strategy.hpp"

#include <algorithm>
#include <cmath>

#include "restake/error.hpp"

namespace restake {

namespace {

constexpr double kGridPoints = 10000;

double share(double x, double other) {
    if (x <= 0) return 0;
    return x / (x + other);
}

// Solves a1*c1/(x+c1)^2 + a2*c2/(x+c2)^2 = 0 for opposite-sign coefficients.
// Returns the root of the resulting linear equation after taking square roots,
// or nothing when the setup is degenerate.
std::optional<double> two_point_foc(double a1, double c1, double a2, double c2) {
    if (!(a1 * a2 < 0) || c1 <= 0 || c2 <= 0) return std::nullopt;
    double pos = a1 > 0 ? a1 : a2;
    double pos_c = a1 > 0 ? c1 : c2;
    double neg = a1 > 0 ? -a2 : -a1;
    double neg_c = a1 > 0 ? c2 : c1;
    // pos*pos_c/(x+pos_c)^2 = neg*neg_c/(x+neg_c)^2
    double r = std::sqrt((neg * neg_c) / (pos * pos_c));  // (x+neg_c)/(x+pos_c)
    if (!std::isfinite(r) || std::abs(r - 1.0) < 1e-12) return std::nullopt;
    double x = (r * pos_c - neg_c) / (1.0 - r);
    if (!std::isfinite(x)) return std::nullopt;
    return x;
}

double slash_factor(const UtilityContext& ctx, double x) {
    if (ctx.services.empty()) return 0;
    if (ctx.scheme == Scheme::Additive) {
        double sum = 0;
        for (std::size_t i = 0; i < ctx.services.size(); ++i) sum += factor_at(ctx, i, x);
        return std::min(sum, 1.0);
    }
    return factor_at(ctx, binding_service(ctx, x), x);
}

double profit_term(const UtilityContext& ctx, double x) {
    if (ctx.sharing == Sharing::Pooled) return ctx.pool_profit * share(x, ctx.pool_other_stake);
    double total = 0;
    for (const auto& s : ctx.services) total += s.pi * share(x, s.other_stake);
    return total;
}

}  // namespace

std::string sharing_name(Sharing s) {
    return s == Sharing::Proportional ? "proportional" : "pooled";
}

UtilityContext make_context(const RestakingGraph& g, const AttackSpec& attack, const OperatorId& op,
                            Sharing sharing, Scheme scheme) {
    validate_attack(g, attack);
    auto it = attack.attackers.find(op);
    if (it == attack.attackers.end()) throw Error("unknown-operator", op + " is not part of the attack");

    UtilityContext ctx;
    ctx.sharing = sharing;
    ctx.scheme = scheme;
    ctx.sigma_v = to_double(g.stake(op));
    ctx.pool_profit = to_double(profit_of(g, attack.services));
    for (const auto& [w, x] : attack.attackers)
        if (w != op) ctx.pool_other_stake += to_double(x);
    for (const auto& s : attack.services) {
        if (!g.has_edge(s, op)) continue;
        UtilityContext::Service entry;
        entry.id = s;
        entry.pi = to_double(g.service(s).pi);
        entry.alpha = to_double(g.service(s).alpha);
        entry.sigma_T = to_double(total_restaked_stake(g, s));
        for (const auto& [w, x] : attack.attackers)
            if (w != op && g.has_edge(s, w)) entry.other_stake += to_double(x);
        ctx.services.push_back(std::move(entry));
    }
    return ctx;
}

double factor_at(const UtilityContext& ctx, std::size_t i, double x) {
    const auto& s = ctx.services.at(i);
    double denom = x + s.other_stake;
    if (denom <= 0) return 0;
    return s.alpha * s.sigma_T / denom;
}

std::size_t binding_service(const UtilityContext& ctx, double x) {
    std::size_t best = 0;
    double best_phi = factor_at(ctx, 0, x);
    for (std::size_t i = 1; i < ctx.services.size(); ++i) {
        double phi = factor_at(ctx, i, x);
        if (phi > best_phi) {
            best_phi = phi;
            best = i;
        }
    }
    return best;
}

double utility(const UtilityContext& ctx, double x) {
    if (x < 0 || x > ctx.sigma_v + 1e-12) throw Error("x-out-of-range", "stake outside [0, sigma_v]");
    if (x == 0 || ctx.services.empty()) return 0;
    return profit_term(ctx, x) - x * slash_factor(ctx, x);
}

double utility_single(const UtilityContext& ctx, double x) {
    if (ctx.services.size() != 1)
        throw Error("config-error", "single-service utility needs exactly one service");
    return utility(ctx, x);
}

double utility_two_services(const UtilityContext& ctx, double x) {
    if (ctx.services.size() != 2)
        throw Error("config-error", "two-service utility needs exactly two services");
    return utility(ctx, x);
}

double utility_derivative(const UtilityContext& ctx, double x) {
    if (ctx.services.empty()) return 0;
    double dprofit = 0;
    if (ctx.sharing == Sharing::Pooled) {
        double po = ctx.pool_other_stake;
        dprofit = ctx.pool_profit * po / ((x + po) * (x + po));
    } else {
        for (const auto& s : ctx.services)
            dprofit += s.pi * s.other_stake / ((x + s.other_stake) * (x + s.other_stake));
    }
    double dslash = 0;
    if (ctx.scheme == Scheme::Additive) {
        double sum = 0;
        for (std::size_t i = 0; i < ctx.services.size(); ++i) sum += factor_at(ctx, i, x);
        if (sum <= 1.0) {
            for (const auto& s : ctx.services)
                dslash += s.alpha * s.sigma_T * s.other_stake /
                          ((x + s.other_stake) * (x + s.other_stake));
        } else {
            dslash = 1.0;
        }
    } else {
        const auto& s = ctx.services[binding_service(ctx, x)];
        dslash = s.alpha * s.sigma_T * s.other_stake / ((x + s.other_stake) * (x + s.other_stake));
    }
    return dprofit - dslash;
}

double regime_boundary(const UtilityContext& ctx) {
    if (ctx.services.size() != 2)
        throw Error("config-error", "regime boundary is defined for two services");
    const auto& s1 = ctx.services[0];
    const auto& s2 = ctx.services[1];
    double t1 = s1.alpha * s1.sigma_T;
    double t2 = s2.alpha * s2.sigma_T;
    if (t1 == t2)
        throw Error("degenerate-boundary", "equal threshold amounts leave a single smooth regime");
    return (t2 * s1.other_stake - t1 * s2.other_stake) / (t1 - t2);
}

double utility_attack_level(const RestakingGraph& g, const AttackSpec& attack, const OperatorId& op,
                            double x, Scheme scheme) {
    UtilityContext ctx = make_context(g, attack, op, Sharing::Pooled, scheme);
    if (x < 0 || x > ctx.sigma_v + 1e-12) throw Error("x-out-of-range", "stake outside [0, sigma_v]");
    if (x == 0) return 0;
    double profit = ctx.pool_profit * share(x, ctx.pool_other_stake);
    return profit - x * slash_factor(ctx, x);
}

namespace {

struct Candidate {
    double x;
    std::string tag;
};

BestResponse pick_best(const UtilityContext& ctx, std::vector<Candidate> candidates,
                       bool grid_fallback) {
    BestResponse best;
    bool first = true;
    for (const auto& c : candidates) {
        if (c.x < 0 || c.x > ctx.sigma_v) continue;
        double u = utility(ctx, c.x);
        // Ties break toward larger x (full participation).
        if (first || u > best.value + 1e-15 ||
            (std::abs(u - best.value) <= 1e-15 && c.x > best.x_star)) {
            best.x_star = c.x;
            best.value = u;
            best.regime = c.tag;
            first = false;
        }
    }
    best.derivative = utility_derivative(ctx, best.x_star);
    best.grid_fallback = grid_fallback;
    return best;
}

std::vector<Candidate> grid_candidates(const UtilityContext& ctx) {
    std::vector<Candidate> out;
    double lo = 0, hi = ctx.sigma_v;
    double best_u = -1e300, best_x = 0;
    for (int i = 0; i <= static_cast<int>(kGridPoints); ++i) {
        double x = lo + (hi - lo) * i / kGridPoints;
        double u = utility(ctx, x);
        if (u > best_u) {
            best_u = u;
            best_x = x;
        }
    }
    out.push_back({best_x, best_x == 0 ? "none" : (best_x == hi ? "full" : "interior")});
    // One Newton polish step on the analytic derivative.
    double h = std::max(1e-8, ctx.sigma_v * 1e-8);
    double d1 = utility_derivative(ctx, best_x);
    double d2 = (utility_derivative(ctx, std::min(hi, best_x + h)) -
                 utility_derivative(ctx, std::max(lo, best_x - h))) /
                (std::min(hi, best_x + h) - std::max(lo, best_x - h));
    if (std::isfinite(d2) && d2 != 0) {
        double polished = best_x - d1 / d2;
        if (polished > lo && polished < hi && utility(ctx, polished) >= best_u)
            out.push_back({polished, "interior"});
    }
    return out;
}

// x values where the binding factor changes (max scheme), or where the
// additive factor sum crosses 1.
std::vector<double> regime_breakpoints(const UtilityContext& ctx) {
    std::vector<double> out;
    const auto& svc = ctx.services;
    if (ctx.scheme == Scheme::Max) {
        for (std::size_t i = 0; i < svc.size(); ++i)
            for (std::size_t j = i + 1; j < svc.size(); ++j) {
                double ti = svc[i].alpha * svc[i].sigma_T;
                double tj = svc[j].alpha * svc[j].sigma_T;
                if (ti == tj) continue;
                double x = (tj * svc[i].other_stake - ti * svc[j].other_stake) / (ti - tj);
                if (x > 0 && x < ctx.sigma_v) out.push_back(x);
            }
    } else {
        // sum_i t_i/(x+o_i) = 1, strictly decreasing in x: bisect if it crosses.
        auto sum_at = [&](double x) {
            double s = 0;
            for (std::size_t i = 0; i < svc.size(); ++i) s += factor_at(ctx, i, x);
            return s;
        };
        double lo = 0, hi = ctx.sigma_v;
        if ((sum_at(lo) - 1.0) * (sum_at(hi) - 1.0) < 0) {
            for (int it = 0; it < 200; ++it) {
                double mid = 0.5 * (lo + hi);
                ((sum_at(mid) - 1.0) * (sum_at(lo) - 1.0) <= 0 ? hi : lo) = mid;
            }
            out.push_back(0.5 * (lo + hi));
        }
    }
    return out;
}

}  // namespace

BestResponse best_response_single(const UtilityContext& ctx) {
    if (ctx.services.size() != 1)
        throw Error("config-error", "best_response_single needs exactly one service");
    const auto& s = ctx.services[0];

    if (ctx.sharing == Sharing::Proportional ||
        ctx.pool_other_stake == s.other_stake) {
        double profit = ctx.sharing == Sharing::Proportional ? s.pi : ctx.pool_profit;
        double margin = profit - s.alpha * s.sigma_T;
        BestResponse out;
        if (margin > 0) {
            out.x_star = ctx.sigma_v;
            out.regime = "full";
        } else if (margin < 0) {
            out.x_star = 0;
            out.regime = "none";
        } else {
            out.x_star = ctx.sigma_v;
            out.regime = "knife-edge";
        }
        out.value = utility(ctx, out.x_star);
        out.derivative = utility_derivative(ctx, out.x_star);
        return out;
    }

    // Pooled sharing with a coalition wider than this service: optimize over
    // {endpoints, interior first-order point}.
    std::vector<Candidate> candidates{{0, "none"}, {ctx.sigma_v, "full"}};
    auto foc = two_point_foc(ctx.pool_profit, ctx.pool_other_stake,
                             -(s.alpha * s.sigma_T), s.other_stake);
    if (foc && *foc > 0 && *foc < ctx.sigma_v) candidates.push_back({*foc, "interior"});
    return pick_best(ctx, std::move(candidates), false);
}

BestResponse best_response_two(const UtilityContext& ctx) {
    if (ctx.services.size() != 2)
        throw Error("config-error", "best_response_two needs exactly two services");
    const auto& s1 = ctx.services[0];
    const auto& s2 = ctx.services[1];
    double t1 = s1.alpha * s1.sigma_T;
    double t2 = s2.alpha * s2.sigma_T;
    double m1 = (ctx.sharing == Sharing::Pooled ? ctx.pool_profit : s1.pi) - t1;
    double m2 = (ctx.sharing == Sharing::Pooled ? ctx.pool_profit : s2.pi) - t2;

    if (ctx.scheme == Scheme::Max && ctx.sharing == Sharing::Proportional && m1 >= 0 && m2 >= 0) {
        // Both net margins nonnegative: the derivative is nonnegative on both
        // regimes, so full participation is a best response.
        BestResponse out;
        out.x_star = ctx.sigma_v;
        out.regime = (m1 == 0 && m2 == 0) ? "knife-edge" : "full";
        out.value = utility(ctx, out.x_star);
        out.derivative = utility_derivative(ctx, out.x_star);
        return out;
    }

    std::vector<Candidate> candidates{{0, "none"}, {ctx.sigma_v, "full"}};
    bool fallback = false;

    if (t1 != t2) {
        double xb = (t2 * s1.other_stake - t1 * s2.other_stake) / (t1 - t2);
        if (xb > 0 && xb < ctx.sigma_v) candidates.push_back({xb, "boundary"});
    }

    auto in_regime_one = [&](double x) {  // phi_1 >= phi_2, half-open convention
        return factor_at(ctx, 0, x) >= factor_at(ctx, 1, x);
    };

    if (ctx.sharing == Sharing::Proportional && ctx.scheme == Scheme::Max) {
        // Regime with service 1 binding: interior point requires m1 < 0.
        if (m1 < 0 && s2.pi > 0 && s1.other_stake > 0 && s2.other_stake > 0) {
            double A = std::sqrt((t1 - s1.pi) / s2.pi * s1.other_stake / s2.other_stake);
            if (std::abs(A - 1.0) < 1e-12) {
                fallback = true;
            } else {
                double x = (s1.other_stake - s2.other_stake * A) / (A - 1.0);
                if (std::isfinite(x) && x > 0 && x < ctx.sigma_v && in_regime_one(x))
                    candidates.push_back({x, "interior"});
            }
        }
        // Regime with service 2 binding: symmetric.
        if (m2 < 0 && s1.pi > 0 && s1.other_stake > 0 && s2.other_stake > 0) {
            double A = std::sqrt((t2 - s2.pi) / s1.pi * s2.other_stake / s1.other_stake);
            if (std::abs(A - 1.0) < 1e-12) {
                fallback = true;
            } else {
                double x = (s2.other_stake - s1.other_stake * A) / (A - 1.0);
                if (std::isfinite(x) && x > 0 && x < ctx.sigma_v && !in_regime_one(x))
                    candidates.push_back({x, "interior"});
            }
        }
    } else if (ctx.sharing == Sharing::Proportional && ctx.scheme == Scheme::Additive) {
        for (double bp : regime_breakpoints(ctx)) candidates.push_back({bp, "boundary"});
        // Low regime (factor sum <= 1): margins drive a two-point condition.
        if (auto foc = two_point_foc(m1, s1.other_stake, m2, s2.other_stake))
            if (*foc > 0 && *foc < ctx.sigma_v) candidates.push_back({*foc, "interior"});
        // Cap regime: sum_i pi_i o_i/(x+o_i)^2 = 1, strictly decreasing.
        auto cap_deriv = [&](double x) {
            double d = 0;
            d += s1.pi * s1.other_stake / ((x + s1.other_stake) * (x + s1.other_stake));
            d += s2.pi * s2.other_stake / ((x + s2.other_stake) * (x + s2.other_stake));
            return d - 1.0;
        };
        double lo = 0, hi = ctx.sigma_v;
        if (cap_deriv(lo) > 0 && cap_deriv(hi) < 0) {
            for (int it = 0; it < 200; ++it) {
                double mid = 0.5 * (lo + hi);
                (cap_deriv(mid) > 0 ? lo : hi) = mid;
            }
            candidates.push_back({0.5 * (lo + hi), "interior"});
        }
    } else {
        // Pooled sharing: per-regime two-point conditions against the pool term.
        for (std::size_t i = 0; i < 2; ++i) {
            const auto& s = ctx.services[i];
            auto foc = two_point_foc(ctx.pool_profit, ctx.pool_other_stake,
                                     -(s.alpha * s.sigma_T), s.other_stake);
            if (!foc) continue;
            bool regime_ok = (i == 0) ? in_regime_one(*foc) : !in_regime_one(*foc);
            if (*foc > 0 && *foc < ctx.sigma_v && regime_ok) candidates.push_back({*foc, "interior"});
        }
        fallback = true;  // pooled cases also sweep the grid for safety
    }

    if (fallback)
        for (auto& c : grid_candidates(ctx)) candidates.push_back(c);
    return pick_best(ctx, std::move(candidates), fallback);
}

BestResponse best_response_n(const UtilityContext& ctx) {
    if (ctx.services.empty()) {
        BestResponse out;
        out.x_star = 0;
        out.regime = "none";
        return out;
    }
    if (ctx.services.size() == 1) return best_response_single(ctx);
    if (ctx.services.size() == 2) return best_response_two(ctx);

    bool all_nonneg = true, all_zero = true;
    for (const auto& s : ctx.services) {
        double profit = ctx.sharing == Sharing::Pooled ? ctx.pool_profit : s.pi;
        double m = profit - s.alpha * s.sigma_T;
        all_nonneg = all_nonneg && m >= 0;
        all_zero = all_zero && m == 0;
    }
    if (ctx.scheme == Scheme::Max && ctx.sharing == Sharing::Proportional && all_nonneg) {
        BestResponse out;
        out.x_star = ctx.sigma_v;
        out.regime = all_zero ? "knife-edge" : "full";
        out.value = utility(ctx, out.x_star);
        out.derivative = utility_derivative(ctx, out.x_star);
        return out;
    }

    std::vector<Candidate> candidates{{0, "none"}, {ctx.sigma_v, "full"}};
    for (double bp : regime_breakpoints(ctx)) candidates.push_back({bp, "boundary"});
    for (auto& c : grid_candidates(ctx)) candidates.push_back(c);
    return pick_best(ctx, std::move(candidates), true);
}

DeviationReport find_type1_deviation(const DeviationEnv& env) {
    DeviationReport report;
    const double lam = std::max(env.lambda1, env.lambda2);

    auto u = [&](double x) {
        double total = -lam * x;
        total += env.pi1 * share(x, env.other_stake1);
        total += env.pi2 * share(x, env.other_stake2);
        return total;
    };
    auto du = [&](double x) {
        double d = -lam;
        double d1 = x + env.other_stake1, d2 = x + env.other_stake2;
        if (env.other_stake1 > 0) d += env.pi1 * env.other_stake1 / (d1 * d1);
        if (env.other_stake2 > 0) d += env.pi2 * env.other_stake2 / (d2 * d2);
        return d;
    };

    report.utility_before = u(env.x_current);
    report.derivative_at_current = du(env.x_current);
    if (report.derivative_at_current >= 0) {
        report.reason = "utility is nondecreasing at the current stake";
        return report;
    }
    double slack = std::min(env.slack1, env.slack2);
    double lo = std::max(0.0, env.x_current - slack);
    if (lo >= env.x_current) {
        report.reason = "no slack at the binding services";
        return report;
    }

    // u is strictly concave, so the derivative crosses zero at most once.
    double x_new = lo;
    if (du(lo) > 0) {
        double a = lo, b = env.x_current;
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (a + b);
            (du(mid) > 0 ? a : b) = mid;
        }
        x_new = 0.5 * (a + b);
    }

    report.x_new = x_new;
    report.withheld = env.x_current - x_new;
    report.utility_after = u(x_new);
    report.gain = report.utility_after - report.utility_before;
    report.feasibility_preserved = report.withheld <= slack + 1e-12;
    report.bounds_ok = lam >= 0 && lam <= 1 && x_new >= 0 && lam * x_new <= env.sigma_v;
    report.found = report.gain > 0 && report.feasibility_preserved && report.bounds_ok;
    if (!report.found && report.reason.empty()) report.reason = "no strictly profitable withholding";
    return report;
}

namespace {

UtilityContext context_from_profile(const RestakingGraph& g, const std::set<ServiceId>& services,
                                    const std::map<OperatorId, double>& profile, const OperatorId& op,
                                    Sharing sharing, Scheme scheme) {
    UtilityContext ctx;
    ctx.sharing = sharing;
    ctx.scheme = scheme;
    ctx.sigma_v = to_double(g.stake(op));
    for (const auto& s : services) ctx.pool_profit += to_double(g.service(s).pi);
    for (const auto& [w, x] : profile)
        if (w != op) ctx.pool_other_stake += x;
    for (const auto& s : services) {
        if (!g.has_edge(s, op)) continue;
        UtilityContext::Service entry;
        entry.id = s;
        entry.pi = to_double(g.service(s).pi);
        entry.alpha = to_double(g.service(s).alpha);
        entry.sigma_T = to_double(total_restaked_stake(g, s));
        for (const auto& [w, x] : profile)
            if (w != op && g.has_edge(s, w)) entry.other_stake += x;
        ctx.services.push_back(std::move(entry));
    }
    return ctx;
}

}  // namespace

EquilibriumReport nash_full_participation(const RestakingGraph& g, const AttackSpec& attack,
                                          Sharing sharing, Scheme scheme, int max_sweeps) {
    validate_attack(g, attack);

    std::map<OperatorId, double> profile;
    for (const auto& [v, x] : attack.attackers) profile[v] = to_double(x);

    EquilibriumReport report;
    std::map<OperatorId, BestResponse> responses;
    for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
        double delta = 0;
        for (auto& [v, x] : profile) {
            UtilityContext ctx =
                context_from_profile(g, attack.services, profile, v, sharing, scheme);
            BestResponse br = best_response_n(ctx);
            delta = std::max(delta, std::abs(br.x_star - x));
            x = br.x_star;
            responses[v] = br;
        }
        report.sweeps = sweep;
        if (delta < 1e-12) {
            report.converged = true;
            break;
        }
    }

    report.grid_verified = true;
    report.full_participation = true;
    for (const auto& [v, x] : profile) {
        UtilityContext ctx = context_from_profile(g, attack.services, profile, v, sharing, scheme);
        double u_here = utility(ctx, x);
        for (int i = 0; i <= 1000; ++i) {
            double cand = ctx.sigma_v * i / 1000.0;
            if (utility(ctx, cand) > u_here + 1e-8) {
                report.grid_verified = false;
                break;
            }
        }
        if (x != to_double(g.stake(v))) report.full_participation = false;
        report.profile.push_back({v, x, responses[v]});
    }
    return report;
}

}  // namespace restake
