#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "restake/graph.hpp"
#include "restake/multislash.hpp"

namespace restake {

enum class Sharing { Proportional, Pooled };

std::string sharing_name(Sharing s);

// Floating-point environment for a focal attacker choosing committed stake
// x in [0, sigma_v]. Services list covers A intersect dv in ascending id order.
struct UtilityContext {
    struct Service {
        ServiceId id;
        double pi = 0;
        double alpha = 0;
        double sigma_T = 0;      // total restaked stake at the service
        double other_stake = 0;  // committed stake of the other attackers on it
    };
    Sharing sharing = Sharing::Proportional;
    Scheme scheme = Scheme::Max;
    std::vector<Service> services;
    double sigma_v = 0;
    double pool_profit = 0;       // f(pi, A), shared over the whole coalition
    double pool_other_stake = 0;  // committed stake of B \ {v}
};

UtilityContext make_context(const RestakingGraph& g, const AttackSpec& attack, const OperatorId& op,
                            Sharing sharing = Sharing::Proportional, Scheme scheme = Scheme::Max);

// phi_i(x) = alpha_i sigma_Ti / (x + other_i).
double factor_at(const UtilityContext& ctx, std::size_t i, double x);

// Index of the binding (largest-factor) service at x; smallest index on ties.
std::size_t binding_service(const UtilityContext& ctx, double x);

// u_v(x) under the context's sharing rule and scheme; u(0) = 0 by convention.
double utility(const UtilityContext& ctx, double x);
double utility_single(const UtilityContext& ctx, double x);
double utility_two_services(const UtilityContext& ctx, double x);

// Analytic piecewise derivative (away from regime boundaries).
double utility_derivative(const UtilityContext& ctx, double x);

// x where phi_1(x) = phi_2(x); throws "degenerate-boundary" when
// alpha_1 sigma_T1 = alpha_2 sigma_T2 (a single smooth regime, no crossing).
double regime_boundary(const UtilityContext& ctx);

// Pooled-profit utility at attack level: f(pi, A) x / (x + sigma_{B'}) minus
// the scheme slash with the operator's stake overridden to x.
double utility_attack_level(const RestakingGraph& g, const AttackSpec& attack, const OperatorId& op,
                            double x, Scheme scheme = Scheme::Max);

struct BestResponse {
    double x_star = 0;
    std::string regime;        // full | none | interior | boundary | knife-edge
    double value = 0;          // u(x_star)
    double derivative = 0;     // analytic u'(x_star) (one-sided at endpoints)
    bool grid_fallback = false;
};

BestResponse best_response_single(const UtilityContext& ctx);
BestResponse best_response_two(const UtilityContext& ctx);
BestResponse best_response_n(const UtilityContext& ctx);

// Heterogeneous two-service environment used by the impossibility search:
// an identity-invariant factorized rule with multipliers lambda_1 > lambda_2
// charges the focal attacker max(lambda) per unit of committed stake.
struct DeviationEnv {
    double pi1 = 0, pi2 = 0;
    double lambda1 = 0, lambda2 = 0;
    double other_stake1 = 0, other_stake2 = 0;
    double x_current = 0;
    double sigma_v = 0;
    double slack1 = 0, slack2 = 0;  // coalition excess above each threshold
};

struct DeviationReport {
    bool found = false;
    double x_new = 0;
    double withheld = 0;
    double gain = 0;
    double utility_before = 0;
    double utility_after = 0;
    double derivative_at_current = 0;
    bool feasibility_preserved = false;
    bool bounds_ok = false;
    std::string reason;
};

// Searches for a profitable Type I withholding in the environment. The move
// must keep both thresholds met (within the stated slacks) and the slash
// within [0, sigma_v].
DeviationReport find_type1_deviation(const DeviationEnv& env);

struct EquilibriumPlayer {
    OperatorId id;
    double x = 0;
    BestResponse response;
};

struct EquilibriumReport {
    std::vector<EquilibriumPlayer> profile;
    bool converged = false;
    bool full_participation = false;
    bool grid_verified = false;  // no player improves on a verification grid
    int sweeps = 0;
};

// Best-response iteration to a fixed point, then a grid no-improvement check.
EquilibriumReport nash_full_participation(const RestakingGraph& g, const AttackSpec& attack,
                                          Sharing sharing = Sharing::Proportional,
                                          Scheme scheme = Scheme::Max, int max_sweeps = 100);

}  // namespace restake
