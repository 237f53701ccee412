#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "restake/graph.hpp"

namespace restake {

enum class Scheme { Max, Additive, Minimal };

std::string scheme_name(Scheme s);

// Per-service slashing factor context. phi is the raw ratio
// alpha_s sigma_{ds} / (committed attacker stake on s); values above 1 mean
// the attack is infeasible on that service and are reported clamped.
struct ServiceFactor {
    Rat sigma_T;     // total restaked stake sigma_{ds}
    Rat sigma_B;     // committed attacker stake on s
    Rat phi;         // raw factor (may exceed 1)
    bool clamped;    // phi > 1
};

struct MultSlashOutcome {
    Scheme scheme;
    std::map<OperatorId, Rat> slash;                 // psi_v
    std::map<OperatorId, std::string> binding;       // argmax service / fingerprint trace
    std::map<ServiceId, ServiceFactor> factors;
    std::map<ServiceId, Rat> service_total;          // sum of psi over attackers of s
    std::map<ServiceId, bool> residual_clamped;      // negative residual clamped to 0
    Rat total() const;
};

// phi_s for the attack as-is (committed stakes), raw value.
Rat service_factor(const RestakingGraph& g, const AttackSpec& attack, const ServiceId& s);

// phi_s(x): the factor with `op`'s committed stake replaced by x.
Rat service_factor_with(const RestakingGraph& g, const AttackSpec& attack, const ServiceId& s,
                        const OperatorId& op, const Rat& x);

// Max-scheme: attackers on >= 2 attacked services are charged
// max phi_s * x_v; each service's residual to alpha_s sigma_{ds} is split
// among its exclusive attackers proportionally to committed stake.
MultSlashOutcome mult_slash_max(const RestakingGraph& g, const AttackSpec& attack);

// Additive variant: multi-service attackers charged min(sum of phi_s, 1) * x_v.
MultSlashOutcome mult_slash_additive(const RestakingGraph& g, const AttackSpec& attack);

// Least total slashing restoring every attacked service to its threshold:
//   min sum psi_v   s.t.  sum_{v in B on s} (x_v - psi_v) <= alpha_s sigma_{ds}
// Solved exactly over the factorized KKT family psi_v = (max binding lambda) x_v.
struct MinimalSlashResult {
    std::map<OperatorId, Rat> slash;
    std::map<ServiceId, Rat> lambda;     // 0 on non-binding services
    Rat objective;
};
MinimalSlashResult minimal_slashing(const RestakingGraph& g, const AttackSpec& attack);

// A factorized aggregation over the multipliers of the services an operator
// attacks (values passed in ascending service-id order).
struct AggregationRule {
    std::string name;
    std::function<Rat(const std::vector<Rat>&)> fn;
};
AggregationRule agg_max();
AggregationRule agg_sum();

struct ComponentwiseRow {
    OperatorId op;
    Rat psi_max;
    Rat psi_alt;
    bool strict;         // psi_alt > psi_max
    bool over_stake;     // psi_alt > committed stake
};
struct ComponentwiseReport {
    std::vector<ComponentwiseRow> rows;
    bool all_geq;        // psi_alt >= psi_max everywhere
    bool any_strict;
    Rat total_max;
    Rat total_alt;
};

// Compares an alternative monotone aggregation against the max-scheme on the
// multipliers of minimal_slashing. Throws "alt-rule-infeasible" when the
// alternative fails to restore feasibility on some service.
ComponentwiseReport check_componentwise_minimal(const RestakingGraph& g, const AttackSpec& attack,
                                                const AggregationRule& alt);

}  // namespace restake
