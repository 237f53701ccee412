#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "restake/graph.hpp"

namespace restake {

// Attackers grouped by the exact subset of attacked services they touch:
// B_S = {v in B : A intersect dv = S}. Empty groups are omitted.
struct GroupPartition {
    std::map<std::set<ServiceId>, std::set<OperatorId>> groups;
};

struct MarginalGroupResult {
    std::set<ServiceId> fingerprint;           // S
    std::map<ServiceId, Rat> cost_by_service;  // c^s for s in S
    Rat cost;                                  // c = max_s c^s
    Rat group_stake;                           // committed stake of the group
    Rat group_slash_formula;                   // [sigma - |B_S|(sigma - c)]_+
    Rat group_slash;                           // sum of member slashes (authoritative)
    bool formula_diverges = false;             // clamps made the two disagree
};

struct MarginalSlashOutcome {
    std::vector<MarginalGroupResult> groups;
    std::map<OperatorId, Rat> slash;         // psi_v
    std::map<OperatorId, bool> clamped;      // [.]_+ activated for v
    Rat total() const;
};

// Requires a stable attack ("unstable-attack" / "infeasible-attack" otherwise).
GroupPartition partition_attackers(const RestakingGraph& g, const AttackSpec& attack);

// Marginal cost of the group with fingerprint S:
//   c^s = alpha_s sigma_{ds} - sum of other groups' stake covering s,
//   c   = max over s in S.
// Throws "unknown-group" when S is not a group of the partition.
MarginalGroupResult marginal_cost(const RestakingGraph& g, const AttackSpec& attack,
                                  const GroupPartition& partition,
                                  const std::set<ServiceId>& fingerprint);

// Per-group and per-operator marginal slashes:
//   psi_v = [x_v - (sigma_{B_S} - c_{B_S})]_+
// Group totals report the sum of member slashes; the unclamped group formula
// is kept alongside with a divergence flag.
MarginalSlashOutcome marginal_slash(const RestakingGraph& g, const AttackSpec& attack);

// Slash saved by a participating (Type II) split of `op`: psi before minus the
// parts' total after. Positive means the split profits.
Rat type2_gain(const RestakingGraph& g, const AttackSpec& attack, const OperatorId& op,
               const SybilSplit& split);

// Slash change for `op` from withholding `withheld` stake (Type I move within
// the mechanism's invariance regime). Requires the reduced stake to stay at or
// above the current slash and the attack to stay feasible ("feasibility-broken").
// Returns psi_before - psi_after (zero in the invariance regime).
Rat type1_gain_marginal(const RestakingGraph& g, const AttackSpec& attack, const OperatorId& op,
                        const Rat& withheld);

std::string fingerprint_label(const std::set<ServiceId>& fingerprint);

}  // namespace restake
