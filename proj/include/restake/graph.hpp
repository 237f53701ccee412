#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "restake/rational.hpp"

namespace restake {

using ServiceId = std::string;
using OperatorId = std::string;

struct ServiceInfo {
    Rat pi;     // maximum profit from attacking the service
    Rat alpha;  // threshold fraction of restaked stake required to collude
};

// Immutable bipartite services x operators graph. Operators restake their
// full stake with every service they are connected to.
class RestakingGraph {
public:
    RestakingGraph(std::map<ServiceId, ServiceInfo> services,
                   std::map<OperatorId, Rat> operator_stakes,
                   std::set<std::pair<ServiceId, OperatorId>> edges);

    const std::map<ServiceId, ServiceInfo>& services() const { return services_; }
    const std::map<OperatorId, Rat>& operators() const { return operators_; }
    const std::set<std::pair<ServiceId, OperatorId>>& edges() const { return edges_; }

    bool has_service(const ServiceId& s) const { return services_.count(s) != 0; }
    bool has_operator(const OperatorId& v) const { return operators_.count(v) != 0; }
    bool has_edge(const ServiceId& s, const OperatorId& v) const {
        return edges_.count({s, v}) != 0;
    }

    const ServiceInfo& service(const ServiceId& s) const;
    const Rat& stake(const OperatorId& v) const;

    // Neighborhoods: operators restaking for s, and services v restakes with.
    const std::set<OperatorId>& service_neighbors(const ServiceId& s) const;
    const std::set<ServiceId>& operator_neighbors(const OperatorId& v) const;

private:
    std::map<ServiceId, ServiceInfo> services_;
    std::map<OperatorId, Rat> operators_;
    std::set<std::pair<ServiceId, OperatorId>> edges_;
    std::map<ServiceId, std::set<OperatorId>> by_service_;
    std::map<OperatorId, std::set<ServiceId>> by_operator_;
};

// An attack (A, B): attacked services and attackers with committed stake
// x_v in [0, sigma_v]. Committed stake defaults to the full stake.
struct AttackSpec {
    std::set<ServiceId> services;           // A
    std::map<OperatorId, Rat> attackers;    // B with per-operator x_v

    static AttackSpec full_stake(const RestakingGraph& g,
                                 std::set<ServiceId> services,
                                 const std::set<OperatorId>& attackers);
};

// One identity split: the parent operator is replaced by >= 2 parts whose
// stakes sum exactly to the parent stake.
struct SybilSplit {
    struct Part {
        OperatorId id;
        Rat stake;
        bool inherit_edges = true;
        bool participates = true;
    };
    OperatorId parent;
    std::vector<Part> parts;

    bool is_type2() const;  // every part participates (and inherits edges)
    bool is_type1() const;  // exactly one participating part
};

enum class ProfitAggregation { Additive };

// sigma_{ds}: total stake restaked for the service.
Rat total_restaked_stake(const RestakingGraph& g, const ServiceId& s);

// Committed attacker stake on service s under the attack.
Rat attacking_stake_on(const RestakingGraph& g, const AttackSpec& attack, const ServiceId& s);

// Throws Error("malformed-attack") unless A and B are non-empty, exist in the
// graph, and every committed stake lies in [0, sigma_v].
void validate_attack(const RestakingGraph& g, const AttackSpec& attack);

// Feasibility: for all s in A, committed attacker stake >= alpha_s * sigma_{ds}.
bool is_feasible(const RestakingGraph& g, const AttackSpec& attack);

// Profitability: f(pi, A) > sigma_B (full stakes of B, strict).
bool is_profitable(const RestakingGraph& g, const AttackSpec& attack,
                   ProfitAggregation f = ProfitAggregation::Additive);

// Stable: the attack is feasible, every attacker commits positive stake to at
// least one attacked service it is connected to, and removing any single
// attacker breaks feasibility somewhere. Throws "infeasible-attack".
bool is_stable(const RestakingGraph& g, const AttackSpec& attack);

// Replaces the parent with the split parts. Parts with inherit_edges carry all
// parent edges; the rest are isolated. Throws "unknown-parent" /
// "share-sum-mismatch".
RestakingGraph apply_split(const RestakingGraph& g, const SybilSplit& split);

// Attack as seen after the split: the parent is replaced by its participating
// parts, each committing its share scaled by the parent's committed fraction.
AttackSpec split_attack(const RestakingGraph& g, const AttackSpec& attack, const SybilSplit& split);

// All (A, B) full-stake attacks satisfying profitability and feasibility, in
// deterministic order. Guard: 2^|S| * 2^|V| <= 2^20, else "instance-too-large".
std::vector<AttackSpec> enumerate_attacks(const RestakingGraph& g,
                                          std::size_t max_services,
                                          std::size_t max_attackers);

Rat profit_of(const RestakingGraph& g, const std::set<ServiceId>& services,
              ProfitAggregation f = ProfitAggregation::Additive);

}  // namespace restake
