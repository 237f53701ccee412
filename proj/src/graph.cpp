#include "restake/graph.hpp"

#include <algorithm>

#include "restake/error.hpp"

namespace restake {

RestakingGraph::RestakingGraph(std::map<ServiceId, ServiceInfo> services,
                               std::map<OperatorId, Rat> operator_stakes,
                               std::set<std::pair<ServiceId, OperatorId>> edges)
    : services_(std::move(services)),
      operators_(std::move(operator_stakes)),
      edges_(std::move(edges)) {
    for (const auto& [id, info] : services_) {
        if (id.empty()) throw Error("parse-error", "empty service id");
        if (info.pi < 0) throw Error("parse-error", "negative profit for service " + id);
        if (info.alpha < 0 || info.alpha > 1)
            throw Error("parse-error", "alpha outside [0,1] for service " + id);
        by_service_[id];  // ensure entry so neighborhood queries never miss
    }
    for (const auto& [id, stake] : operators_) {
        if (id.empty()) throw Error("parse-error", "empty operator id");
        if (stake < 0) throw Error("parse-error", "negative stake for operator " + id);
        by_operator_[id];
    }
    for (const auto& [s, v] : edges_) {
        if (!has_service(s)) throw Error("parse-error", "edge references unknown service " + s);
        if (!has_operator(v)) throw Error("parse-error", "edge references unknown operator " + v);
        by_service_[s].insert(v);
        by_operator_[v].insert(s);
    }
}

const ServiceInfo& RestakingGraph::service(const ServiceId& s) const {
    auto it = services_.find(s);
    if (it == services_.end()) throw Error("unknown-service", s);
    return it->second;
}

const Rat& RestakingGraph::stake(const OperatorId& v) const {
    auto it = operators_.find(v);
    if (it == operators_.end()) throw Error("unknown-operator", v);
    return it->second;
}

const std::set<OperatorId>& RestakingGraph::service_neighbors(const ServiceId& s) const {
    auto it = by_service_.find(s);
    if (it == by_service_.end()) throw Error("unknown-service", s);
    return it->second;
}

const std::set<ServiceId>& RestakingGraph::operator_neighbors(const OperatorId& v) const {
    auto it = by_operator_.find(v);
    if (it == by_operator_.end()) throw Error("unknown-operator", v);
    return it->second;
}

AttackSpec AttackSpec::full_stake(const RestakingGraph& g, std::set<ServiceId> services,
                                  const std::set<OperatorId>& attackers) {
    AttackSpec a;
    a.services = std::move(services);
    for (const auto& v : attackers) a.attackers[v] = g.stake(v);
    return a;
}

bool SybilSplit::is_type2() const {
    if (parts.size() < 2) return false;
    return std::all_of(parts.begin(), parts.end(),
                       [](const Part& p) { return p.participates && p.inherit_edges; });
}

bool SybilSplit::is_type1() const {
    if (parts.size() < 2) return false;
    return std::count_if(parts.begin(), parts.end(),
                         [](const Part& p) { return p.participates; }) == 1;
}

Rat total_restaked_stake(const RestakingGraph& g, const ServiceId& s) {
    Rat total = 0;
    for (const auto& v : g.service_neighbors(s)) total += g.stake(v);
    return total;
}

Rat attacking_stake_on(const RestakingGraph& g, const AttackSpec& attack, const ServiceId& s) {
    Rat total = 0;
    for (const auto& [v, x] : attack.attackers)
        if (g.has_edge(s, v)) total += x;
    return total;
}

void validate_attack(const RestakingGraph& g, const AttackSpec& attack) {
    if (attack.services.empty()) throw Error("malformed-attack", "empty service set");
    if (attack.attackers.empty()) throw Error("malformed-attack", "empty attacker set");
    for (const auto& s : attack.services)
        if (!g.has_service(s)) throw Error("malformed-attack", "unknown service " + s);
    for (const auto& [v, x] : attack.attackers) {
        if (!g.has_operator(v)) throw Error("malformed-attack", "unknown operator " + v);
        if (x < 0 || x > g.stake(v))
            throw Error("malformed-attack", "committed stake outside [0, sigma] for " + v);
    }
}

bool is_feasible(const RestakingGraph& g, const AttackSpec& attack) {
    validate_attack(g, attack);
    for (const auto& s : attack.services) {
        Rat threshold = g.service(s).alpha * total_restaked_stake(g, s);
        if (attacking_stake_on(g, attack, s) < threshold) return false;
    }
    return true;
}

Rat profit_of(const RestakingGraph& g, const std::set<ServiceId>& services, ProfitAggregation) {
    // Additive aggregation: f(pi, A) = pi_A.
    Rat total = 0;
    for (const auto& s : services) total += g.service(s).pi;
    return total;
}

bool is_profitable(const RestakingGraph& g, const AttackSpec& attack, ProfitAggregation f) {
    validate_attack(g, attack);
    Rat sigma_b = 0;
    for (const auto& [v, x] : attack.attackers) sigma_b += g.stake(v);
    return profit_of(g, attack.services, f) > sigma_b;
}

bool is_stable(const RestakingGraph& g, const AttackSpec& attack) {
    if (!is_feasible(g, attack)) throw Error("infeasible-attack", "stability requires a feasible attack");
    std::map<ServiceId, Rat> committed;
    std::map<ServiceId, Rat> threshold;
    for (const auto& s : attack.services) {
        committed[s] = attacking_stake_on(g, attack, s);
        threshold[s] = g.service(s).alpha * total_restaked_stake(g, s);
    }
    for (const auto& [v, x] : attack.attackers) {
        if (x <= 0) return false;
        bool needed = false;
        for (const auto& s : attack.services) {
            if (!g.has_edge(s, v)) continue;
            if (committed[s] - x < threshold[s]) {
                needed = true;
                break;
            }
        }
        if (!needed) return false;  // redundant attacker (possibly no attacked edge at all)
    }
    return true;
}

RestakingGraph apply_split(const RestakingGraph& g, const SybilSplit& split) {
    if (!g.has_operator(split.parent)) throw Error("unknown-parent", split.parent);
    if (split.parts.size() < 2)
        throw Error("share-sum-mismatch", "a split needs at least 2 parts");
    Rat total = 0;
    for (const auto& p : split.parts) {
        if (p.stake < 0) throw Error("share-sum-mismatch", "negative share for " + p.id);
        total += p.stake;
    }
    if (total != g.stake(split.parent))
        throw Error("share-sum-mismatch", "shares must sum to the parent stake exactly");

    auto services = g.services();
    auto operators = g.operators();
    auto edges = g.edges();
    const auto parent_edges = g.operator_neighbors(split.parent);

    operators.erase(split.parent);
    for (auto it = edges.begin(); it != edges.end();)
        it = (it->second == split.parent) ? edges.erase(it) : std::next(it);

    for (const auto& p : split.parts) {
        if (operators.count(p.id)) throw Error("share-sum-mismatch", "duplicate part id " + p.id);
        operators[p.id] = p.stake;
        if (p.inherit_edges)
            for (const auto& s : parent_edges) edges.insert({s, p.id});
    }
    return RestakingGraph(std::move(services), std::move(operators), std::move(edges));
}

AttackSpec split_attack(const RestakingGraph& g, const AttackSpec& attack, const SybilSplit& split) {
    auto it = attack.attackers.find(split.parent);
    if (it == attack.attackers.end())
        throw Error("unknown-parent", split.parent + " is not part of the attack");
    Rat sigma = g.stake(split.parent);
    Rat fraction = sigma == 0 ? Rat(0) : Rat(it->second / sigma);

    AttackSpec out;
    out.services = attack.services;
    for (const auto& [v, x] : attack.attackers)
        if (v != split.parent) out.attackers[v] = x;
    for (const auto& p : split.parts)
        if (p.participates) out.attackers[p.id] = p.stake * fraction;
    return out;
}

std::vector<AttackSpec> enumerate_attacks(const RestakingGraph& g, std::size_t max_services,
                                          std::size_t max_attackers) {
    std::vector<ServiceId> services;
    std::vector<OperatorId> operators;
    for (const auto& [s, _] : g.services()) services.push_back(s);
    for (const auto& [v, _] : g.operators()) operators.push_back(v);
    if (services.size() > max_services) services.resize(max_services);
    if (operators.size() > max_attackers) operators.resize(max_attackers);

    if (services.size() + operators.size() > 20)
        throw Error("instance-too-large", "2^|S| * 2^|V| exceeds 2^20 combinations");

    std::vector<AttackSpec> out;
    const std::uint32_t s_masks = 1u << services.size();
    const std::uint32_t v_masks = 1u << operators.size();
    for (std::uint32_t sm = 1; sm < s_masks; ++sm) {
        std::set<ServiceId> A;
        for (std::size_t i = 0; i < services.size(); ++i)
            if (sm & (1u << i)) A.insert(services[i]);
        for (std::uint32_t vm = 1; vm < v_masks; ++vm) {
            std::set<OperatorId> B;
            for (std::size_t i = 0; i < operators.size(); ++i)
                if (vm & (1u << i)) B.insert(operators[i]);
            AttackSpec attack = AttackSpec::full_stake(g, A, B);
            if (is_feasible(g, attack) && is_profitable(g, attack)) out.push_back(std::move(attack));
        }
    }
    return out;
}

}  // namespace restake
