#include "restake/marginal.hpp"

#include <algorithm>

#include "restake/error.hpp"

namespace restake {

namespace {

void require_stable(const RestakingGraph& g, const AttackSpec& attack) {
    if (!is_stable(g, attack)) throw Error("unstable-attack", "attack has a redundant attacker");
}

Rat committed_group_stake(const AttackSpec& attack, const std::set<OperatorId>& group) {
    Rat total = 0;
    for (const auto& v : group) total += attack.attackers.at(v);
    return total;
}

}  // namespace

Rat MarginalSlashOutcome::total() const {
    Rat t = 0;
    for (const auto& [v, psi] : slash) t += psi;
    return t;
}

std::string fingerprint_label(const std::set<ServiceId>& fingerprint) {
    std::string out;
    for (const auto& s : fingerprint) {
        if (!out.empty()) out += "|";
        out += s;
    }
    return out;
}

GroupPartition partition_attackers(const RestakingGraph& g, const AttackSpec& attack) {
    require_stable(g, attack);
    GroupPartition p;
    for (const auto& [v, x] : attack.attackers) {
        std::set<ServiceId> fingerprint;
        for (const auto& s : attack.services)
            if (g.has_edge(s, v)) fingerprint.insert(s);
        p.groups[fingerprint].insert(v);
    }
    return p;
}

MarginalGroupResult marginal_cost(const RestakingGraph& g, const AttackSpec& attack,
                                  const GroupPartition& partition,
                                  const std::set<ServiceId>& fingerprint) {
    auto it = partition.groups.find(fingerprint);
    if (it == partition.groups.end())
        throw Error("unknown-group", "no group with fingerprint {" + fingerprint_label(fingerprint) + "}");

    MarginalGroupResult out;
    out.fingerprint = fingerprint;
    out.group_stake = committed_group_stake(attack, it->second);
    bool first = true;
    for (const auto& s : fingerprint) {
        Rat c = g.service(s).alpha * total_restaked_stake(g, s);
        for (const auto& [other_fp, other_group] : partition.groups) {
            if (other_fp == fingerprint) continue;
            if (other_fp.count(s)) c -= committed_group_stake(attack, other_group);
        }
        out.cost_by_service[s] = c;
        if (first || c > out.cost) out.cost = c;
        first = false;
    }
    return out;
}

MarginalSlashOutcome marginal_slash(const RestakingGraph& g, const AttackSpec& attack) {
    GroupPartition partition = partition_attackers(g, attack);

    MarginalSlashOutcome out;
    for (const auto& [fingerprint, members] : partition.groups) {
        MarginalGroupResult group = marginal_cost(g, attack, partition, fingerprint);
        const Rat shield = group.group_stake - group.cost;  // sigma_{B_S} - c_{B_S}
        group.group_slash_formula =
            rat_pos(group.group_stake - Rat(static_cast<long>(members.size())) * shield);
        Rat member_total = 0;
        for (const auto& v : members) {
            Rat raw = attack.attackers.at(v) - shield;
            Rat psi = rat_pos(raw);
            out.slash[v] = psi;
            out.clamped[v] = raw < 0;
            member_total += psi;
        }
        group.group_slash = member_total;
        group.formula_diverges = member_total != group.group_slash_formula;
        out.groups.push_back(std::move(group));
    }
    return out;
}

Rat type2_gain(const RestakingGraph& g, const AttackSpec& attack, const OperatorId& op,
               const SybilSplit& split) {
    if (split.parent != op)
        throw Error("non-type2-split", "split parent does not match the operator");
    if (!split.is_type2())
        throw Error("non-type2-split", "all parts must participate and inherit edges");
    if (!attack.attackers.count(op))
        throw Error("unknown-operator", op + " is not part of the attack");

    MarginalSlashOutcome before = marginal_slash(g, attack);
    RestakingGraph split_graph = apply_split(g, split);
    AttackSpec after_attack = split_attack(g, attack, split);
    MarginalSlashOutcome after = marginal_slash(split_graph, after_attack);

    Rat after_total = 0;
    for (const auto& p : split.parts) after_total += after.slash.at(p.id);
    return before.slash.at(op) - after_total;
}

Rat type1_gain_marginal(const RestakingGraph& g, const AttackSpec& attack, const OperatorId& op,
                        const Rat& withheld) {
    auto it = attack.attackers.find(op);
    if (it == attack.attackers.end()) throw Error("unknown-operator", op + " is not part of the attack");
    if (withheld < 0 || withheld > it->second)
        throw Error("feasibility-broken", "withheld stake outside [0, committed]");

    MarginalSlashOutcome before = marginal_slash(g, attack);
    const Rat psi = before.slash.at(op);

    AttackSpec reduced = attack;
    reduced.attackers[op] = it->second - withheld;
    if (reduced.attackers[op] < psi)
        throw Error("feasibility-broken", "reduced stake falls below the current slash");
    if (!is_feasible(g, reduced))
        throw Error("feasibility-broken", "withholding breaks a feasibility constraint");

    MarginalSlashOutcome after = marginal_slash(g, reduced);
    return psi - after.slash.at(op);
}

}  // namespace restake
