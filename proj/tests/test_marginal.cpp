#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "restake/error.hpp"
#include "restake/marginal.hpp"
#include "restake/reference.hpp"

using namespace restake;
using namespace testutil;

namespace {

// Random stable attack obtained by pruning a covering attack.
std::optional<std::pair<RestakingGraph, AttackSpec>> random_stable(std::mt19937_64& rng,
                                                                   int ns = 2, int nv = 5) {
    RestakingGraph g = random_graph(rng, ns, nv, 0.55);
    std::set<ServiceId> services;
    for (const auto& [s, info] : g.services()) services.insert(s);
    auto attack = covering_attack(g, services);
    if (!attack) return std::nullopt;
    auto stable = prune_to_stable(g, *attack);
    if (!stable) return std::nullopt;
    // Keep only instances that still attack every chosen service.
    for (const auto& s : services) {
        bool touched = false;
        for (const auto& [v, x] : stable->attackers)
            if (g.has_edge(s, v)) touched = true;
        if (!touched) return std::nullopt;
    }
    return std::make_pair(std::move(g), std::move(*stable));
}

}  // namespace

TEST_CASE("overlap attack partitions by service fingerprint") {
    RestakingGraph g = reference::overlap_graph();
    GroupPartition p = partition_attackers(g, reference::overlap_attack(g));
    REQUIRE(p.groups.size() == 3);
    CHECK(p.groups.at({"s1"}) == std::set<OperatorId>{"v1"});
    CHECK(p.groups.at({"s2"}) == std::set<OperatorId>{"v3"});
    CHECK(p.groups.at({"s1", "s2"}) == std::set<OperatorId>{"v2"});
}

TEST_CASE("a single attacker covering everything forms one group") {
    RestakingGraph g({{"s1", {Rat(9), Rat(1, 2)}}, {"s2", {Rat(9), Rat(1, 2)}}},
                     {{"v", Rat(4)}}, {{"s1", "v"}, {"s2", "v"}});
    GroupPartition p = partition_attackers(g, AttackSpec::full_stake(g, {"s1", "s2"}, {"v"}));
    REQUIRE(p.groups.size() == 1);
    CHECK(p.groups.begin()->first == std::set<ServiceId>{"s1", "s2"});
}

TEST_CASE("partition groups are disjoint and cover the attacker set") {
    std::mt19937_64 rng(37);
    int seen = 0;
    for (int trial = 0; trial < 200 && seen < 40; ++trial) {
        auto inst = random_stable(rng);
        if (!inst) continue;
        ++seen;
        GroupPartition p = partition_attackers(inst->first, inst->second);
        std::set<OperatorId> covered;
        for (const auto& [fp, members] : p.groups) {
            CHECK_FALSE(fp.empty());
            for (const auto& v : members) CHECK(covered.insert(v).second);
        }
        CHECK(covered.size() == inst->second.attackers.size());
    }
    CHECK(seen >= 20);
}

TEST_CASE("marginal costs of the overlap attack") {
    RestakingGraph g = reference::overlap_graph();
    AttackSpec attack = reference::overlap_attack(g);
    GroupPartition p = partition_attackers(g, attack);

    MarginalGroupResult both = marginal_cost(g, attack, p, {"s1", "s2"});
    CHECK(both.cost_by_service.at("s1") == Rat(4, 3));  // 7/3 - 1
    CHECK(both.cost_by_service.at("s2") == Rat(3, 4));  // 7/4 - 1
    CHECK(both.cost == Rat(4, 3));

    CHECK(marginal_cost(g, attack, p, {"s1"}).cost == Rat(5, 6));  // 7/3 - 1.5
    CHECK(marginal_cost(g, attack, p, {"s2"}).cost == Rat(1, 4));  // 7/4 - 1.5

    CHECK_THROWS_AS(marginal_cost(g, attack, p, {"s1", "missing"}), Error);
}

TEST_CASE("a group alone on its service pays the full threshold") {
    RestakingGraph g({{"s", {Rat(9), Rat(1, 2)}}, {"t", {Rat(9), Rat(1, 2)}}},
                     {{"a", Rat(3)}, {"b", Rat(4)}},
                     {{"s", "a"}, {"t", "b"}});
    AttackSpec attack = AttackSpec::full_stake(g, {"s", "t"}, {"a", "b"});
    GroupPartition p = partition_attackers(g, attack);
    CHECK(marginal_cost(g, attack, p, {"s"}).cost == Rat(3, 2));  // alpha sigma_ds, nothing shared
}

TEST_CASE("marginal slashes reproduce the overlap profile exactly") {
    RestakingGraph g = reference::overlap_graph();
    MarginalSlashOutcome out = marginal_slash(g, reference::overlap_attack(g));
    CHECK(out.slash.at("v1") == Rat(5, 6));
    CHECK(out.slash.at("v2") == Rat(4, 3));
    CHECK(out.slash.at("v3") == Rat(1, 4));
}

TEST_CASE("three-way group slashes and the group-sum identity") {
    RestakingGraph g = reference::threeway_graph();
    MarginalSlashOutcome out = marginal_slash(g, reference::threeway_attack(g));
    CHECK(out.slash.at("v2a") == Rat(1, 3));
    CHECK(out.slash.at("v2b") == Rat(7, 12));
    CHECK(out.slash.at("v2c") == Rat(1, 12));
    CHECK(out.slash.at("v1") == Rat(5, 6));
    CHECK(out.slash.at("v3") == Rat(1, 4));
    for (const auto& group : out.groups) {
        CHECK(group.group_slash == group.group_slash_formula);
        CHECK_FALSE(group.formula_diverges);
    }
}

TEST_CASE("unstable attacks are rejected by the mechanism") {
    RestakingGraph g({{"s", {Rat(10), Rat(1, 4)}}},
                     {{"a", Rat(2)}, {"b", Rat(2)}, {"c", Rat(2)}},
                     {{"s", "a"}, {"s", "b"}, {"s", "c"}});
    AttackSpec attack = AttackSpec::full_stake(g, {"s"}, {"a", "b", "c"});
    CHECK_THROWS_AS(marginal_slash(g, attack), Error);
    CHECK_THROWS_AS(partition_attackers(g, attack), Error);
}

// For stable attacks the [.]_+ brackets are provably inert: stability gives a
// service where removing v breaks feasibility, which forces
// x_v > sigma_{B_S} - c_{B_S}. The slashing identities therefore hold exactly
// and unclamped on every admissible input.
TEST_CASE("group-sum identity, bounds, and bracket inertness on random stable attacks") {
    std::mt19937_64 rng(41);
    int seen = 0;
    for (int trial = 0; trial < 300 && seen < 60; ++trial) {
        auto inst = random_stable(rng);
        if (!inst) continue;
        ++seen;
        const auto& [g, attack] = *inst;
        MarginalSlashOutcome out = marginal_slash(g, attack);
        for (const auto& group : out.groups) {
            CHECK(group.group_slash == group.group_slash_formula);
            CHECK_FALSE(group.formula_diverges);
        }
        for (const auto& [v, psi] : out.slash) {
            CHECK(psi > 0);  // strict under stability
            CHECK(psi <= attack.attackers.at(v));
            CHECK(psi <= g.stake(v));
            CHECK_FALSE(out.clamped.at(v));
        }
    }
    CHECK(seen >= 20);
}

TEST_CASE("type II split of the overlap attacker gains exactly one third") {
    RestakingGraph g = reference::overlap_graph();
    AttackSpec attack = reference::overlap_attack(g);
    SybilSplit split;
    split.parent = "v2";
    split.parts = {{"v2a", rat_parse("0.5"), true, true},
                   {"v2b", rat_parse("0.75"), true, true},
                   {"v2c", rat_parse("0.25"), true, true}};
    CHECK(type2_gain(g, attack, "v2", split) == Rat(1, 3));
}

TEST_CASE("type II split with zero slack gains nothing") {
    // Sole attacker exactly at the threshold: sigma_B == c.
    RestakingGraph g({{"s", {Rat(9), Rat(1, 2)}}}, {{"v", Rat(2)}, {"w", Rat(2)}},
                     {{"s", "v"}, {"s", "w"}});
    AttackSpec attack = AttackSpec::full_stake(g, {"s"}, {"v"});
    REQUIRE(is_stable(g, attack));
    SybilSplit split;
    split.parent = "v";
    split.parts = {{"a", Rat(1), true, true}, {"b", Rat(1), true, true}};
    CHECK(type2_gain(g, attack, "v", split) == 0);
}

TEST_CASE("type II gain follows the (k-1)(sigma - c) law in the interior") {
    std::mt19937_64 rng(43);
    int seen = 0;
    for (int trial = 0; trial < 400 && seen < 40; ++trial) {
        auto inst = random_stable(rng);
        if (!inst) continue;
        const auto& [g, attack] = *inst;
        GroupPartition p = partition_attackers(g, attack);

        // Pick a group member and split it k ways; every part must stay
        // non-redundant, which needs part stakes above the smallest slack.
        for (const auto& [fp, members] : p.groups) {
            const OperatorId& v = *members.begin();
            Rat sigma_v = g.stake(v);
            MarginalGroupResult cost = marginal_cost(g, attack, p, fp);
            Rat shield = cost.group_stake - cost.cost;
            int k = 2 + static_cast<int>(rng() % 3);
            Rat part = sigma_v / k;
            Rat min_slack = sigma_v;  // smallest feasibility slack over fp
            for (const auto& s : fp) {
                Rat slack = attacking_stake_on(g, attack, s) -
                            g.service(s).alpha * total_restaked_stake(g, s);
                min_slack = std::min(min_slack, slack);
            }
            if (part <= min_slack) continue;  // parts would be redundant
            if (part <= shield) continue;     // clamp would engage after the split

            SybilSplit split;
            split.parent = v;
            for (int i = 0; i < k; ++i)
                split.parts.push_back({v + "_p" + std::to_string(i), part, true, true});
            Rat gain = type2_gain(g, attack, v, split);
            CHECK(gain == Rat(k - 1) * shield);
            ++seen;
            break;
        }
    }
    CHECK(seen >= 15);
}

TEST_CASE("withholding leaves the overlap attacker's slash unchanged") {
    RestakingGraph g = reference::overlap_graph();
    AttackSpec attack = reference::overlap_attack(g);
    CHECK(type1_gain_marginal(g, attack, "v2", rat_parse("0.1")) == 0);
    CHECK(type1_gain_marginal(g, attack, "v2", Rat(0)) == 0);
}

TEST_CASE("slash is invariant while committed stake stays in [psi, sigma]") {
    std::mt19937_64 rng(47);
    int seen = 0;
    for (int trial = 0; trial < 300 && seen < 40; ++trial) {
        auto inst = random_stable(rng);
        if (!inst) continue;
        const auto& [g, attack] = *inst;
        MarginalSlashOutcome before = marginal_slash(g, attack);
        for (const auto& [v, x] : attack.attackers) {
            Rat psi = before.slash.at(v);
            Rat slack_cap = x - psi;
            for (const auto& s : attack.services) {
                if (!g.has_edge(s, v)) continue;
                Rat slack = attacking_stake_on(g, attack, s) -
                            g.service(s).alpha * total_restaked_stake(g, s);
                slack_cap = std::min(slack_cap, slack);
            }
            if (slack_cap <= 0) continue;
            Rat withheld = slack_cap * Rat(1, 2);
            CHECK(type1_gain_marginal(g, attack, v, withheld) == 0);
            ++seen;
            break;
        }
    }
    CHECK(seen >= 15);
}

TEST_CASE("withholding past the feasibility slack is rejected") {
    RestakingGraph g = reference::overlap_graph();
    AttackSpec attack = reference::overlap_attack(g);
    // s1 slack is 2.5 - 7/3 = 1/6; withholding 0.5 from v2 breaks s1.
    CHECK_THROWS_AS(type1_gain_marginal(g, attack, "v2", rat_parse("0.5")), Error);
    CHECK_THROWS_AS(type1_gain_marginal(g, attack, "v2", Rat(-1)), Error);
}

TEST_CASE("non-participating or non-inheriting splits are rejected for type II") {
    RestakingGraph g = reference::overlap_graph();
    AttackSpec attack = reference::overlap_attack(g);
    SybilSplit split;
    split.parent = "v2";
    split.parts = {{"a", Rat(1), true, true}, {"b", Rat(1, 2), true, false}};
    CHECK_THROWS_AS(type2_gain(g, attack, "v2", split), Error);
}
