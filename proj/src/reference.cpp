#include "restake/reference.hpp"

#include <cmath>

#include "restake/error.hpp"
#include "restake/marginal.hpp"
#include "restake/multislash.hpp"
#include "restake/strategy.hpp"

namespace restake::reference {

namespace {

Rat q(const char* text) { return rat_parse(text); }

void push(std::vector<CheckRow>& rows, const std::string& fixture, const std::string& name,
          double computed, double expected, double tol, double tol_override,
          const std::string& exact = "") {
    CheckRow row;
    row.fixture = fixture;
    row.name = name;
    row.computed = computed;
    row.expected = expected;
    row.tolerance = tol_override > 0 ? tol_override : tol;
    row.pass = std::abs(computed - expected) <= row.tolerance;
    row.exact = exact;
    rows.push_back(std::move(row));
}

}  // namespace

RestakingGraph simple_pair_graph() {
    return RestakingGraph(
        {{"s1", {q("1.1"), q("2/3")}}, {"s2", {q("1"), q("1/2")}}},
        {{"v1", q("1")}, {"v2", q("1.1")}},
        {{"s1", "v1"}, {"s2", "v1"}, {"s2", "v2"}});
}

RestakingGraph overlap_graph() {
    return RestakingGraph(
        {{"s1", {q("2"), q("2/3")}}, {"s2", {q("2"), q("1/2")}}},
        {{"v0", q("1")}, {"v1", q("1")}, {"v2", q("1.5")}, {"v3", q("1")}, {"v4", q("1")}},
        {{"s1", "v0"}, {"s1", "v1"}, {"s1", "v2"}, {"s2", "v2"}, {"s2", "v3"}, {"s2", "v4"}});
}

AttackSpec overlap_attack(const RestakingGraph& g) {
    return AttackSpec::full_stake(g, {"s1", "s2"}, {"v1", "v2", "v3"});
}

RestakingGraph threeway_graph() {
    return RestakingGraph(
        {{"s1", {q("2"), q("2/3")}}, {"s2", {q("2"), q("1/2")}}},
        {{"v0", q("1")},
         {"v1", q("1")},
         {"v2a", q("0.5")},
         {"v2b", q("0.75")},
         {"v2c", q("0.25")},
         {"v3", q("1")},
         {"v4", q("1")}},
        {{"s1", "v0"},
         {"s1", "v1"},
         {"s1", "v2a"},
         {"s1", "v2b"},
         {"s1", "v2c"},
         {"s2", "v2a"},
         {"s2", "v2b"},
         {"s2", "v2c"},
         {"s2", "v3"},
         {"s2", "v4"}});
}

AttackSpec threeway_attack(const RestakingGraph& g) {
    return AttackSpec::full_stake(g, {"s1", "s2"}, {"v1", "v2a", "v2b", "v2c", "v3"});
}

randnet::SbmModel two_block_model() {
    randnet::SbmModel model;
    model.service_blocks = {{50, 2.0 / 3.0, 10.0}, {50, 0.5, 2.0}};
    model.operator_counts = {60};
    model.p = {{0.30, 0.02}};
    model.sigma_bar = 1.0;
    model.attacker_p = {0.5, 0.5};
    return model;
}

std::vector<std::string> fixture_names() {
    return {"attack-predicates", "marginal-two-service", "marginal-group-split",
            "max-scheme-two-service", "utility-two-service", "sbm-two-block"};
}

namespace {

std::vector<CheckRow> fixture_attack_predicates(double tol) {
    std::vector<CheckRow> rows;
    const std::string fx = "attack-predicates";
    RestakingGraph g = simple_pair_graph();
    AttackSpec attack = AttackSpec::full_stake(g, {"s1"}, {"v1"});
    push(rows, fx, "feasible", is_feasible(g, attack) ? 1 : 0, 1, 0, tol);
    push(rows, fx, "profitable", is_profitable(g, attack) ? 1 : 0, 1, 0, tol);
    bool enumerated = false;
    for (const auto& a : enumerate_attacks(g, 8, 8))
        if (a.services == attack.services && a.attackers.count("v1") && a.attackers.size() == 1)
            enumerated = true;
    push(rows, fx, "enumerated", enumerated ? 1 : 0, 1, 0, tol);
    return rows;
}

std::vector<CheckRow> fixture_marginal_two_service(double tol) {
    std::vector<CheckRow> rows;
    const std::string fx = "marginal-two-service";
    RestakingGraph g = overlap_graph();
    AttackSpec attack = overlap_attack(g);
    MarginalSlashOutcome outcome = marginal_slash(g, attack);
    push(rows, fx, "psi_v1", to_double(outcome.slash.at("v1")), 0.83, 0.005, tol,
         rat_to_fraction(outcome.slash.at("v1")));
    push(rows, fx, "psi_v2", to_double(outcome.slash.at("v2")), 1.33, 0.005, tol,
         rat_to_fraction(outcome.slash.at("v2")));
    push(rows, fx, "psi_v3", to_double(outcome.slash.at("v3")), 0.25, 0.005, tol,
         rat_to_fraction(outcome.slash.at("v3")));
    return rows;
}

std::vector<CheckRow> fixture_marginal_group_split(double tol) {
    std::vector<CheckRow> rows;
    const std::string fx = "marginal-group-split";
    RestakingGraph g = threeway_graph();
    AttackSpec attack = threeway_attack(g);
    MarginalSlashOutcome outcome = marginal_slash(g, attack);
    push(rows, fx, "psi_part1", to_double(outcome.slash.at("v2a")), 0.33, 0.005, tol,
         rat_to_fraction(outcome.slash.at("v2a")));
    push(rows, fx, "psi_part2", to_double(outcome.slash.at("v2b")), 0.58, 0.005, tol,
         rat_to_fraction(outcome.slash.at("v2b")));
    push(rows, fx, "psi_part3", to_double(outcome.slash.at("v2c")), 0.08, 0.005, tol,
         rat_to_fraction(outcome.slash.at("v2c")));
    Rat group_total = outcome.slash.at("v2a") + outcome.slash.at("v2b") + outcome.slash.at("v2c");
    push(rows, fx, "group_total", to_double(group_total), 0.99, 0.015, tol,
         rat_to_fraction(group_total));

    // The same instance as a three-way participating split of the overlap attacker.
    RestakingGraph base = overlap_graph();
    AttackSpec base_attack = overlap_attack(base);
    SybilSplit split;
    split.parent = "v2";
    split.parts = {{"v2a", q("0.5"), true, true},
                   {"v2b", q("0.75"), true, true},
                   {"v2c", q("0.25"), true, true}};
    Rat gain = type2_gain(base, base_attack, "v2", split);
    push(rows, fx, "type2_gain", to_double(gain), 0.34, 0.007, tol, rat_to_fraction(gain));
    return rows;
}

std::vector<CheckRow> fixture_max_scheme(double tol) {
    std::vector<CheckRow> rows;
    const std::string fx = "max-scheme-two-service";
    RestakingGraph g = overlap_graph();
    AttackSpec attack = overlap_attack(g);

    MultSlashOutcome flat = mult_slash_max(g, attack);
    push(rows, fx, "phi_s1", to_double(flat.factors.at("s1").phi), 0.932, 0.005, tol,
         rat_to_fraction(flat.factors.at("s1").phi));
    push(rows, fx, "phi_s2", to_double(flat.factors.at("s2").phi), 0.7, 0.005, tol,
         rat_to_fraction(flat.factors.at("s2").phi));
    push(rows, fx, "psi_v1", to_double(flat.slash.at("v1")), 0.932, 0.005, tol,
         rat_to_fraction(flat.slash.at("v1")));
    push(rows, fx, "psi_v2", to_double(flat.slash.at("v2")), 1.398, 0.005, tol,
         rat_to_fraction(flat.slash.at("v2")));
    push(rows, fx, "psi_v3", to_double(flat.slash.at("v3")), 0.352, 0.005, tol,
         rat_to_fraction(flat.slash.at("v3")));
    push(rows, fx, "total", to_double(flat.total()), 2.682, 0.005, tol,
         rat_to_fraction(flat.total()));

    AttackSpec withheld = attack;
    withheld.attackers["v2"] = q("1.4");
    MultSlashOutcome bent = mult_slash_max(g, withheld);
    push(rows, fx, "withheld_psi_v1", to_double(bent.slash.at("v1")), 0.97, 0.005, tol,
         rat_to_fraction(bent.slash.at("v1")));
    push(rows, fx, "withheld_psi_v2", to_double(bent.slash.at("v2")), 1.36, 0.005, tol,
         rat_to_fraction(bent.slash.at("v2")));
    push(rows, fx, "withheld_psi_v3", to_double(bent.slash.at("v3")), 0.39, 0.005, tol,
         rat_to_fraction(bent.slash.at("v3")));
    push(rows, fx, "withheld_total", to_double(bent.total()), 2.72, 0.005, tol,
         rat_to_fraction(bent.total()));
    push(rows, fx, "total_ordering", flat.total() < bent.total() ? 1 : 0, 1, 0, tol);
    return rows;
}

std::vector<CheckRow> fixture_utility(double tol) {
    std::vector<CheckRow> rows;
    const std::string fx = "utility-two-service";
    RestakingGraph g = overlap_graph();
    AttackSpec attack = overlap_attack(g);

    UtilityContext ctx2 = make_context(g, attack, "v2");
    push(rows, fx, "u_v2_full", utility_two_services(ctx2, 1.5), 1.002, 0.005, tol);

    UtilityContext ctx1 = make_context(g, attack, "v1");
    push(rows, fx, "u_v1_full", utility_single(ctx1, 1.0), -0.132, 0.005, tol);

    push(rows, fx, "u_v1_pooled", utility_attack_level(g, attack, "v1", 1.0), 0.21, 0.01, tol);
    return rows;
}

std::vector<CheckRow> fixture_sbm(double tol) {
    std::vector<CheckRow> rows;
    const std::string fx = "sbm-two-block";
    randnet::ClearanceModel m = randnet::derive_clearance(two_block_model());
    push(rows, fx, "mu_1", m.blocks[0].mu, 18.0, 1e-9, tol);
    push(rows, fx, "sigma_1", m.blocks[0].sigma, 3.54965, 1e-4, tol);
    push(rows, fx, "mu_2", m.blocks[1].mu, 1.2, 1e-9, tol);
    push(rows, fx, "sigma_2", m.blocks[1].sigma, 1.08444, 1e-4, tol);
    push(rows, fx, "q1_at_3", randnet::clearance(m, 0, 3.0), 1.673e-6, 5e-8, tol);
    push(rows, fx, "q2_at_3", randnet::clearance(m, 1, 3.0), 0.95153, 1e-4, tol);
    push(rows, fx, "p_at_3", randnet::success_single(m, 3.0), 0.47576, 1e-4, tol);
    push(rows, fx, "p2_at_3", randnet::success_k_identity(m, 3.0, 2), 0.30449, 1e-4, tol);
    push(rows, fx, "p_prime_3_2", randnet::success_sybil(m, 3.0, 2), 0.51626, 1e-4, tol);
    auto count = randnet::min_sybil_count(m, 3.0);
    push(rows, fx, "k_star", count.k_star ? *count.k_star : -1, 2, 0, tol);
    return rows;
}

}  // namespace

std::vector<CheckRow> run_fixture(const std::string& name, double tolerance_override) {
    if (name == "attack-predicates") return fixture_attack_predicates(tolerance_override);
    if (name == "marginal-two-service") return fixture_marginal_two_service(tolerance_override);
    if (name == "marginal-group-split") return fixture_marginal_group_split(tolerance_override);
    if (name == "max-scheme-two-service") return fixture_max_scheme(tolerance_override);
    if (name == "utility-two-service") return fixture_utility(tolerance_override);
    if (name == "sbm-two-block") return fixture_sbm(tolerance_override);
    throw Error("config-error", "unknown fixture: " + name);
}

std::vector<CheckRow> run_all(double tolerance_override) {
    std::vector<CheckRow> rows;
    for (const auto& name : fixture_names()) {
        auto fixture_rows = run_fixture(name, tolerance_override);
        rows.insert(rows.end(), fixture_rows.begin(), fixture_rows.end());
    }
    return rows;
}

}  // namespace restake::reference
