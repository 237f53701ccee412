#pragma once

#include <string>
#include <vector>

#include "restake/graph.hpp"
#include "restake/randnet.hpp"

namespace restake::reference {

// Two services, two operators; the smallest graph with a profitable and
// feasible single-operator attack.
RestakingGraph simple_pair_graph();

// Two services with one overlapping attacker and two passive operators; the
// workhorse instance for the marginal and multiplicative mechanisms.
RestakingGraph overlap_graph();
AttackSpec overlap_attack(const RestakingGraph& g);

// overlap_graph with the overlapping attacker replaced by three operators
// (stakes 0.5 / 0.75 / 0.25), all attacking both services.
RestakingGraph threeway_graph();
AttackSpec threeway_attack(const RestakingGraph& g);

// Two-block model: a well-connected high-stake block next to a sparse
// low-stake block, symmetric attacker connectivity.
randnet::SbmModel two_block_model();

struct CheckRow {
    std::string fixture;
    std::string name;
    double computed = 0;
    double expected = 0;
    double tolerance = 0;
    bool pass = false;
    std::string exact;  // exact rational rendering where applicable
};

std::vector<std::string> fixture_names();

// Runs one fixture's checks; tolerance_override > 0 replaces the built-in
// tolerances. Throws "config-error" for unknown fixture names.
std::vector<CheckRow> run_fixture(const std::string& name, double tolerance_override = 0);

// All fixtures in order.
std::vector<CheckRow> run_all(double tolerance_override = 0);

}  // namespace restake::reference
