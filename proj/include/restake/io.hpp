#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "restake/graph.hpp"
#include "restake/randnet.hpp"

namespace restake::io {

// Graph document:
//   {"services": [{"id", "pi", "alpha"}],
//    "operators": [{"id", "stake"}],
//    "edges": [["s", "v"], ...]}
// Numbers may be plain JSON numbers, decimal strings ("0.932"), fraction
// strings ("7/3") or exact {"num": p, "den": q} objects.
RestakingGraph graph_from_json(const nlohmann::json& j);
nlohmann::json graph_to_json(const RestakingGraph& g);
RestakingGraph load_graph(const std::string& path);
void save_graph(const RestakingGraph& g, const std::string& path);

// Attack document: {"services": [...], "attackers": [{"id", "x"?}]};
// x defaults to the operator's full stake. Optional "id" names the attack.
struct AttackFile {
    std::string id;
    AttackSpec attack;
};
AttackFile attack_from_json(const RestakingGraph& g, const nlohmann::json& j,
                            const std::string& default_id);
AttackFile load_attack(const RestakingGraph& g, const std::string& path);

// SBM configuration:
//   {"blocks": [{"service_count", "alpha", "p_other", "pi"}],
//    "n_other": ..., "sigma_bar": ..., "attacker_p": [...]}
// One background operator block; alpha may be a fraction string like "2/3".
randnet::SbmModel sbm_from_json(const nlohmann::json& j);
randnet::SbmModel load_sbm(const std::string& path);

Rat rat_from_json(const nlohmann::json& j);
nlohmann::json rat_to_json(const Rat& r);

nlohmann::json parse_file(const std::string& path);

// RFC 4180 field quoting.
std::string csv_escape(const std::string& field);
void csv_row(std::ostream& os, const std::vector<std::string>& fields);

}  // namespace restake::io
