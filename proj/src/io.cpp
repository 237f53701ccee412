#include "restake/io.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "restake/error.hpp"

namespace restake::io {

using nlohmann::json;

Rat rat_from_json(const json& j) {
    if (j.is_string()) return rat_parse(j.get<std::string>());
    if (j.is_number_integer()) return Rat(static_cast<long>(j.get<std::int64_t>()));
    if (j.is_number_unsigned()) return Rat(static_cast<unsigned long>(j.get<std::uint64_t>()));
    if (j.is_number_float()) {
        // Interpret the literal through its shortest decimal form so that
        // "1.5" or "0.932" written as JSON numbers mean the exact decimals.
        return rat_from_decimal(json(j.get<double>()).dump());
    }
    if (j.is_object() && j.contains("num") && j.contains("den")) {
        Rat num = rat_from_json(j.at("num"));
        Rat den = rat_from_json(j.at("den"));
        if (den == 0) throw Error("parse-error", "zero denominator");
        Rat r = num / den;
        r.canonicalize();
        return r;
    }
    throw Error("parse-error", "expected a number, got: " + j.dump());
}

json rat_to_json(const Rat& r) {
    if (r.get_den() == 1) {
        if (r.get_num().fits_slong_p()) return json(r.get_num().get_si());
        return json{{"num", r.get_num().get_str()}, {"den", 1}};
    }
    json out;
    out["num"] = r.get_num().fits_slong_p() ? json(r.get_num().get_si()) : json(r.get_num().get_str());
    out["den"] = r.get_den().fits_slong_p() ? json(r.get_den().get_si()) : json(r.get_den().get_str());
    return out;
}

json parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("parse-error", "cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error("parse-error", path + ": " + e.what());
    }
}

RestakingGraph graph_from_json(const json& j) {
    try {
        std::map<ServiceId, ServiceInfo> services;
        std::map<OperatorId, Rat> operators;
        std::set<std::pair<ServiceId, OperatorId>> edges;
        for (const auto& s : j.at("services")) {
            ServiceId id = s.at("id").get<std::string>();
            if (services.count(id)) throw Error("parse-error", "duplicate service id " + id);
            services[id] = ServiceInfo{rat_from_json(s.at("pi")), rat_from_json(s.at("alpha"))};
        }
        for (const auto& v : j.at("operators")) {
            OperatorId id = v.at("id").get<std::string>();
            if (operators.count(id)) throw Error("parse-error", "duplicate operator id " + id);
            operators[id] = rat_from_json(v.at("stake"));
        }
        for (const auto& e : j.at("edges")) {
            if (!e.is_array() || e.size() != 2)
                throw Error("parse-error", "edge must be [service, operator]");
            edges.insert({e.at(0).get<std::string>(), e.at(1).get<std::string>()});
        }
        return RestakingGraph(std::move(services), std::move(operators), std::move(edges));
    } catch (const json::exception& e) {
        throw Error("parse-error", e.what());
    }
}

json graph_to_json(const RestakingGraph& g) {
    json out;
    out["services"] = json::array();
    for (const auto& [id, info] : g.services())
        out["services"].push_back(
            {{"id", id}, {"pi", rat_to_json(info.pi)}, {"alpha", rat_to_json(info.alpha)}});
    out["operators"] = json::array();
    for (const auto& [id, stake] : g.operators())
        out["operators"].push_back({{"id", id}, {"stake", rat_to_json(stake)}});
    out["edges"] = json::array();
    for (const auto& [s, v] : g.edges()) out["edges"].push_back(json::array({s, v}));
    return out;
}

RestakingGraph load_graph(const std::string& path) { return graph_from_json(parse_file(path)); }

void save_graph(const RestakingGraph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("parse-error", "cannot write " + path);
    out << graph_to_json(g).dump(2) << "\n";
}

AttackFile attack_from_json(const RestakingGraph& g, const json& j, const std::string& default_id) {
    try {
        AttackFile out;
        out.id = j.value("id", default_id);
        for (const auto& s : j.at("services")) out.attack.services.insert(s.get<std::string>());
        for (const auto& a : j.at("attackers")) {
            OperatorId id = a.at("id").get<std::string>();
            Rat x = a.contains("x") ? rat_from_json(a.at("x"))
                                    : (g.has_operator(id) ? g.stake(id) : Rat(0));
            out.attack.attackers[id] = x;
        }
        validate_attack(g, out.attack);
        return out;
    } catch (const json::exception& e) {
        throw Error("parse-error", e.what());
    }
}

AttackFile load_attack(const RestakingGraph& g, const std::string& path) {
    std::string stem = path;
    if (auto pos = stem.find_last_of("/\\"); pos != std::string::npos) stem = stem.substr(pos + 1);
    if (auto pos = stem.find_last_of('.'); pos != std::string::npos) stem = stem.substr(0, pos);
    return attack_from_json(g, parse_file(path), stem);
}

namespace {

double number_from_json(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string() || j.is_object()) return to_double(rat_from_json(j));
    throw Error("config-error", "expected a number, got: " + j.dump());
}

}  // namespace

randnet::SbmModel sbm_from_json(const json& j) {
    try {
        randnet::SbmModel model;
        model.sigma_bar = number_from_json(j.at("sigma_bar"));
        std::size_t n_other = j.at("n_other").get<std::size_t>();
        model.operator_counts = {n_other};
        std::vector<double> p_row;
        for (const auto& b : j.at("blocks")) {
            randnet::SbmModel::ServiceBlock blk;
            blk.count = b.at("service_count").get<std::size_t>();
            blk.alpha = number_from_json(b.at("alpha"));
            blk.pi = b.contains("pi") ? number_from_json(b.at("pi")) : 0.0;
            model.service_blocks.push_back(blk);
            p_row.push_back(number_from_json(b.at("p_other")));
        }
        model.p = {p_row};
        for (const auto& a : j.at("attacker_p")) model.attacker_p.push_back(number_from_json(a));
        model.validate();
        return model;
    } catch (const json::exception& e) {
        throw Error("config-error", e.what());
    }
}

randnet::SbmModel load_sbm(const std::string& path) { return sbm_from_json(parse_file(path)); }

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

void csv_row(std::ostream& os, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) os << ",";
        os << csv_escape(fields[i]);
    }
    os << "\r\n";
}

}  // namespace restake::io
