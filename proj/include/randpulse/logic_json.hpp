// randpulse: netlist JSON interchange and trace export.
//
// Netlist schema:
//   { "components": [ { "id": str, "kind": str, "params": {..},
//                       "inputs": [net..], "outputs": [net..] } ],
//     "ports": { name: net } }
// Nets are string identifiers in the file, mapped to dense ids on load.
#pragma once

#include <map>
#include <ostream>
#include <string>

#include <json.hpp>

#include "randpulse/logic.hpp"

namespace randpulse {

inline const std::map<std::string, CompKind>& kind_names() {
    static const std::map<std::string, CompKind> m = {
        {"DFF", CompKind::DFF},   {"TFF", CompKind::TFF},   {"DRFF", CompKind::DRFF},
        {"TRFF", CompKind::TRFF}, {"PRFF", CompKind::PRFF}, {"AND", CompKind::AND},
        {"OR", CompKind::OR},     {"NOR", CompKind::NOR},   {"XOR", CompKind::XOR},
        {"NOT", CompKind::NOT_GATE}, {"BUF", CompKind::BUF}, {"CONST", CompKind::CONST},
        {"RPS", CompKind::RPS},   {"DLY", CompKind::DLY},   {"SWITCH", CompKind::SWITCH},
        {"RPG", CompKind::RPG}};
    return m;
}

inline std::string kind_name(CompKind k) {
    for (const auto& [name, kind] : kind_names())
        if (kind == k) return name;
    throw std::logic_error("unknown component kind");
}

inline nlohmann::json netlist_to_json(const Netlist& nl) {
    // stable net naming: ports keep their names, the rest get n<id>
    std::map<int, std::string> net_name;
    for (const auto& [name, net] : nl.ports) net_name[net] = name;
    auto name_of = [&](int net) {
        auto it = net_name.find(net);
        return it != net_name.end() ? it->second : "n" + std::to_string(net);
    };
    nlohmann::json j;
    j["components"] = nlohmann::json::array();
    for (const Component& c : nl.components) {
        nlohmann::json jc;
        jc["id"] = c.id;
        jc["kind"] = kind_name(c.kind);
        nlohmann::json jp = nlohmann::json::object();
        const CompParams& p = c.params;
        const CompParams def{};
        if (c.kind == CompKind::PRFF) {
            jp["lfsr_len"] = p.lfsr_len;
            jp["lfsr_seed"] = p.lfsr_seed;
            if (!p.taps.empty()) jp["taps"] = p.taps;
        }
        if (p.delay != def.delay) jp["delay"] = p.delay;
        if (c.kind == CompKind::CONST) jp["level"] = p.level;
        if (c.kind == CompKind::SWITCH) jp["closed"] = p.closed;
        if (c.kind == CompKind::RPG) { jp["f"] = p.f; jp["w"] = p.w; }
        if (p.init_q) jp["init_q"] = true;
        if (!p.entropy_stream.empty()) jp["entropy_stream"] = p.entropy_stream;
        jc["params"] = jp;
        jc["inputs"] = nlohmann::json::array();
        for (int n : c.inputs) jc["inputs"].push_back(n < 0 ? "" : name_of(n));
        jc["outputs"] = nlohmann::json::array();
        for (int n : c.outputs) jc["outputs"].push_back(name_of(n));
        j["components"].push_back(jc);
    }
    j["ports"] = nlohmann::json::object();
    for (const auto& [name, net] : nl.ports) j["ports"][name] = name_of(net);
    return j;
}

inline Netlist netlist_from_json(const nlohmann::json& j) {
    Netlist nl;
    std::map<std::string, int> nets;
    auto net_of = [&](const std::string& name) {
        if (name.empty()) return -1;
        auto [it, fresh] = nets.emplace(name, nl.net_count);
        if (fresh) nl.add_net();
        return it->second;
    };
    for (const auto& jc : j.at("components")) {
        Component c;
        c.id = jc.at("id").get<std::string>();
        auto kit = kind_names().find(jc.at("kind").get<std::string>());
        if (kit == kind_names().end())
            throw std::runtime_error(c.id + ": unknown kind " + jc.at("kind").get<std::string>());
        c.kind = kit->second;
        if (jc.contains("params")) {
            const auto& jp = jc["params"];
            if (jp.contains("lfsr_len")) c.params.lfsr_len = jp["lfsr_len"].get<unsigned>();
            if (jp.contains("lfsr_seed")) c.params.lfsr_seed = jp["lfsr_seed"].get<std::uint32_t>();
            if (jp.contains("taps")) c.params.taps = jp["taps"].get<std::vector<unsigned>>();
            if (jp.contains("delay")) c.params.delay = jp["delay"].get<double>();
            if (jp.contains("level")) c.params.level = jp["level"].get<bool>();
            if (jp.contains("closed")) c.params.closed = jp["closed"].get<bool>();
            if (jp.contains("f")) c.params.f = jp["f"].get<double>();
            if (jp.contains("w")) c.params.w = jp["w"].get<double>();
            if (jp.contains("init_q")) c.params.init_q = jp["init_q"].get<bool>();
            if (jp.contains("entropy_stream")) c.params.entropy_stream = jp["entropy_stream"].get<std::string>();
        }
        for (const auto& n : jc.at("inputs")) c.inputs.push_back(net_of(n.get<std::string>()));
        for (const auto& n : jc.at("outputs")) c.outputs.push_back(net_of(n.get<std::string>()));
        nl.components.push_back(std::move(c));
    }
    for (const auto& [name, net] : j.at("ports").items())
        nl.add_port(name, net_of(net.get<std::string>()));
    nl.validate();
    return nl;
}

/// CSV trace export: time,net,level — one row per transition, time-ordered.
inline void trace_to_csv(std::ostream& os, const Trace& trace, const Netlist& nl) {
    std::map<int, std::string> net_name;
    for (const auto& [name, net] : nl.ports) net_name[net] = name;
    struct Row { double t; std::string net; int level; };
    std::vector<Row> rows;
    for (const auto& [net, lt] : trace.nets) {
        std::string name = net_name.count(net) ? net_name[net] : "n" + std::to_string(net);
        rows.push_back({0.0, name, lt.initial_high});
        bool level = lt.initial_high;
        for (double t : lt.transitions) {
            level = !level;
            rows.push_back({t, name, level});
        }
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return a.t != b.t ? a.t < b.t : a.net < b.net;
    });
    os.precision(17);
    os << "time,net,level\n";
    for (const Row& r : rows) os << r.t << "," << r.net << "," << r.level << "\n";
}

} // namespace randpulse
