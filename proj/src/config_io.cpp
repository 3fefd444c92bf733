#include "sa3d/config_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace sa3d {
namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorKind::InvalidArgument, "config: " + msg); }

void only_keys(const json& obj, const std::string& where, std::set<std::string> allowed) {
    if (!obj.is_object()) bad("'" + where + "' must be an object");
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.count(key)) bad("unknown key '" + key + "' in '" + where + "'");
    }
}

Count get_count(const json& obj, const std::string& where, const std::string& key) {
    if (!obj.contains(key)) bad("missing '" + where + "." + key + "'");
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) bad("'" + where + "." + key + "' must be an integer");
    return v.get<Count>();
}

double get_number(const json& obj, const std::string& where, const std::string& key) {
    if (!obj.contains(key)) bad("missing '" + where + "." + key + "'");
    const auto& v = obj.at(key);
    if (!v.is_number()) bad("'" + where + "." + key + "' must be a number");
    return v.get<double>();
}

std::optional<Count> get_opt_count(const json& obj, const std::string& where, const std::string& key) {
    if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
    return get_count(obj, where, key);
}

}  // namespace

DesignConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        bad(std::string("malformed JSON: ") + e.what());
    }
    only_keys(doc, "<root>", {"arch", "clock", "memory", "blocking", "problem", "latency", "constraints"});

    DesignConfig cfg;
    if (!doc.contains("arch")) bad("missing 'arch' section");
    const auto& arch = doc.at("arch");
    only_keys(arch, "arch", {"d0_i", "d0_j", "d0_k", "d_p"});
    cfg.shape.d0_i = get_count(arch, "arch", "d0_i");
    cfg.shape.d0_j = get_count(arch, "arch", "d0_j");
    cfg.shape.d0_k = get_count(arch, "arch", "d0_k");
    cfg.shape.d_p = arch.contains("d_p") ? get_count(arch, "arch", "d_p") : cfg.shape.d0_k;
    validate(cfg.shape);

    if (doc.contains("clock")) {
        only_keys(doc.at("clock"), "clock", {"fmax_mhz"});
        cfg.clock.fmax_mhz = get_number(doc.at("clock"), "clock", "fmax_mhz");
    }
    if (doc.contains("memory")) {
        const auto& m = doc.at("memory");
        only_keys(m, "memory", {"bank_mb_s", "efficiency", "lsu_pow2"});
        if (m.contains("bank_mb_s")) cfg.mem.bank_mb_s = get_number(m, "memory", "bank_mb_s");
        if (m.contains("efficiency")) cfg.mem.efficiency = get_number(m, "memory", "efficiency");
        if (m.contains("lsu_pow2")) {
            if (!m.at("lsu_pow2").is_boolean()) bad("'memory.lsu_pow2' must be a boolean");
            cfg.mem.lsu_pow2 = m.at("lsu_pow2").get<bool>();
        }
        validate(cfg.mem);
    }
    if (doc.contains("blocking")) {
        const auto& b = doc.at("blocking");
        only_keys(b, "blocking", {"d1_i", "d1_j"});
        const auto d1_i = get_opt_count(b, "blocking", "d1_i");
        const auto d1_j = get_opt_count(b, "blocking", "d1_j");
        if (d1_i.has_value() != d1_j.has_value()) bad("'blocking' needs both d1_i and d1_j or neither");
        if (d1_i) cfg.d1_override = std::make_pair(*d1_i, *d1_j);
    }
    if (doc.contains("problem")) {
        const auto& p = doc.at("problem");
        only_keys(p, "problem", {"d2_i", "d2_j", "d2_k"});
        cfg.problem = ProblemShape{get_count(p, "problem", "d2_i"), get_count(p, "problem", "d2_j"),
                                   get_count(p, "problem", "d2_k")};
    }
    if (doc.contains("latency")) {
        const auto& l = doc.at("latency");
        only_keys(l, "latency", {"l_mac", "l_dot"});
        const LatencyProfile defaults;
        Count l_mac = l.contains("l_mac") ? get_count(l, "latency", "l_mac") : defaults.l_mac();
        std::map<Count, Count> table = defaults.table();
        if (l.contains("l_dot")) {
            const auto& t = l.at("l_dot");
            if (!t.is_object()) bad("'latency.l_dot' must map dot sizes to cycles");
            table.clear();
            for (const auto& [key, value] : t.items()) {
                Count size = 0;
                try {
                    std::size_t used = 0;
                    size = std::stoll(key, &used);
                    if (used != key.size()) throw std::invalid_argument(key);
                } catch (const std::exception&) {
                    bad("'latency.l_dot' key '" + key + "' is not an integer");
                }
                if (!value.is_number_integer()) bad("'latency.l_dot' values must be integers");
                table[size] = value.get<Count>();
            }
        }
        cfg.lat = LatencyProfile(l_mac, table);
    }
    if (doc.contains("constraints")) {
        const auto& c = doc.at("constraints");
        only_keys(c, "constraints", {"dsp_budget", "max_dp"});
        cfg.constraints.dsp_budget = get_opt_count(c, "constraints", "dsp_budget");
        cfg.constraints.max_dp = get_opt_count(c, "constraints", "max_dp");
    }
    return cfg;
}

std::string to_config_text(const DesignConfig& cfg) {
    json doc;
    doc["arch"] = {{"d0_i", cfg.shape.d0_i}, {"d0_j", cfg.shape.d0_j}, {"d0_k", cfg.shape.d0_k},
                   {"d_p", cfg.shape.d_p}};
    doc["clock"] = {{"fmax_mhz", cfg.clock.fmax_mhz}};
    doc["memory"] = {{"bank_mb_s", cfg.mem.bank_mb_s},
                     {"efficiency", cfg.mem.efficiency},
                     {"lsu_pow2", cfg.mem.lsu_pow2}};
    if (cfg.d1_override) {
        doc["blocking"] = {{"d1_i", cfg.d1_override->first}, {"d1_j", cfg.d1_override->second}};
    }
    if (cfg.problem) {
        doc["problem"] = {{"d2_i", cfg.problem->d2_i}, {"d2_j", cfg.problem->d2_j},
                          {"d2_k", cfg.problem->d2_k}};
    }
    json table = json::object();
    for (const auto& [size, lat] : cfg.lat.table()) table[std::to_string(size)] = lat;
    doc["latency"] = {{"l_mac", cfg.lat.l_mac()}, {"l_dot", table}};
    json constraints = json::object();
    if (cfg.constraints.dsp_budget) constraints["dsp_budget"] = *cfg.constraints.dsp_budget;
    if (cfg.constraints.max_dp) constraints["max_dp"] = *cfg.constraints.max_dp;
    if (!constraints.empty()) doc["constraints"] = constraints;
    return doc.dump(2) + "\n";
}

DesignConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw Error(ErrorKind::Io, "cannot open config " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

void save_config(const DesignConfig& cfg, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
    os << to_config_text(cfg);
}

}  // namespace sa3d
