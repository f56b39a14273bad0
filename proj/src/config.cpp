#include "dfr/config.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dfr/version.hpp"

namespace dfr {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                          (s.front() == '\'' && s.back() == '\'')))
        return s.substr(1, s.size() - 2);
    return s;
}

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error("config: " + msg); }

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        if (!v.empty() && v[0] == '-') fail(key + " must be non-negative, got " + v);
        const unsigned long long x = std::stoull(v, &pos);
        if (pos != v.size()) fail(key + ": trailing characters in '" + v + "'");
        return x;
    } catch (const std::invalid_argument&) {
        fail(key + ": not an integer: '" + v + "'");
    } catch (const std::out_of_range&) {
        fail(key + ": out of range: '" + v + "'");
    }
}

double parse_f64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) fail(key + ": trailing characters in '" + v + "'");
        return x;
    } catch (const std::invalid_argument&) {
        fail(key + ": not a number: '" + v + "'");
    } catch (const std::out_of_range&) {
        fail(key + ": out of range: '" + v + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    fail(key + ": expected true/false, got '" + v + "'");
}

}  // namespace

RunConfig default_config(CaseId id) {
    const CaseSpec& cs = get_case(id);
    RunConfig c;
    c.case_name = cs.name;
    c.case_id = id;
    c.train_points = cs.defaults.train_points;
    c.validation_points = cs.defaults.validation_points;
    c.modes = cs.defaults.modes;
    c.iterations = cs.defaults.iterations;
    c.out_dir = "runs/" + cs.name;
    return c;
}

RunConfig parse_config_text(const std::string& text) {
    // first pass: collect key/value pairs, reject duplicates and unknowns later
    std::vector<std::pair<std::string, std::string>> kv;
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            fail("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = unquote(trim(line.substr(eq + 1)));
        if (key.empty() || value.empty())
            fail("line " + std::to_string(lineno) + ": empty key or value");
        for (const auto& [k, v] : kv)
            if (k == key) fail("duplicate key '" + key + "'");
        kv.emplace_back(key, value);
    }

    std::string case_name = "case1";
    for (const auto& [k, v] : kv)
        if (k == "case") case_name = v;
    const auto id = case_from_name(case_name);
    if (!id) fail("unknown case '" + case_name + "'");

    RunConfig c = default_config(*id);
    for (const auto& [key, v] : kv) {
        if (key == "case") continue;
        else if (key == "train_points") c.train_points = parse_u64(key, v);
        else if (key == "validation_points") c.validation_points = parse_u64(key, v);
        else if (key == "modes") c.modes = static_cast<int>(parse_u64(key, v));
        else if (key == "iterations") c.iterations = parse_u64(key, v);
        else if (key == "seed") c.seed = parse_u64(key, v);
        else if (key == "learning_rate") c.learning_rate = parse_f64(key, v);
        else if (key == "adam_beta1") c.adam_beta1 = parse_f64(key, v);
        else if (key == "adam_beta2") c.adam_beta2 = parse_f64(key, v);
        else if (key == "adam_epsilon") c.adam_epsilon = parse_f64(key, v);
        else if (key == "callback_decay") c.callback_decay = parse_f64(key, v);
        else if (key == "callback_floor") c.callback_floor = parse_f64(key, v);
        else if (key == "reject_steps") c.reject_steps = parse_bool(key, v);
        else if (key == "depth") c.depth = static_cast<int>(parse_u64(key, v));
        else if (key == "width") c.width = static_cast<int>(parse_u64(key, v));
        else if (key == "validation_every") c.validation_every = parse_u64(key, v);
        else if (key == "rhs_refine") c.rhs_refine = static_cast<int>(parse_u64(key, v));
        else if (key == "csv_flush_every") c.csv_flush_every = parse_u64(key, v);
        else if (key == "out_dir") c.out_dir = v;
        else fail("unknown key '" + key + "'");
    }

    if (c.train_points < 1) fail("train_points must be >= 1");
    if (c.validation_points < 1) fail("validation_points must be >= 1");
    if (c.modes < 1) fail("modes must be >= 1");
    if (static_cast<std::size_t>(c.modes) > c.train_points)
        fail("modes must not exceed train_points (midpoint quadrature cannot carry them)");
    if (static_cast<std::size_t>(c.modes) > c.validation_points)
        fail("modes must not exceed validation_points");
    if (!(c.learning_rate > 0)) fail("learning_rate must be positive");
    if (!(c.callback_decay > 0 && c.callback_decay < 1)) fail("callback_decay must lie in (0,1)");
    if (!(c.callback_floor > 0)) fail("callback_floor must be positive");
    if (c.depth < 1 || c.width < 1) fail("depth and width must be >= 1");
    if (c.validation_every < 1) fail("validation_every must be >= 1");
    if (c.rhs_refine < 1) fail("rhs_refine must be >= 1");
    if (c.validation_points == c.train_points)
        c.warnings.push_back(
            "validation_points equals train_points: validation cannot detect integration "
            "overfitting");
    if (static_cast<std::size_t>(c.modes) == c.train_points &&
        c.case_id != CaseId::Case21Under)
        c.warnings.push_back(
            "modes equals train_points: under-integrated configuration (intentional only for "
            "case2_1_underintegrated)");
    return c;
}

RunConfig parse_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) fail("cannot open " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config_text(ss.str());
}

std::string iso8601_utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string manifest_to_json(const RunManifest& m) {
    nlohmann::json j;
    j["library_version"] = m.library_version;
    j["start_time"] = m.start_time;
    j["end_time"] = m.end_time;
    j["status"] = m.status;
    j["final_loss"] = m.final_loss;
    j["final_rel_error"] = m.final_rel_error;
    nlohmann::json cfg;
    cfg["case"] = m.config.case_name;
    cfg["train_points"] = m.config.train_points;
    cfg["validation_points"] = m.config.validation_points;
    cfg["modes"] = m.config.modes;
    cfg["iterations"] = m.config.iterations;
    cfg["seed"] = m.config.seed;
    cfg["learning_rate"] = m.config.learning_rate;
    cfg["adam_beta1"] = m.config.adam_beta1;
    cfg["adam_beta2"] = m.config.adam_beta2;
    cfg["adam_epsilon"] = m.config.adam_epsilon;
    cfg["callback_decay"] = m.config.callback_decay;
    cfg["callback_floor"] = m.config.callback_floor;
    cfg["reject_steps"] = m.config.reject_steps;
    cfg["depth"] = m.config.depth;
    cfg["width"] = m.config.width;
    cfg["validation_every"] = m.config.validation_every;
    cfg["rhs_refine"] = m.config.rhs_refine;
    cfg["csv_flush_every"] = m.config.csv_flush_every;
    cfg["out_dir"] = m.config.out_dir;
    j["config"] = cfg;
    return j.dump(2) + "\n";
}

void write_manifest_atomic(const std::filesystem::path& path, const RunManifest& manifest) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::trunc);
        if (!os) throw std::runtime_error("manifest: cannot open " + tmp.string());
        os << manifest_to_json(manifest);
        if (!os) throw std::runtime_error("manifest: write failed");
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace dfr
