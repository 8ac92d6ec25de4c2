#include "rmfg/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "rmfg/errors.hpp"

namespace rmfg {

namespace {

std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_number(const std::string& v, const std::string& where) {
    double out = 0.0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(where + ": not a number: '" + v + "'");
    return out;
}

std::size_t parse_count(const std::string& v, const std::string& where) {
    std::size_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || out == 0)
        throw ConfigError(where + ": not a positive integer: '" + v + "'");
    return out;
}

}  // namespace

ProblemConfig parse_config(std::istream& in, const std::string& origin) {
    ProblemConfig cfg;
    std::string line;
    int no = 0;
    while (std::getline(in, line)) {
        ++no;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        std::string where = origin + ":" + std::to_string(no);
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (val.empty()) throw ConfigError(where + ": empty value for '" + key + "'");
        auto& p = cfg.params;
        if (key == "model") {
            if (val == "extraction") cfg.model = ModelKind::extraction;
            else if (val == "logistic") cfg.model = ModelKind::logistic;
            else if (val == "custom") cfg.model = ModelKind::custom;
            else throw ConfigError(where + ": unknown model '" + val + "'");
        } else if (key == "kappa") p.kappa = parse_number(val, where);
        else if (key == "alpha") p.alpha = parse_number(val, where);
        else if (key == "sigma") p.sigma = parse_number(val, where);
        else if (key == "eta") p.eta = parse_number(val, where);
        else if (key == "cost") p.cost = parse_number(val, where);
        else if (key == "delta") p.delta = parse_number(val, where);
        else if (key == "epsilon") p.epsilon = parse_number(val, where);
        else if (key == "x_min_rel") cfg.x_min_rel = parse_number(val, where);
        else if (key == "tol_root") cfg.tol_root = parse_number(val, where);
        else if (key == "pia_inner") cfg.pia_inner = parse_count(val, where);
        else if (key == "pia_outer") cfg.pia_outer = parse_count(val, where);
        else throw ConfigError(where + ": unknown key '" + key + "'");
    }
    if (!(cfg.x_min_rel > 0 && cfg.x_min_rel < 1)) throw ConfigError(origin + ": x_min_rel must lie in (0, 1)");
    if (!(cfg.tol_root > 0)) throw ConfigError(origin + ": tol_root must be > 0");
    return cfg;
}

ProblemConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(f, path);
}

ProblemSpec build_spec(const ProblemConfig& cfg) {
    ProblemSpec s;
    try {
        switch (cfg.model) {
            case ModelKind::extraction: s = build_extraction_model(cfg.params); break;
            case ModelKind::logistic: s = build_logistic_model(cfg.params); break;
            case ModelKind::custom:
                throw ConfigError("model = custom needs programmatic handles; use the library API");
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    s.x_min_rel = cfg.x_min_rel;
    s.tol_root = cfg.tol_root;
    return s;
}

}  // namespace rmfg
