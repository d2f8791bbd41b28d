#include "rps/config.hpp"
#include "rps/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace rps {

std::string to_string(ModelKind m) {
    switch (m) {
        case ModelKind::Unconstrained: return "unconstrained";
        case ModelKind::Constrained: return "constrained";
        case ModelKind::Heat: return "heat";
        case ModelKind::Nonlocal: return "nonlocal";
        case ModelKind::MonteCarlo: return "monte_carlo";
    }
    return "?";
}

ModelKind model_from_string(const std::string& s) {
    if (s == "unconstrained") return ModelKind::Unconstrained;
    if (s == "constrained") return ModelKind::Constrained;
    if (s == "heat") return ModelKind::Heat;
    if (s == "nonlocal") return ModelKind::Nonlocal;
    if (s == "monte_carlo") return ModelKind::MonteCarlo;
    throw ConfigError("unknown model '" + s +
                      "' (expected unconstrained|constrained|heat|nonlocal|monte_carlo)");
}

std::string InitSpec::text() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::Indicator: os << "indicator(" << a << "," << b << ")"; break;
        case Kind::Gaussian: os << "gaussian(" << a << "," << b << ")"; break;
        case Kind::Csv: os << "csv:" << path; break;
    }
    return os.str();
}

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& v, const std::string& key, int line) {
    try {
        size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size() || !std::isfinite(x)) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw ConfigError("line " + std::to_string(line) + ": key '" + key +
                          "' expects a finite number, got '" + v + "'");
    }
}

long long parse_int(const std::string& v, const std::string& key, int line) {
    try {
        size_t pos = 0;
        const long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw ConfigError("line " + std::to_string(line) + ": key '" + key +
                          "' expects an integer, got '" + v + "'");
    }
}

bool parse_bool(const std::string& v, const std::string& key, int line) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("line " + std::to_string(line) + ": key '" + key +
                      "' expects true/false, got '" + v + "'");
}

std::vector<double> parse_list(const std::string& v, const std::string& key, int line) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty())
            throw ConfigError("line " + std::to_string(line) + ": empty entry in list '" + key + "'");
        out.push_back(parse_double(item, key, line));
    }
    if (out.empty())
        throw ConfigError("line " + std::to_string(line) + ": key '" + key + "' expects a list");
    return out;
}

InitSpec parse_init(const std::string& v, int line) {
    InitSpec spec;
    if (v.rfind("csv:", 0) == 0) {
        spec.kind = InitSpec::Kind::Csv;
        spec.path = trim(v.substr(4));
        if (spec.path.empty())
            throw ConfigError("line " + std::to_string(line) + ": init csv path is empty");
        return spec;
    }
    const auto open = v.find('(');
    const auto close = v.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close < open)
        throw ConfigError("line " + std::to_string(line) +
                          ": init expects indicator(a,b), gaussian(mean,sigma) or csv:PATH");
    const std::string name = trim(v.substr(0, open));
    const std::vector<double> args = parse_list(v.substr(open + 1, close - open - 1), "init", line);
    if (args.size() != 2)
        throw ConfigError("line " + std::to_string(line) + ": init shape expects two arguments");
    spec.a = args[0];
    spec.b = args[1];
    if (name == "indicator") {
        spec.kind = InitSpec::Kind::Indicator;
        if (!(spec.a < spec.b))
            throw ConfigError("line " + std::to_string(line) + ": indicator needs a < b");
    } else if (name == "gaussian") {
        spec.kind = InitSpec::Kind::Gaussian;
        if (!(spec.b > 0.0))
            throw ConfigError("line " + std::to_string(line) + ": gaussian needs sigma > 0");
    } else {
        throw ConfigError("line " + std::to_string(line) + ": unknown init shape '" + name + "'");
    }
    return spec;
}

const std::set<std::string> kKnownKeys = {
    "model", "eta", "h", "eps", "grid.x_min", "grid.x_max", "grid.n_cells",
    "dt", "t_end", "output.times", "output.count", "init", "seed", "agents",
    "constrained", "sweep.eps_list", "sweep.alignment",
};

} // namespace

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value', got '" + line + "'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
        if (!kKnownKeys.count(key))
            throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        std::string canonical = (key == "eps") ? "h" : key;
        if (cfg.raw.count(canonical))
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        cfg.raw[canonical] = value;

        if (key == "model") cfg.model = model_from_string(value);
        else if (key == "eta") cfg.eta = parse_double(value, key, lineno);
        else if (key == "h" || key == "eps") cfg.payoff = parse_double(value, key, lineno);
        else if (key == "grid.x_min") cfg.x_min = parse_double(value, key, lineno);
        else if (key == "grid.x_max") cfg.x_max = parse_double(value, key, lineno);
        else if (key == "grid.n_cells") cfg.n_cells = static_cast<int>(parse_int(value, key, lineno));
        else if (key == "dt") cfg.dt = parse_double(value, key, lineno);
        else if (key == "t_end") cfg.t_end = parse_double(value, key, lineno);
        else if (key == "output.times") cfg.output_times = parse_list(value, key, lineno);
        else if (key == "output.count") cfg.output_count = static_cast<int>(parse_int(value, key, lineno));
        else if (key == "init") cfg.init = parse_init(value, lineno);
        else if (key == "seed") cfg.seed = static_cast<uint64_t>(parse_int(value, key, lineno));
        else if (key == "agents") cfg.agents = parse_int(value, key, lineno);
        else if (key == "constrained") cfg.mc_constrained = parse_bool(value, key, lineno);
        else if (key == "sweep.eps_list") cfg.sweep_eps = parse_list(value, key, lineno);
        else if (key == "sweep.alignment") cfg.sweep_alignment = static_cast<int>(parse_int(value, key, lineno));
    }
    if (!cfg.raw.count("model"))
        throw ConfigError("missing required key 'model'");
    if (!cfg.raw.count("eta"))
        throw ConfigError("missing required key 'eta'");
    if (!(cfg.eta > 0.0))
        throw ConfigError("eta must be positive");
    if (!cfg.raw.count("t_end"))
        throw ConfigError("missing required key 't_end'");
    if (cfg.t_end < 0.0)
        throw ConfigError("t_end must be non-negative");
    if (!cfg.raw.count("init"))
        throw ConfigError("missing required key 'init'");
    if (cfg.output_times && cfg.output_count)
        throw ConfigError("output.times and output.count are mutually exclusive");
    if (cfg.sweep_alignment < 1)
        throw ConfigError("sweep.alignment must be >= 1");
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::vector<double> RunConfig::resolved_output_times() const {
    if (output_times) {
        std::vector<double> t = *output_times;
        double prev = -1.0;
        for (double x : t) {
            if (x < 0.0 || x > t_end * (1.0 + 1e-12))
                throw ConfigError("output.times must lie in [0, t_end]");
            if (x <= prev)
                throw ConfigError("output.times must be strictly increasing");
            prev = x;
        }
        return t;
    }
    const int count = output_count.value_or(11);
    if (count < 2)
        throw ConfigError("output.count must be >= 2");
    std::vector<double> t(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i)
        t[static_cast<size_t>(i)] = t_end * i / (count - 1);
    return t;
}

} // namespace rps
