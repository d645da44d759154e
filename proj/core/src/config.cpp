#include "isofdr/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "isofdr/error.hpp"

namespace isofdr::io {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
        throw InputError("config key '" + key + "': expected a number, got '" + text + "'");
    }
    return v;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    Int v{};
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
        throw InputError("config key '" + key + "': expected an integer, got '" + text + "'");
    }
    return v;
}

bool to_bool(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw InputError("config key '" + key + "': expected a boolean, got '" + text + "'");
}

void reject_unknown(const KeyValues& kv, const std::set<std::string>& known) {
    for (const auto& [k, v] : kv) {
        if (!known.contains(k)) throw InputError("unknown config key '" + k + "'");
    }
}

Sides parse_sides(const std::string& s) {
    if (s == "none") return Sides::None;
    if (s == "left") return Sides::Left;
    if (s == "right") return Sides::Right;
    if (s == "both") return Sides::Both;
    throw InputError("sides must be one of none, left, right, both (got '" + s + "')");
}

Which parse_which(const std::string& s) {
    if (s == "fdr") return Which::LocalFdr;
    if (s == "Fdr" || s == "tail") return Which::TailFdr;
    if (s == "both") return Which::Both;
    throw InputError("which must be one of fdr, Fdr, both (got '" + s + "')");
}

CountScale parse_scale(const std::string& s) {
    if (s == "fitted") return CountScale::Fitted;
    if (s == "observed") return CountScale::Observed;
    throw InputError("delta_scale must be fitted or observed (got '" + s + "')");
}

void check_alphas(const std::vector<double>& alphas) {
    if (alphas.empty()) throw InputError("at least one alpha level is required");
    for (double a : alphas) {
        if (!(a > 0.0 && a < 1.0)) throw InputError("alpha levels must lie in (0, 1)");
    }
}

}  // namespace

KeyValues parse_key_values(const std::string& text) {
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw InputError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw InputError("config line " + std::to_string(lineno) + ": empty key");
        kv[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

KeyValues read_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_key_values(buf.str());
}

KeyValues merge(KeyValues base, const KeyValues& overrides) {
    for (const auto& [k, v] : overrides) base[k] = v;
    return base;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (trim(item).empty()) continue;
        out.push_back(to_double("list", item));
    }
    return out;
}

const char* to_string(Sides sides) {
    switch (sides) {
        case Sides::None: return "none";
        case Sides::Left: return "left";
        case Sides::Right: return "right";
        case Sides::Both: return "both";
    }
    return "?";
}

TailBoundaries AnalysisConfig::boundaries() const {
    TailBoundaries b;
    if (sides == Sides::Left || sides == Sides::Both) b.left = null_region.lo;
    if (sides == Sides::Right || sides == Sides::Both) b.right = null_region.hi;
    return b;
}

void AnalysisConfig::validate() const {
    if (!(width > 0.0)) throw InputError("width must be positive");
    if (!(range.lo < range.hi)) throw InputError("histogram range requires range_lo < range_hi");
    if (!(null_region.lo < null_region.hi)) throw InputError("null region requires null_lo < null_hi");
    if (null_region.lo < range.lo || null_region.hi > range.hi) {
        throw InputError("null region must lie inside the histogram range");
    }
    check_alphas(alphas);
    if (df && !(*df > 0.0)) throw InputError("df must be positive");
    if (!(clamp_z > 0.0)) throw InputError("clamp_z must be positive");
    if (!(fit.tol > 0.0) || fit.max_iter <= 0) throw InputError("fit controls must be positive");
}

AnalysisConfig analysis_config_from(const KeyValues& kv) {
    reject_unknown(kv, {"width", "range_lo", "range_hi", "null_lo", "null_hi", "family", "sides",
                        "method", "which", "alphas", "column", "df", "clamp_z", "tol", "max_iter",
                        "delta_scale", "per_tail", "output_dir"});
    if (!kv.contains("range_lo") || !kv.contains("range_hi")) {
        throw InputError("range_lo and range_hi are required");
    }
    AnalysisConfig c;
    for (const auto& [k, v] : kv) {
        if (k == "width") c.width = to_double(k, v);
        else if (k == "range_lo") c.range.lo = to_double(k, v);
        else if (k == "range_hi") c.range.hi = to_double(k, v);
        else if (k == "null_lo") c.null_region.lo = to_double(k, v);
        else if (k == "null_hi") c.null_region.hi = to_double(k, v);
        else if (k == "family") c.family = parse_family(v);
        else if (k == "sides") c.sides = parse_sides(v);
        else if (k == "method") c.method = parse_method(v);
        else if (k == "which") c.which = parse_which(v);
        else if (k == "alphas") c.alphas = parse_double_list(v);
        else if (k == "column") c.column = v;
        else if (k == "df") c.df = to_double(k, v);
        else if (k == "clamp_z") c.clamp_z = to_double(k, v);
        else if (k == "tol") c.fit.tol = to_double(k, v);
        else if (k == "max_iter") c.fit.max_iter = to_int<int>(k, v);
        else if (k == "delta_scale") c.covariance.scale = parse_scale(v);
        else if (k == "per_tail") c.per_tail = to_bool(k, v);
        else if (k == "output_dir") c.output_dir = v;
    }
    c.validate();
    return c;
}

SimulationConfig simulation_config_from(const KeyValues& kv) {
    reject_unknown(kv, {"preset", "p0", "n", "reps", "seed", "width", "range_lo", "range_hi", "fit_lo",
                        "fit_hi", "iso_boundary", "alphas", "threads", "method", "tol", "max_iter",
                        "delta_scale", "output_dir"});
    SimulationConfig c;
    if (auto it = kv.find("preset"); it != kv.end()) {
        c.preset = it->second;
        c.scenario = scenario_preset(c.preset);
    }
    for (const auto& [k, v] : kv) {
        if (k == "p0") c.scenario.p0 = to_double(k, v);
        else if (k == "n") c.scenario.n = to_int<std::size_t>(k, v);
        else if (k == "reps") c.scenario.reps = to_int<std::size_t>(k, v);
        else if (k == "seed") c.scenario.base_seed = to_int<std::uint64_t>(k, v);
        else if (k == "width") c.scenario.width = to_double(k, v);
        else if (k == "range_lo") c.scenario.hist_range.lo = to_double(k, v);
        else if (k == "range_hi") c.scenario.hist_range.hi = to_double(k, v);
        else if (k == "fit_lo") c.scenario.fitting_interval.lo = to_double(k, v);
        else if (k == "fit_hi") c.scenario.fitting_interval.hi = to_double(k, v);
        else if (k == "iso_boundary") c.scenario.iso_boundary = to_double(k, v);
        else if (k == "alphas") c.study.alphas = parse_double_list(v);
        else if (k == "threads") c.study.threads = to_int<unsigned>(k, v);
        else if (k == "method") c.study.method = parse_method(v);
        else if (k == "tol") c.study.fit.tol = to_double(k, v);
        else if (k == "max_iter") c.study.fit.max_iter = to_int<int>(k, v);
        else if (k == "delta_scale") c.study.covariance.scale = parse_scale(v);
        else if (k == "output_dir") c.output_dir = v;
    }
    check_alphas(c.study.alphas);
    c.scenario.validate();
    return c;
}

std::filesystem::path resolve_output_dir(const std::filesystem::path& configured) {
    if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') return env;
    return configured;
}

}  // namespace isofdr::io
