#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "isofdr/fdr_core.hpp"
#include "isofdr/histogram.hpp"
#include "isofdr/isotonic.hpp"
#include "isofdr/null_model.hpp"
#include "isofdr/simulation.hpp"

namespace isofdr::io {

/// Environment variable that overrides the output directory of a config file.
inline constexpr const char* kOutputDirEnv = "ISOFDR_OUTPUT_DIR";

using KeyValues = std::map<std::string, std::string>;

/// Flat `key = value` file; `#` starts a comment; blank lines are ignored.
KeyValues read_key_values(const std::filesystem::path& path);
KeyValues parse_key_values(const std::string& text);

/// Later maps win.
KeyValues merge(KeyValues base, const KeyValues& overrides);

enum class Sides { None, Left, Right, Both };

struct AnalysisConfig {
    double width = 0.05;
    Range range{};
    NullRegion null_region{-1.2, 1.2};
    Family family = Family::Normal;
    Sides sides = Sides::Both;
    MonotoneMethod method = MonotoneMethod::Pava;
    Which which = Which::Both;
    std::vector<double> alphas{0.05, 0.1, 0.15};
    std::string column = "1";  // header name or 1-based index
    std::optional<double> df;  // when set, inputs are t statistics mapped to z
    double clamp_z = 8.0;
    FitControls fit;
    CovarianceOptions covariance;
    bool per_tail = false;     // run the local step-up rule separately per tail
    std::filesystem::path output_dir = "out";

    TailBoundaries boundaries() const;
    void validate() const;
};

/// Keys: width, range_lo, range_hi, null_lo, null_hi, family, sides, method,
/// which, alphas, column, df, clamp_z, tol, max_iter, delta_scale, per_tail,
/// output_dir. range_lo and range_hi are required.
AnalysisConfig analysis_config_from(const KeyValues& kv);

struct SimulationConfig {
    ScenarioSpec scenario = normal_preset();
    std::string preset = "normal";
    StudyConfig study;
    std::filesystem::path output_dir = "out";
};

/// Keys: preset, p0, n, reps, seed, width, range_lo, range_hi, fit_lo, fit_hi,
/// iso_boundary, alphas, threads, method, tol, max_iter, delta_scale, output_dir.
SimulationConfig simulation_config_from(const KeyValues& kv);

/// Applies the output-directory environment override when it is set.
std::filesystem::path resolve_output_dir(const std::filesystem::path& configured);

std::vector<double> parse_double_list(const std::string& text);
const char* to_string(Sides sides);

}  // namespace isofdr::io
