#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "isofdr/config.hpp"
#include "isofdr/decision.hpp"
#include "isofdr/fdr_core.hpp"
#include "isofdr/histogram.hpp"
#include "isofdr/isotonic.hpp"
#include "isofdr/null_model.hpp"
#include "isofdr/simulation.hpp"
#include "isofdr/stats_numerics.hpp"

namespace isofdr::io {

struct TransformResult {
    std::vector<double> z;
    std::size_t clamped = 0;
};

TransformResult transform_statistics(std::span<const double> t, Dof df, double clamp_z = kDefaultClampZ);

/// One-column CSV with header "z".
void write_z_csv(const std::filesystem::path& path, std::span<const double> z);

struct AnalysisResult {
    AnalysisConfig config;
    std::vector<double> stats;  // after the optional t-to-z transform
    std::size_t clamped = 0;
    Histogram hist;
    NullFit fit;
    FdrEstimates est;
    MonotoneFdr mono;
    std::vector<std::size_t> out_of_range;  // indices of statistics outside the histogram
    std::vector<double> fdr_iso;            // per hypothesis
    std::vector<double> Fdr_iso;            // per hypothesis, combined tails
    std::vector<DecisionReport> local;      // one per alpha
    std::vector<DecisionReport> tail;
};

/// Histogram, null fit, estimates, monotonization and decisions.
/// Throws FitError when the null fit fails.
AnalysisResult analyze(std::vector<double> stats, const AnalysisConfig& config);

/// Writes bins.csv, decisions.csv, summary.txt and fdr_plot.svg into `dir`.
/// Returns the written paths.
std::vector<std::filesystem::path> write_analysis(const AnalysisResult& result,
                                                  const std::filesystem::path& dir);

/// Writes study_summary.csv, study_meta.txt, fdr_plot.svg and tail_fdr_plot.svg.
std::vector<std::filesystem::path> write_simulation(const SimulationSummary& summary,
                                                    const SimulationConfig& config,
                                                    const std::filesystem::path& dir);

}  // namespace isofdr::io
