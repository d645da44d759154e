#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "isofdr/decision.hpp"
#include "isofdr/fdr_core.hpp"
#include "isofdr/histogram.hpp"
#include "isofdr/isotonic.hpp"
#include "isofdr/null_model.hpp"

namespace isofdr {

enum class ScenarioKind { NormalMix, ChisqMix };

struct NormalMixParams {
    double null_mean = 0.2;
    double null_sd = 1.2;
    double alt_mean = 3.0;
    double alt_sd = 1.2;
};

struct ChisqMixParams {
    double null_scale = 0.8;
    double null_df = 3.0;
    double alt_df = 3.0;
    double alt_ncp = 3.0;
};

struct ScenarioSpec {
    ScenarioKind kind = ScenarioKind::NormalMix;
    double p0 = 0.9;
    NormalMixParams normal;
    ChisqMixParams chisq;
    NullRegion fitting_interval{-1.3, 1.7};
    double iso_boundary = 1.7;
    Range hist_range{-6.0, 8.0};
    double width = 0.1;
    std::size_t n = 10'000;
    std::size_t reps = 100;
    std::uint64_t base_seed = 20140101;

    Family family() const { return kind == ScenarioKind::NormalMix ? Family::Normal : Family::Gamma; }
    void validate() const;
};

/// Normal two-group scenario: N(0.2, 1.2^2) null vs N(3, 1.2^2) alternative.
ScenarioSpec normal_preset();
/// Chi-square scenario: 0.8 chi2(3) null vs noncentral chi2(3, 3) alternative.
ScenarioSpec chisq_preset();
ScenarioSpec scenario_preset(const std::string& name);

struct Sample {
    std::vector<double> stats;
    std::vector<bool> truth;  // true = non-null
};

/// Seeded RNG engine for one (base_seed, rep, stream) key. Replications draw
/// from their own keys, so they can run in any order.
std::mt19937_64 make_engine(std::uint64_t base_seed, std::uint64_t rep, std::uint32_t stream);

Sample sample_scenario(const ScenarioSpec& spec, std::size_t rep_index);

double oracle_null_density(const ScenarioSpec& spec, double t);
double oracle_fdr(const ScenarioSpec& spec, double t);
/// Right-tail Fdr p0 S0 / (p0 S0 + p1 S1).
double oracle_Fdr(const ScenarioSpec& spec, double t);

struct StudyConfig {
    MonotoneMethod method = MonotoneMethod::Pava;
    FitControls fit;
    CovarianceOptions covariance;
    std::vector<double> alphas{0.05, 0.1};
    unsigned threads = 1;  // 0 = hardware concurrency
};

struct RuleScores {
    std::vector<ErrorScore> local_iso;
    std::vector<ErrorScore> local_raw;
    std::vector<ErrorScore> tail_iso;
};

struct ReplicationResult {
    std::size_t rep = 0;
    bool ok = false;
    std::string error;
    double p0_hat = 0.0;
    Eigen::VectorXd fdr_raw;  // natural scale, NaN where y_k = 0
    Eigen::VectorXd fdr_iso;
    Eigen::VectorXd Fdr_raw;  // right tail
    Eigen::VectorXd Fdr_iso;
    bool nonmonotone_raw_Fdr = false;
    RuleScores scores;  // one entry per alpha
};

/// Raw right-tail Fdr increases by more than 1e-10 between consecutive bins
/// at or beyond `boundary`, scanning only the contiguous run of non-empty bins
/// that starts at the boundary.
bool raw_Fdr_nonmonotone(const Histogram& hist, const Eigen::VectorXd& Fdr_raw, double boundary);

ReplicationResult run_replication(const ScenarioSpec& spec, const StudyConfig& cfg,
                                  std::size_t rep_index);

struct SimulationSummary {
    std::vector<double> grid;
    Eigen::VectorXd mean_fdr_raw, mean_fdr_iso;
    Eigen::VectorXd band_lo_raw, band_hi_raw, band_lo_iso, band_hi_iso;
    Eigen::VectorXd mean_Fdr_raw, mean_Fdr_iso;
    Eigen::VectorXd mean_abs_err_raw, mean_abs_err_iso;
    Eigen::VectorXd oracle_fdr, oracle_Fdr;
    std::vector<std::size_t> raw_valid_reps;  // reps with y_k > 0, per grid point
    std::size_t successful_reps = 0;
    std::size_t failed_reps = 0;
    std::vector<std::string> failures;
    std::size_t nonmonotone_raw_Fdr_count = 0;
    std::vector<double> alphas;
    std::vector<double> mean_fdp_local_iso, mean_fnp_local_iso;
    std::vector<double> mean_fdp_local_raw, mean_fnp_local_raw;
    std::vector<double> mean_fdp_tail_iso, mean_fnp_tail_iso;
    std::vector<RuleScores> per_rep_scores;  // successful reps, in rep order
};

/// Type-7 (linear interpolation) sample quantile.
double sample_quantile(std::vector<double> values, double prob);

/// Aggregate replication results; input order does not matter.
SimulationSummary summarize(const ScenarioSpec& spec, const StudyConfig& cfg,
                            std::vector<ReplicationResult> results);

SimulationSummary run_study(const ScenarioSpec& spec, const StudyConfig& cfg);

}  // namespace isofdr
