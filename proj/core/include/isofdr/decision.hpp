#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "isofdr/histogram.hpp"
#include "isofdr/isotonic.hpp"

namespace isofdr {

enum class Rule { LocalFdrStepUp, TailFdrThreshold };

const char* to_string(Rule rule);

struct DecisionReport {
    std::vector<bool> rejected;
    std::size_t u = 0;
    Rule rule = Rule::LocalFdrStepUp;
    double alpha = 0.0;
    std::vector<double> per_hypothesis_stat;
};

struct ErrorScore {
    double fdp = 0.0;
    double fnp = 0.0;
    std::size_t rejections = 0;
};

/// Binned estimate for each statistic; statistics outside the histogram range
/// take the value of the nearest edge bin.
std::vector<double> per_hypothesis_values(std::span<const double> stats, const Histogram& hist,
                                          const Eigen::VectorXd& binned);

/// Natural-scale fdr^iso (or combined Fdr^iso) per hypothesis.
std::vector<double> per_hypothesis_values(std::span<const double> stats, const Histogram& hist,
                                          const MonotoneFdr& mono, Which which);

/// Step-up rule: reject the u smallest values, u the largest j whose running
/// mean of the j smallest values is <= alpha. Ties ordered by index.
DecisionReport adaptive_reject_local(std::span<const double> values, double alpha);

/// Reject every hypothesis whose tail estimate is <= alpha.
DecisionReport adaptive_reject_tail(std::span<const double> values, double alpha);

/// The local rule run separately on two groups of hypotheses (e.g. the two
/// tails of a two-sided analysis); `group[i]` selects the group of i.
DecisionReport adaptive_reject_local_grouped(std::span<const double> values,
                                             const std::vector<bool>& group, double alpha);

/// Realized false discovery / non-discovery proportions; truth[i] is true for non-null.
ErrorScore score(const DecisionReport& report, const std::vector<bool>& truth);

}  // namespace isofdr
