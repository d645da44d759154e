#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace isofdr {

struct Range {
    double lo = 0.0;
    double hi = 0.0;

    friend bool operator==(const Range&, const Range&) = default;
};

// Equal-width binning of a sample of summarizing statistics.
//
// Bin k (0-based) covers [lo + k*width, lo + (k+1)*width). Statistics outside
// [lo, hi) are not tallied but still count toward `total`, because the total
// sample size enters the Poisson offset of the null fit.
class Histogram {
public:
    Histogram(std::vector<double> centers, std::vector<std::int64_t> counts, double width,
              std::int64_t total, Range range);

    std::size_t size() const { return centers_.size(); }
    const std::vector<double>& centers() const { return centers_; }
    const std::vector<std::int64_t>& counts() const { return counts_; }
    double width() const { return width_; }
    std::int64_t total() const { return total_; }
    Range range() const { return range_; }

    Eigen::VectorXd counts_vector() const;
    Eigen::VectorXd centers_vector() const;

    // Same bin layout, different tallies (used by resampling).
    Histogram with_counts(std::vector<std::int64_t> counts, std::int64_t total) const;

    // Index of the bin containing x, or nullopt when x lies outside [lo, hi).
    std::optional<std::size_t> locate(double x) const;

    friend bool operator==(const Histogram&, const Histogram&) = default;

private:
    std::vector<double> centers_;
    std::vector<std::int64_t> counts_;
    double width_;
    std::int64_t total_;
    Range range_;
};

// Number of bins for a range and width; tolerant to (hi-lo)/width landing a
// rounding error above an integer.
std::size_t bin_count(Range range, double width);

Histogram build_histogram(std::span<const double> stats, double width, Range range);

std::vector<std::optional<std::size_t>> assign_bins(std::span<const double> stats,
                                                    const Histogram& hist);

}  // namespace isofdr
