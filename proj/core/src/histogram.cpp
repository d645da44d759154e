#include "isofdr/histogram.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "isofdr/error.hpp"

namespace isofdr {

namespace {

void require_finite(std::span<const double> stats) {
    for (std::size_t i = 0; i < stats.size(); ++i) {
        if (!std::isfinite(stats[i])) {
            throw InputError("non-finite statistic at index " + std::to_string(i));
        }
    }
}

void check_layout(Range range, double width) {
    if (!(width > 0.0) || !std::isfinite(width)) throw DomainError("bin width must be positive");
    if (!(range.lo < range.hi)) throw DomainError("histogram range requires lo < hi");
}

}  // namespace

std::size_t bin_count(Range range, double width) {
    check_layout(range, width);
    const double ratio = (range.hi - range.lo) / width;
    const double nearest = std::round(ratio);
    const double k = std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, nearest) ? nearest
                                                                                : std::ceil(ratio);
    if (k < 2.0) throw DomainError("histogram range must span at least two bins");
    return static_cast<std::size_t>(k);
}

Histogram::Histogram(std::vector<double> centers, std::vector<std::int64_t> counts,
                     double width, std::int64_t total, Range range)
    : centers_(std::move(centers)),
      counts_(std::move(counts)),
      width_(width),
      total_(total),
      range_(range) {
    check_layout(range_, width_);
    if (centers_.size() < 2) throw InputError("histogram needs at least two bins");
    if (centers_.size() != counts_.size()) throw InputError("centers/counts size mismatch");
    std::int64_t tallied = 0;
    for (auto c : counts_) {
        if (c < 0) throw InputError("negative bin count");
        tallied += c;
    }
    if (tallied > total_) throw InputError("bin counts exceed total");
}

Eigen::VectorXd Histogram::counts_vector() const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(counts_.size()));
    for (std::size_t k = 0; k < counts_.size(); ++k) v[static_cast<Eigen::Index>(k)] = static_cast<double>(counts_[k]);
    return v;
}

Eigen::VectorXd Histogram::centers_vector() const {
    return Eigen::Map<const Eigen::VectorXd>(centers_.data(), static_cast<Eigen::Index>(centers_.size()));
}

Histogram Histogram::with_counts(std::vector<std::int64_t> counts, std::int64_t total) const {
    return Histogram(centers_, std::move(counts), width_, total, range_);
}

std::optional<std::size_t> Histogram::locate(double x) const {
    if (!(x >= range_.lo) || !(x < range_.hi)) return std::nullopt;
    const double pos = (x - range_.lo) / width_;
    auto k = static_cast<std::size_t>(std::floor(pos));
    // Guard floor() rounding at the interior edges.
    if (k >= centers_.size()) k = centers_.size() - 1;
    const double left = range_.lo + static_cast<double>(k) * width_;
    if (x < left && k > 0) --k;
    else if (k + 1 < centers_.size() && x >= range_.lo + static_cast<double>(k + 1) * width_) ++k;
    return k;
}

Histogram build_histogram(std::span<const double> stats, double width, Range range) {
    if (stats.empty()) throw InputError("no statistics");
    require_finite(stats);
    const std::size_t K = bin_count(range, width);
    std::vector<double> centers(K);
    for (std::size_t k = 0; k < K; ++k) {
        centers[k] = range.lo + (static_cast<double>(k) + 0.5) * width;
    }
    Histogram layout(centers, std::vector<std::int64_t>(K, 0), width,
                     static_cast<std::int64_t>(stats.size()), range);
    std::vector<std::int64_t> counts(K, 0);
    for (double x : stats) {
        if (auto k = layout.locate(x)) ++counts[*k];
    }
    return layout.with_counts(std::move(counts), static_cast<std::int64_t>(stats.size()));
}

std::vector<std::optional<std::size_t>> assign_bins(std::span<const double> stats,
                                                    const Histogram& hist) {
    require_finite(stats);
    std::vector<std::optional<std::size_t>> out;
    out.reserve(stats.size());
    for (double x : stats) out.push_back(hist.locate(x));
    return out;
}

}  // namespace isofdr
