#pragma once

#include <string>

#include <Eigen/Dense>

#include "isofdr/error.hpp"
#include "isofdr/histogram.hpp"

namespace isofdr {

// Exponential family for the null density, f0(t) = a0(t) exp(x(t)'eta - psi(eta)).
//   Normal: x(t) = (t, t^2), a0 = 1.
//   Gamma:  x(t) = (log t, t), a0 = 1, t > 0 (scaled central chi-square nulls).
enum class Family { Normal, Gamma };

const char* to_string(Family family);
Family parse_family(const std::string& name);

/// Number of sufficient-statistic columns (excluding the intercept).
inline constexpr int basis_size(Family) { return 2; }

/// The interval [lo, hi] whose bins enter the Poisson regression.
struct NullRegion {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double t) const { return t >= lo && t <= hi; }
};

struct FitControls {
    double tol = 1e-10;
    int max_iter = 100;
};

struct Design {
    Family family = Family::Normal;
    Eigen::MatrixXd X;  // rows (1, x(t_k)')
    Eigen::VectorXd h;  // log(N * width * a0(t_k))
};

struct NullFit {
    Family family = Family::Normal;
    Eigen::VectorXd eta_plus;   // (C, eta)
    Eigen::VectorXd fitted;     // expected null counts over all bins
    double p0_hat = 0.0;
    bool p0_above_one = false;  // 1 < p0_hat <= 1.5 is accepted with this flag raised
    Eigen::MatrixXd influence;  // D_y = X (X'W V X)^{-1} X'W
    Eigen::MatrixXd design;
    Eigen::VectorXd offset;
    Eigen::VectorXd weights;    // 0/1 null-region indicator
    bool converged = false;
    int iterations = 0;

    Eigen::VectorXd eta() const { return eta_plus.tail(eta_plus.size() - 1); }
};

class FitError : public Error {
public:
    enum class Kind { InsufficientData, Collinear, NotConverged, ImproperDensity, P0OutOfRange };

    FitError(Kind kind, const std::string& what, Eigen::VectorXd last_iterate = {})
        : Error(what), kind_(kind), last_iterate_(std::move(last_iterate)) {}

    Kind kind() const { return kind_; }
    const Eigen::VectorXd& last_iterate() const { return last_iterate_; }

private:
    Kind kind_;
    Eigen::VectorXd last_iterate_;
};

Design build_design(const Histogram& hist, Family family);

NullFit fit_poisson(const Histogram& hist, const Design& design, const NullRegion& region,
                    const FitControls& ctl = {});

/// Mode-matching fit: build_design followed by fit_poisson.
NullFit fit_null(const Histogram& hist, Family family, const NullRegion& region,
                 const FitControls& ctl = {});

/// True when eta lies in the natural parameter space of the family.
bool admissible(Family family, const Eigen::VectorXd& eta);

/// Log normalizer psi(eta) = log \int a0(t) exp(x(t)'eta) dt.
double log_partition(Family family, const Eigen::VectorXd& eta);

/// p0_hat = exp(C + psi(eta)).
double reconstruct_p0(const NullFit& fit);

/// Normalized fitted null density f0_hat(t).
double null_density(const NullFit& fit, double t);

struct NormalMoments {
    double mean = 0.0;
    double sd = 0.0;
};
NormalMoments normal_moments(const NullFit& fit);

}  // namespace isofdr
