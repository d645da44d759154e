#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "isofdr/error.hpp"
#include "isofdr/fdr_core.hpp"
#include "isofdr/histogram.hpp"

namespace isofdr {

enum class Direction { NonDecreasing, NonIncreasing };

// Weighted least-squares projection of `targets` onto a chain order.
// `weights` is either a vector of positive diagonal weights or a full
// symmetric positive-definite weight matrix.
struct ChainProblem {
    Eigen::VectorXd targets;
    std::variant<Eigen::VectorXd, Eigen::MatrixXd> weights;
    Direction direction = Direction::NonDecreasing;
};

/// Raised when a full weight or covariance matrix is not positive definite.
class CovarianceNotUsable : public Error {
public:
    CovarianceNotUsable() : Error("covariance not usable; fall back to diagonal") {}
};

/// Pool-adjacent-violators; requires diagonal weights.
Eigen::VectorXd pava(const ChainProblem& problem);

/// Dual active-set solution of the full-matrix problem; requires a full matrix.
Eigen::VectorXd qp_isotonic(const ChainProblem& problem);

/// Same problem expressed through the covariance C = M^{-1} (ridged by the
/// caller); avoids inverting twice.
Eigen::VectorXd qp_isotonic_covariance(const Eigen::VectorXd& targets,
                                       const Eigen::MatrixXd& covariance, Direction direction);

/// Dispatches on the weight representation.
Eigen::VectorXd solve_chain(const ChainProblem& problem);

enum class MonotoneMethod { Pava, FullQp };
enum class Which { LocalFdr, TailFdr, Both };

const char* to_string(MonotoneMethod method);
MonotoneMethod parse_method(const std::string& name);

/// Tail edges. Bins with center >= right are monotonized so fdr does not
/// increase moving right; bins with center <= left so fdr does not increase
/// moving left. An absent edge leaves that tail untouched.
struct TailBoundaries {
    std::optional<double> left;
    std::optional<double> right;
};

struct MonotoneFdr {
    Eigen::VectorXd log_fdr_iso;
    Eigen::VectorXd log_Fdr_right_iso;
    Eigen::VectorXd log_Fdr_left_iso;
    // Right-tail Fdr on the right half of the grid and left-tail Fdr on the
    // left half (split at the midpoint of the two edges when both exist).
    Eigen::VectorXd log_Fdr_iso;
    TailBoundaries boundaries;
    MonotoneMethod method = MonotoneMethod::Pava;
    Which which = Which::Both;
    std::vector<std::size_t> changed_bins;      // local fdr
    std::vector<std::size_t> changed_bins_Fdr;  // either tail Fdr
    std::vector<std::string> warnings;
};

/// Ridge added to covariance blocks before they are used as QP weights.
inline constexpr double kCovarianceRidge = 1e-8;

MonotoneFdr monotonize_tails(const FdrEstimates& est, const Histogram& hist,
                             const TailBoundaries& boundaries,
                             MonotoneMethod method = MonotoneMethod::Pava,
                             Which which = Which::Both);

}  // namespace isofdr
