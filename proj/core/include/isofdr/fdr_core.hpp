#pragma once

#include <vector>

#include <Eigen/Dense>

#include "isofdr/histogram.hpp"
#include "isofdr/null_model.hpp"

namespace isofdr {

enum class Side { Right, Left };

// Values with a per-entry validity flag. Invalid entries hold NaN.
struct MaskedVector {
    Eigen::VectorXd values;
    std::vector<bool> valid;
};

// Where the count-derivative term of the delta method is evaluated:
// at the observed counts y (and S y) or at the fitted null counts y_hat.
enum class CountScale { Observed, Fitted };

struct CovarianceOptions {
    CountScale scale = CountScale::Fitted;
};

struct FdrEstimates {
    Eigen::VectorXd log_fdr;
    Eigen::VectorXd log_Fdr_right;
    Eigen::VectorXd log_Fdr_left;
    Eigen::MatrixXd cov_log_fdr;
    Eigen::MatrixXd cov_log_Fdr_right;
    Eigen::MatrixXd cov_log_Fdr_left;
    std::vector<bool> valid;        // y_k > 0
    std::vector<bool> valid_right;  // (S y)_k > 0, right-tail S
    std::vector<bool> valid_left;

    std::size_t size() const { return static_cast<std::size_t>(log_fdr.size()); }
    const Eigen::VectorXd& log_Fdr(Side side) const {
        return side == Side::Right ? log_Fdr_right : log_Fdr_left;
    }
    const Eigen::MatrixXd& cov_log_Fdr(Side side) const {
        return side == Side::Right ? cov_log_Fdr_right : cov_log_Fdr_left;
    }
    const std::vector<bool>& valid_Fdr(Side side) const {
        return side == Side::Right ? valid_right : valid_left;
    }
};

/// Right: upper triangular with 1/2 on the diagonal and 1 above it.
/// Left: the mirrored lower-triangular matrix.
Eigen::MatrixXd tail_matrix(std::size_t K, Side side);

/// log fdr_k = log y_hat_k - log y_k; bins with y_k = 0 are invalid.
MaskedVector fdr_vector(const Histogram& hist, const NullFit& fit);

/// log Fdr = log(S y_hat) - log(S y); bins with (S y)_k = 0 are invalid.
MaskedVector tail_fdr_vector(const Histogram& hist, const NullFit& fit, Side side);

/// Delta-method covariance A V_N A' with V_N = diag(y_hat) - y_hat y_hat'/N.
/// Rows and columns of invalid bins are NaN.
Eigen::MatrixXd cov_log_fdr(const Histogram& hist, const NullFit& fit,
                            const CovarianceOptions& opts = {});

/// Delta-method covariance B V_N B' of the tail estimates.
Eigen::MatrixXd cov_log_Fdr(const Histogram& hist, const NullFit& fit, Side side,
                            const CovarianceOptions& opts = {});

FdrEstimates estimate_fdr(const Histogram& hist, const NullFit& fit,
                          const CovarianceOptions& opts = {});

}  // namespace isofdr
