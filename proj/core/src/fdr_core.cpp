#include "isofdr/fdr_core.hpp"

#include <cmath>
#include <limits>

#include "isofdr/error.hpp"

namespace isofdr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_aligned(const Histogram& hist, const NullFit& fit) {
    const auto K = static_cast<Eigen::Index>(hist.size());
    if (fit.fitted.size() != K || fit.influence.rows() != K || fit.influence.cols() != K) {
        throw InputError("null fit dimension does not match histogram");
    }
}

Eigen::MatrixXd null_count_covariance(const Histogram& hist, const NullFit& fit) {
    const Eigen::VectorXd& yhat = fit.fitted;
    Eigen::MatrixXd v = -yhat * yhat.transpose() / static_cast<double>(hist.total());
    v.diagonal() += yhat;
    return v;
}

Eigen::MatrixXd finish_covariance(Eigen::MatrixXd cov, const std::vector<bool>& valid) {
    cov = 0.5 * (cov + cov.transpose()).eval();
    const auto K = cov.rows();
    for (Eigen::Index k = 0; k < K; ++k) {
        if (!valid[static_cast<std::size_t>(k)]) {
            cov.row(k).setConstant(kNaN);
            cov.col(k).setConstant(kNaN);
        } else if (cov(k, k) < 0.0) {
            cov(k, k) = 0.0;
        }
    }
    return cov;
}

}  // namespace

Eigen::MatrixXd tail_matrix(std::size_t K, Side side) {
    if (K == 0) throw DomainError("tail matrix needs K >= 1");
    const auto n = static_cast<Eigen::Index>(K);
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        S(i, i) = 0.5;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            if (side == Side::Right) S(i, j) = 1.0;
            else S(j, i) = 1.0;
        }
    }
    return S;
}

MaskedVector fdr_vector(const Histogram& hist, const NullFit& fit) {
    check_aligned(hist, fit);
    const Eigen::VectorXd y = hist.counts_vector();
    MaskedVector out{Eigen::VectorXd(y.size()), std::vector<bool>(hist.size())};
    for (Eigen::Index k = 0; k < y.size(); ++k) {
        const bool ok = y[k] > 0.0;
        out.valid[static_cast<std::size_t>(k)] = ok;
        out.values[k] = ok ? std::log(fit.fitted[k]) - std::log(y[k]) : kNaN;
    }
    return out;
}

MaskedVector tail_fdr_vector(const Histogram& hist, const NullFit& fit, Side side) {
    check_aligned(hist, fit);
    const Eigen::MatrixXd S = tail_matrix(hist.size(), side);
    const Eigen::VectorXd sy = S * hist.counts_vector();
    const Eigen::VectorXd syhat = S * fit.fitted;
    MaskedVector out{Eigen::VectorXd(sy.size()), std::vector<bool>(hist.size())};
    for (Eigen::Index k = 0; k < sy.size(); ++k) {
        const bool ok = sy[k] > 0.0;
        out.valid[static_cast<std::size_t>(k)] = ok;
        out.values[k] = ok ? std::log(syhat[k]) - std::log(sy[k]) : kNaN;
    }
    return out;
}

Eigen::MatrixXd cov_log_fdr(const Histogram& hist, const NullFit& fit,
                            const CovarianceOptions& opts) {
    check_aligned(hist, fit);
    const Eigen::VectorXd y = hist.counts_vector();
    const auto K = y.size();
    std::vector<bool> valid(hist.size());
    Eigen::VectorXd inv_scale(K);
    for (Eigen::Index k = 0; k < K; ++k) {
        valid[static_cast<std::size_t>(k)] = y[k] > 0.0;
        const double s = opts.scale == CountScale::Observed ? y[k] : fit.fitted[k];
        inv_scale[k] = y[k] > 0.0 ? 1.0 / s : 0.0;
    }
    Eigen::MatrixXd A = fit.influence;
    A.diagonal() -= inv_scale;
    return finish_covariance(A * null_count_covariance(hist, fit) * A.transpose(), valid);
}

Eigen::MatrixXd cov_log_Fdr(const Histogram& hist, const NullFit& fit, Side side,
                            const CovarianceOptions& opts) {
    check_aligned(hist, fit);
    const Eigen::MatrixXd S = tail_matrix(hist.size(), side);
    const Eigen::VectorXd sy = S * hist.counts_vector();
    const Eigen::VectorXd syhat = S * fit.fitted;
    const auto K = sy.size();
    std::vector<bool> valid(hist.size());
    Eigen::VectorXd inv_u(K), inv_uhat(K);
    for (Eigen::Index k = 0; k < K; ++k) {
        const bool ok = sy[k] > 0.0;
        valid[static_cast<std::size_t>(k)] = ok;
        inv_uhat[k] = ok ? 1.0 / syhat[k] : 0.0;
        const double u = opts.scale == CountScale::Observed ? sy[k] : syhat[k];
        inv_u[k] = ok ? 1.0 / u : 0.0;
    }
    // d log(S y_hat)/dy = U_hat^{-1} S V_hat D_y ; d log(S y)/dy = U^{-1} S.
    const Eigen::MatrixXd B = inv_uhat.asDiagonal() * (S * fit.fitted.asDiagonal() * fit.influence) -
                              inv_u.asDiagonal() * S;
    return finish_covariance(B * null_count_covariance(hist, fit) * B.transpose(), valid);
}

FdrEstimates estimate_fdr(const Histogram& hist, const NullFit& fit,
                          const CovarianceOptions& opts) {
    FdrEstimates est;
    auto local = fdr_vector(hist, fit);
    auto right = tail_fdr_vector(hist, fit, Side::Right);
    auto left = tail_fdr_vector(hist, fit, Side::Left);
    est.log_fdr = std::move(local.values);
    est.valid = std::move(local.valid);
    est.log_Fdr_right = std::move(right.values);
    est.valid_right = std::move(right.valid);
    est.log_Fdr_left = std::move(left.values);
    est.valid_left = std::move(left.valid);
    est.cov_log_fdr = cov_log_fdr(hist, fit, opts);
    est.cov_log_Fdr_right = cov_log_Fdr(hist, fit, Side::Right, opts);
    est.cov_log_Fdr_left = cov_log_Fdr(hist, fit, Side::Left, opts);
    return est;
}

}  // namespace isofdr
