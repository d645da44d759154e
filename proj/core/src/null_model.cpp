#include "isofdr/null_model.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace isofdr {

namespace {

Eigen::Vector2d basis(Family family, double t) {
    switch (family) {
        case Family::Normal: return {t, t * t};
        case Family::Gamma: return {std::log(t), t};
    }
    return {};
}

double log_likelihood(const Eigen::VectorXd& y, const Eigen::VectorXd& lin,
                      const Eigen::VectorXd& w) {
    return (w.array() * (y.array() * lin.array() - lin.array().exp())).sum();
}

}  // namespace

const char* to_string(Family family) {
    return family == Family::Normal ? "normal" : "gamma";
}

Family parse_family(const std::string& name) {
    if (name == "normal") return Family::Normal;
    if (name == "gamma") return Family::Gamma;
    throw DomainError("unknown null family '" + name + "' (expected normal or gamma)");
}

Design build_design(const Histogram& hist, Family family) {
    const auto K = static_cast<Eigen::Index>(hist.size());
    Design d{family, Eigen::MatrixXd(K, 1 + basis_size(family)), Eigen::VectorXd(K)};
    const double log_scale = std::log(static_cast<double>(hist.total()) * hist.width());
    for (Eigen::Index k = 0; k < K; ++k) {
        const double t = hist.centers()[static_cast<std::size_t>(k)];
        if (family == Family::Gamma && !(t > 0.0)) {
            throw DomainError("gamma null family requires positive bin centers");
        }
        d.X(k, 0) = 1.0;
        d.X.block<1, 2>(k, 1) = basis(family, t).transpose();
        d.h[k] = log_scale;  // a0 == 1 for both families
    }
    return d;
}

bool admissible(Family family, const Eigen::VectorXd& eta) {
    switch (family) {
        case Family::Normal: return eta[1] < 0.0;
        case Family::Gamma: return eta[0] > -1.0 && eta[1] < 0.0;
    }
    return false;
}

double log_partition(Family family, const Eigen::VectorXd& eta) {
    if (!admissible(family, eta)) throw DomainError("log partition undefined outside parameter space");
    switch (family) {
        case Family::Normal:
            return -eta[0] * eta[0] / (4.0 * eta[1]) + 0.5 * std::log(std::numbers::pi / -eta[1]);
        case Family::Gamma: {
            const double shape = eta[0] + 1.0;
            return std::lgamma(shape) - shape * std::log(-eta[1]);
        }
    }
    return 0.0;
}

NullFit fit_poisson(const Histogram& hist, const Design& design, const NullRegion& region,
                    const FitControls& ctl) {
    const auto K = static_cast<Eigen::Index>(hist.size());
    const Eigen::Index p1 = design.X.cols();
    if (design.X.rows() != K || design.h.size() != K) throw InputError("design does not match histogram");
    if (!(region.lo < region.hi)) throw DomainError("null region requires lo < hi");

    const Eigen::VectorXd y = hist.counts_vector();
    Eigen::VectorXd w(K);
    int in_region = 0;
    int positive = 0;
    for (Eigen::Index k = 0; k < K; ++k) {
        const bool inside = region.contains(hist.centers()[static_cast<std::size_t>(k)]);
        w[k] = inside ? 1.0 : 0.0;
        in_region += inside;
        positive += inside && y[k] > 0.0;
    }
    if (positive < p1 + 1) {
        throw FitError(FitError::Kind::InsufficientData,
                       "null region needs at least " + std::to_string(p1 + 1) +
                           " bins with positive counts (found " + std::to_string(positive) + ")");
    }

    // Region rows only during iteration; extrapolating exp() elsewhere can overflow.
    std::vector<Eigen::Index> rows;
    for (Eigen::Index k = 0; k < K; ++k) if (w[k] > 0.0) rows.push_back(k);
    const auto R = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd Xr(R, p1);
    Eigen::VectorXd hr(R), yr(R);
    for (Eigen::Index i = 0; i < R; ++i) {
        Xr.row(i) = design.X.row(rows[static_cast<std::size_t>(i)]);
        hr[i] = design.h[rows[static_cast<std::size_t>(i)]];
        yr[i] = y[rows[static_cast<std::size_t>(i)]];
    }
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(R);

    Eigen::FullPivLU<Eigen::MatrixXd> rank_check(Xr);
    if (rank_check.rank() < p1) {
        throw FitError(FitError::Kind::Collinear, "design collinear in null region");
    }

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p1);
    beta[0] = std::log(yr.sum() / hr.array().exp().sum());

    NullFit fit;
    fit.family = design.family;
    Eigen::VectorXd lin = Xr * beta + hr;
    double ll = log_likelihood(yr, lin, ones);
    int iter = 0;
    bool converged = false;
    for (; iter < ctl.max_iter; ++iter) {
        const Eigen::VectorXd mu = lin.array().exp();
        const Eigen::MatrixXd info = Xr.transpose() * mu.asDiagonal() * Xr;
        Eigen::LLT<Eigen::MatrixXd> llt(info);
        if (llt.info() != Eigen::Success) {
            throw FitError(FitError::Kind::Collinear, "design collinear in null region", beta);
        }
        Eigen::VectorXd step = llt.solve(Xr.transpose() * (yr - mu));
        // Step halving keeps the concave likelihood increasing.
        double scale = 1.0;
        Eigen::VectorXd candidate;
        double cand_ll = -std::numeric_limits<double>::infinity();
        for (int half = 0; half < 40; ++half) {
            candidate = beta + scale * step;
            lin = Xr * candidate + hr;
            cand_ll = log_likelihood(yr, lin, ones);
            if (std::isfinite(cand_ll) && cand_ll >= ll - 1e-12 * std::abs(ll)) break;
            scale *= 0.5;
        }
        const double change = (candidate - beta).cwiseAbs().maxCoeff();
        beta = candidate;
        ll = cand_ll;
        if (change < ctl.tol) {
            converged = true;
            ++iter;
            break;
        }
    }
    if (!converged) {
        throw FitError(FitError::Kind::NotConverged,
                       "null fit did not converge in " + std::to_string(ctl.max_iter) + " iterations",
                       beta);
    }

    fit.eta_plus = beta;
    fit.converged = true;
    fit.iterations = iter;
    if (!admissible(design.family, fit.eta())) {
        throw FitError(FitError::Kind::ImproperDensity, "null fit not a proper density", beta);
    }

    fit.design = design.X;
    fit.offset = design.h;
    fit.weights = w;
    fit.fitted = (design.X * beta + design.h).array().exp();

    const Eigen::MatrixXd XtW = design.X.transpose() * w.asDiagonal();
    const Eigen::MatrixXd info = XtW * fit.fitted.asDiagonal() * design.X;
    fit.influence = design.X * info.ldlt().solve(XtW);

    fit.p0_hat = reconstruct_p0(fit);
    if (!(fit.p0_hat <= 1.5)) {
        throw FitError(FitError::Kind::P0OutOfRange,
                       "estimated null proportion " + std::to_string(fit.p0_hat) + " exceeds 1.5", beta);
    }
    fit.p0_above_one = fit.p0_hat > 1.0;
    return fit;
}

NullFit fit_null(const Histogram& hist, Family family, const NullRegion& region,
                 const FitControls& ctl) {
    return fit_poisson(hist, build_design(hist, family), region, ctl);
}

double reconstruct_p0(const NullFit& fit) {
    return std::exp(fit.eta_plus[0] + log_partition(fit.family, fit.eta()));
}

double null_density(const NullFit& fit, double t) {
    const Eigen::VectorXd eta = fit.eta();
    if (fit.family == Family::Gamma && !(t > 0.0)) return 0.0;
    const Eigen::Vector2d x = basis(fit.family, t);
    return std::exp(x.dot(eta) - log_partition(fit.family, eta));
}

NormalMoments normal_moments(const NullFit& fit) {
    if (fit.family != Family::Normal) throw DomainError("normal moments need a normal-family fit");
    const Eigen::VectorXd eta = fit.eta();
    return {-eta[0] / (2.0 * eta[1]), std::sqrt(-1.0 / (2.0 * eta[1]))};
}

}  // namespace isofdr
