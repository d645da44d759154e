#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "isofdr/error.hpp"
#include "isofdr/histogram.hpp"
#include "isofdr/null_model.hpp"
#include "oracles.hpp"

using namespace isofdr;

namespace {

Histogram grid(double lo, double hi, double width, std::int64_t total) {
    const std::size_t K = bin_count({lo, hi}, width);
    std::vector<double> c(K);
    for (std::size_t k = 0; k < K; ++k) c[k] = lo + (static_cast<double>(k) + 0.5) * width;
    return Histogram(c, std::vector<std::int64_t>(K, 0), width, total, {lo, hi});
}

// Counts rounded from exp(X eta + h); with a huge total the rounding is negligible.
Histogram exact_counts(const Histogram& layout, Family family, const Eigen::VectorXd& eta_plus) {
    const Design d = build_design(layout, family);
    const Eigen::VectorXd mu = (d.X * eta_plus + d.h).array().exp();
    std::vector<std::int64_t> y(layout.size());
    for (std::size_t k = 0; k < y.size(); ++k) y[k] = std::llround(mu[static_cast<Eigen::Index>(k)]);
    return layout.with_counts(y, layout.total());
}

std::vector<double> normal_sample(std::size_t n, double mean, double sd, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(mean, sd);
    std::vector<double> x(n);
    for (auto& v : x) v = g(rng);
    return x;
}

}  // namespace

TEST_CASE("design rows and offsets", "[null_model]") {
    Histogram h({-1.0, 2.0, 3.0}, {1, 1, 1}, 1.0, 1000, {-1.5, 3.5});
    const Design d = build_design(h, Family::Normal);
    CHECK(d.X(1, 0) == 1.0);
    CHECK(d.X(1, 1) == 2.0);
    CHECK(d.X(1, 2) == 4.0);

    const Histogram g = grid(-1.0, 1.0, 0.05, 1000);
    const Design dg = build_design(g, Family::Normal);
    for (Eigen::Index k = 0; k < dg.h.size(); ++k) CHECK(std::fabs(dg.h[k] - std::log(50.0)) < 1e-14);

    Histogram e({std::numbers::e, 4.0}, {1, 1}, 1.0, 10, {2.0, 4.5});
    const Design de = build_design(e, Family::Gamma);
    CHECK(de.X(0, 0) == 1.0);
    CHECK(std::fabs(de.X(0, 1) - 1.0) < 1e-15);
    CHECK(de.X(0, 2) == std::numbers::e);

    Histogram neg({-0.5, 0.5}, {1, 1}, 1.0, 2, {-1.0, 1.0});
    CHECK_THROWS_AS(build_design(neg, Family::Gamma), DomainError);
}

TEST_CASE("noise-free counts are a fixed point of the fit", "[null_model]") {
    const Histogram layout = grid(-4.0, 4.0, 0.1, 10'000'000'000'000);
    Eigen::VectorXd eta(3);
    // Normal N(0.3, 1.1^2) with p0 = 0.85 on the natural scale.
    const double mu = 0.3, s2 = 1.21, p0 = 0.85;
    eta << std::log(p0) - mu * mu / (2 * s2) - 0.5 * std::log(2 * std::numbers::pi * s2), mu / s2, -1.0 / (2 * s2);
    const Histogram h = exact_counts(layout, Family::Normal, eta);
    const NullFit fit = fit_null(h, Family::Normal, {-1.5, 1.5});
    CHECK(fit.converged);
    CHECK((fit.eta_plus - eta).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(std::fabs(fit.p0_hat - p0) < 1e-8);

    const Histogram glayout = grid(0.0, 20.0, 0.1, 10'000'000'000'000);
    Eigen::VectorXd geta(3);
    // 0.8 chi2(3): shape 1.5, scale 1.6.
    geta << std::log(0.9) - std::lgamma(1.5) - 1.5 * std::log(1.6), 0.5, -1.0 / 1.6;
    const Histogram gh = exact_counts(glayout, Family::Gamma, geta);
    const NullFit gfit = fit_null(gh, Family::Gamma, {0.0, 4.0});
    CHECK((gfit.eta_plus - geta).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(std::fabs(gfit.p0_hat - 0.9) < 1e-8);
}

TEST_CASE("fit invariants on a noisy sample", "[null_model][property]") {
    const auto x = normal_sample(20'000, 0.1, 1.0, 42);
    const Histogram h = build_histogram(x, 0.1, {-5.0, 5.0});
    const NullRegion region{-1.5, 1.5};
    const NullFit fit = fit_null(h, Family::Normal, region);
    REQUIRE(fit.converged);

    // fitted = exp(X eta + h)
    const Eigen::VectorXd mu = (fit.design * fit.eta_plus + fit.offset).array().exp();
    CHECK(((mu - fit.fitted).array() / mu.array()).abs().maxCoeff() < 1e-10);

    // Score equations on the null region.
    const Eigen::VectorXd y = h.counts_vector();
    const Eigen::VectorXd r = fit.weights.cwiseProduct(y - fit.fitted);
    for (Eigen::Index j = 0; j < fit.design.cols(); ++j) {
        const double scale = fit.weights.cwiseProduct(y).cwiseProduct(fit.design.col(j).cwiseAbs()).sum();
        CHECK(std::fabs(r.dot(fit.design.col(j))) <= 1e-6 * std::max(1.0, scale));
    }
    CHECK(std::fabs(fit.weights.dot(y) - fit.weights.dot(fit.fitted)) <= 1e-6 * fit.weights.dot(y));

    // Influence matrix definition.
    const Eigen::MatrixXd& X = fit.design;
    const Eigen::MatrixXd W = fit.weights.asDiagonal();
    const Eigen::MatrixXd V = fit.fitted.asDiagonal();
    const Eigen::MatrixXd Dy = X * (X.transpose() * W * V * X).inverse() * X.transpose() * W;
    CHECK((Dy - fit.influence).cwiseAbs().maxCoeff() < 1e-9);

    const NormalMoments m = normal_moments(fit);
    CHECK(std::isfinite(m.mean));
    CHECK(m.sd > 0.0);
    CHECK(std::fabs(reconstruct_p0(fit) - fit.p0_hat) < 1e-14);
}

TEST_CASE("doubling the counts and N doubles the fitted counts", "[null_model][property]") {
    const auto x = normal_sample(10'000, 0.0, 1.0, 8);
    const Histogram h = build_histogram(x, 0.1, {-5.0, 5.0});
    std::vector<std::int64_t> twice(h.counts());
    for (auto& c : twice) c *= 2;
    const Histogram h2 = h.with_counts(twice, 2 * h.total());
    const NullFit a = fit_null(h, Family::Normal, {-1.5, 1.5});
    const NullFit b = fit_null(h2, Family::Normal, {-1.5, 1.5});
    CHECK((a.eta_plus - b.eta_plus).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(((2.0 * a.fitted - b.fitted).array() / b.fitted.array()).abs().maxCoeff() < 1e-9);
    CHECK(std::fabs(a.p0_hat - b.p0_hat) < 1e-9);
}

TEST_CASE("pure-null normal sample recovers the null", "[null_model][oracle]") {
    const auto x = normal_sample(100'000, 0.2, 1.2, 2014);
    const Histogram h = build_histogram(x, 0.1, {-6.0, 8.0});
    const NullFit fit = fit_null(h, Family::Normal, {-1.3, 1.7});
    const NormalMoments m = normal_moments(fit);
    CHECK(std::fabs(m.mean - 0.2) < 0.05);
    CHECK(std::fabs(m.sd - 1.2) < 0.05);
    CHECK(std::fabs(fit.p0_hat - 1.0) < 0.05);
}

TEST_CASE("log partition closed forms match quadrature", "[null_model][oracle]") {
    Eigen::VectorXd std_normal(2);
    std_normal << 0.0, -0.5;
    CHECK(std::fabs(log_partition(Family::Normal, std_normal) - 0.5 * std::log(2 * std::numbers::pi)) < 1e-15);

    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> e1(-2.0, 2.0), e2(-2.0, -0.2);
    for (int i = 0; i < 20; ++i) {
        Eigen::VectorXd eta(2);
        eta << e1(rng), e2(rng);
        const double center = -eta[0] / (2 * eta[1]);
        const double sd = std::sqrt(-1.0 / (2 * eta[1]));
        const double q = oracle::integrate([&](double t) { return std::exp(eta[0] * t + eta[1] * t * t); },
                                           center - 40 * sd, center + 40 * sd, 1e-14);
        CHECK(std::fabs(log_partition(Family::Normal, eta) - std::log(q)) < 1e-8);
    }
    std::uniform_real_distribution<double> g1(-0.5, 3.0), g2(-3.0, -0.3);
    for (int i = 0; i < 20; ++i) {
        Eigen::VectorXd eta(2);
        eta << g1(rng), g2(rng);
        // Substitute t = s^2 to remove the integrable singularity at 0.
        const double q = oracle::integrate(
            [&](double s) { return s == 0.0 ? 0.0 : 2.0 * s * std::exp(eta[0] * std::log(s * s) + eta[1] * s * s); },
            0.0, std::sqrt(400.0 / -eta[1]), 1e-14);
        CHECK(std::fabs(log_partition(Family::Gamma, eta) - std::log(q)) < 1e-8);
    }
}

TEST_CASE("p0 of a normalized standard normal kernel is one", "[null_model]") {
    NullFit fit;
    fit.family = Family::Normal;
    fit.eta_plus = Eigen::Vector3d(-0.5 * std::log(2 * std::numbers::pi), 0.0, -0.5);
    CHECK(std::fabs(reconstruct_p0(fit) - 1.0) < 1e-15);
}

TEST_CASE("fit errors", "[null_model]") {
    const Histogram layout = grid(-3.0, 3.0, 0.5, 1000);
    // Too few positive bins in the region.
    std::vector<std::int64_t> sparse(layout.size(), 0);
    sparse[5] = 10;
    sparse[6] = 10;
    try {
        fit_null(layout.with_counts(sparse, 1000), Family::Normal, {-1.0, 1.0});
        FAIL("expected a fit error");
    } catch (const FitError& e) {
        CHECK(e.kind() == FitError::Kind::InsufficientData);
    }
    // U-shaped counts give an improper density.
    std::vector<std::int64_t> bowl(layout.size());
    for (std::size_t k = 0; k < bowl.size(); ++k) {
        const double t = layout.centers()[k];
        bowl[k] = 10 + static_cast<std::int64_t>(20 * t * t);
    }
    try {
        fit_null(layout.with_counts(bowl, 5000), Family::Normal, {-2.0, 2.0});
        FAIL("expected a fit error");
    } catch (const FitError& e) {
        CHECK(e.kind() == FitError::Kind::ImproperDensity);
        CHECK(std::string(e.what()).find("null fit not a proper density") != std::string::npos);
    }
    CHECK_FALSE(admissible(Family::Normal, Eigen::Vector2d(0.0, 0.1)));
    CHECK(admissible(Family::Normal, Eigen::Vector2d(0.0, -0.1)));
    CHECK_FALSE(admissible(Family::Gamma, Eigen::Vector2d(-1.5, -1.0)));
    CHECK_FALSE(admissible(Family::Gamma, Eigen::Vector2d(0.5, 0.0)));
    CHECK_THROWS(log_partition(Family::Normal, Eigen::Vector2d(0.0, 1.0)));
}

TEST_CASE("fitted null density integrates to one", "[null_model][property]") {
    const auto x = normal_sample(50'000, 0.0, 1.0, 99);
    const Histogram h = build_histogram(x, 0.1, {-5.0, 5.0});
    const NullFit fit = fit_null(h, Family::Normal, {-1.5, 1.5});
    const double mass = oracle::integrate([&](double t) { return null_density(fit, t); }, -30.0, 30.0, 1e-12);
    CHECK(std::fabs(mass - 1.0) < 1e-8);
}
