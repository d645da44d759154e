#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "isofdr/simulation.hpp"
#include "isofdr/stats_numerics.hpp"
#include "oracles.hpp"

using namespace isofdr;

TEST_CASE("presets", "[simulation]") {
    const ScenarioSpec n = scenario_preset("normal");
    CHECK(n.kind == ScenarioKind::NormalMix);
    CHECK(n.p0 == 0.9);
    CHECK(n.reps == 100);
    CHECK(n.fitting_interval.lo == Catch::Approx(-1.3));
    CHECK(n.fitting_interval.hi == Catch::Approx(1.7));
    CHECK(n.iso_boundary == 1.7);
    CHECK(n.family() == Family::Normal);
    const ScenarioSpec c = scenario_preset("chisq");
    CHECK(c.kind == ScenarioKind::ChisqMix);
    CHECK(c.fitting_interval.lo == 0.0);
    CHECK(c.fitting_interval.hi == 4.0);
    CHECK(c.iso_boundary == 4.0);
    CHECK(c.family() == Family::Gamma);
    CHECK_THROWS(scenario_preset("nope"));
}

TEST_CASE("sampling is deterministic and honours p0", "[simulation]") {
    ScenarioSpec s = normal_preset();
    s.n = 1000;
    const Sample a = sample_scenario(s, 4);
    const Sample b = sample_scenario(s, 4);
    CHECK(a.stats == b.stats);
    CHECK(a.truth == b.truth);
    CHECK(sample_scenario(s, 5).stats != a.stats);

    s.p0 = 1.0;
    const Sample null_only = sample_scenario(s, 0);
    for (bool t : null_only.truth) CHECK_FALSE(t);
    ScenarioSpec c = chisq_preset();
    c.p0 = 1.0;
    c.n = 500;
    for (bool t : sample_scenario(c, 0).truth) CHECK_FALSE(t);
}

TEST_CASE("normal mixture sample mean matches mixture algebra", "[simulation][oracle]") {
    ScenarioSpec s = normal_preset();
    s.n = 200'000;
    const Sample x = sample_scenario(s, 0);
    double sum = 0.0, sumsq = 0.0;
    for (double v : x.stats) {
        sum += v;
        sumsq += v * v;
    }
    const double n = static_cast<double>(x.stats.size());
    const double mean = sum / n;
    const double sd = std::sqrt((sumsq - n * mean * mean) / (n - 1));
    CHECK(std::fabs(mean - (0.9 * 0.2 + 0.1 * 3.0)) < 3.0 * sd / std::sqrt(n));
}

TEST_CASE("chi-square mixture moments", "[simulation][oracle]") {
    ScenarioSpec s = chisq_preset();
    s.n = 200'000;
    const Sample x = sample_scenario(s, 1);
    double sum = 0.0, sumsq = 0.0;
    for (double v : x.stats) {
        sum += v;
        sumsq += v * v;
    }
    const double n = static_cast<double>(x.stats.size());
    const double mean = sum / n;
    const double sd = std::sqrt((sumsq - n * mean * mean) / (n - 1));
    // E = 0.9 * 0.8 * 3 + 0.1 * (3 + 3).
    CHECK(std::fabs(mean - (0.9 * 2.4 + 0.1 * 6.0)) < 3.0 * sd / std::sqrt(n));
}

TEST_CASE("oracle fdr", "[simulation][oracle]") {
    ScenarioSpec s = normal_preset();
    // Equal variances: p0 f0 = p1 f1 where (t-0.2)^2 - (t-3)^2 = 2 sd^2 log(p0/p1).
    const double sd2 = 1.44;
    const double cross = (2.0 * sd2 * std::log(9.0) + 9.0 - 0.04) / (2.0 * (3.0 - 0.2));
    CHECK(std::fabs(oracle_fdr(s, cross) - 0.5) < 1e-12);

    const double t = -4.0;
    const double s0 = normal_sf((t - 0.2) / 1.2), s1 = normal_sf((t - 3.0) / 1.2);
    CHECK(std::fabs(oracle_Fdr(s, t) - 0.9 * s0 / (0.9 * s0 + 0.1 * s1)) < 1e-14);
    CHECK(std::fabs(oracle_Fdr(s, -6.0) - 0.9) < 1e-6);

    ScenarioSpec one = s;
    one.p0 = 1.0;
    for (double v : {-2.0, 0.0, 3.0, 7.0}) CHECK(oracle_fdr(one, v) == 1.0);

    // Chi-square oracle against an independent density construction.
    const ScenarioSpec c = chisq_preset();
    for (double v : {0.5, 3.0, 8.0, 15.0}) {
        const double f0 = oracle::chisq_density(v / 0.8, 3.0) / 0.8;
        const double f1 = oracle::noncentral_chisq_density_series(v, 3.0, 3.0, 400);
        const double ref = 0.9 * f0 / (0.9 * f0 + 0.1 * f1);
        CHECK(std::fabs(oracle_fdr(c, v) - ref) < 1e-10);
        CHECK(oracle_fdr(c, v) > 0.0);
        CHECK(oracle_fdr(c, v) <= 1.0);
    }
}

TEST_CASE("normal oracle fdr decreases on the right tail", "[simulation][property]") {
    const ScenarioSpec s = normal_preset();
    double prev = oracle_fdr(s, 1.7);
    for (int i = 1; i <= 430; ++i) {
        const double v = oracle_fdr(s, 1.7 + 0.01 * i);
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("type-7 quantile", "[simulation]") {
    CHECK(sample_quantile({1, 2, 3, 4}, 0.5) == 2.5);
    CHECK(sample_quantile({5}, 0.025) == 5.0);
    CHECK(sample_quantile({1, 2, 3, 4, 5}, 0.25) == 2.0);
    CHECK(std::isnan(sample_quantile({}, 0.5)));
}

TEST_CASE("single replication collapses the bands", "[simulation]") {
    ScenarioSpec s = normal_preset();
    s.reps = 1;
    const SimulationSummary r = run_study(s, {});
    REQUIRE(r.successful_reps == 1);
    for (Eigen::Index k = 0; k < r.mean_fdr_iso.size(); ++k) {
        CHECK(r.band_lo_iso[k] == r.mean_fdr_iso[k]);
        CHECK(r.band_hi_iso[k] == r.mean_fdr_iso[k]);
        if (std::isfinite(r.mean_fdr_raw[k])) CHECK(r.band_lo_raw[k] == r.mean_fdr_raw[k]);
    }
}

TEST_CASE("study results do not depend on thread count or order", "[simulation][property]") {
    ScenarioSpec s = normal_preset();
    s.reps = 8;
    StudyConfig one;
    StudyConfig four;
    four.threads = 4;
    const SimulationSummary a = run_study(s, one);
    const SimulationSummary b = run_study(s, four);
    CHECK(a.mean_fdr_iso.cwiseEqual(b.mean_fdr_iso).all());
    CHECK(a.band_hi_iso.cwiseEqual(b.band_hi_iso).all());
    CHECK(a.mean_fdp_local_iso == b.mean_fdp_local_iso);

    std::vector<ReplicationResult> reps;
    for (std::size_t r = 8; r-- > 0;) reps.push_back(run_replication(s, one, r));
    const SimulationSummary c = summarize(s, one, reps);
    CHECK(c.mean_fdr_iso.cwiseEqual(a.mean_fdr_iso).all());
}

TEST_CASE("bands bracket the mean", "[simulation][property]") {
    ScenarioSpec s = chisq_preset();
    s.reps = 10;
    const SimulationSummary r = run_study(s, {});
    for (Eigen::Index k = 0; k < r.mean_fdr_iso.size(); ++k) {
        CHECK(r.band_lo_iso[k] <= r.mean_fdr_iso[k] + 1e-15);
        CHECK(r.mean_fdr_iso[k] <= r.band_hi_iso[k] + 1e-15);
        CHECK(r.oracle_fdr[k] > 0.0);
    }
}

TEST_CASE("nonmonotone detection scans the occupied run past the boundary", "[simulation]") {
    std::vector<double> c;
    for (int k = 0; k < 6; ++k) c.push_back(k + 0.5);
    const Histogram h(c, {10, 10, 5, 3, 0, 1}, 1.0, 29, {0.0, 6.0});
    CHECK(raw_Fdr_nonmonotone(h, Eigen::VectorXd{{0.9, 0.8, 0.5, 0.6, 0.1, 0.9}}, 1.0));
    CHECK_FALSE(raw_Fdr_nonmonotone(h, Eigen::VectorXd{{0.9, 0.8, 0.5, 0.4, 0.1, 0.9}}, 1.0));
}

TEST_CASE("failed fits are excluded and counted", "[simulation]") {
    ScenarioSpec s = normal_preset();
    s.n = 20;  // too few statistics for the null fit
    s.reps = 3;
    const SimulationSummary r = run_study(s, {});
    CHECK(r.failed_reps + r.successful_reps == 3);
    CHECK(r.failures.size() == r.failed_reps);
}
