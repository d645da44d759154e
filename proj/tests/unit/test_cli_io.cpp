#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "isofdr/config.hpp"
#include "isofdr/csv.hpp"
#include "isofdr/pipeline.hpp"
#include "isofdr/simulation.hpp"
#include "isofdr/stats_numerics.hpp"
#include "oracles.hpp"

using namespace isofdr;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("isofdr_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

io::AnalysisConfig normal_config() {
    io::KeyValues kv{{"range_lo", "-6"}, {"range_hi", "8"}, {"width", "0.1"}, {"null_lo", "-1.3"},
                     {"null_hi", "1.7"}, {"sides", "both"}};
    return io::analysis_config_from(kv);
}

}  // namespace

TEST_CASE("config parsing", "[cli_io]") {
    const auto kv = io::parse_key_values("# comment\nwidth = 0.05\n\nrange_lo=-5 # trailing\nrange_hi = 5\nalphas = 0.05, 0.1,0.15\n");
    CHECK(kv.at("width") == "0.05");
    CHECK(kv.at("range_lo") == "-5");
    const io::AnalysisConfig c = io::analysis_config_from(kv);
    CHECK(c.width == 0.05);
    CHECK(c.alphas == std::vector<double>{0.05, 0.1, 0.15});
    CHECK(c.null_region.lo == -1.2);
    CHECK(c.null_region.hi == 1.2);

    CHECK_THROWS(io::parse_key_values("no equals sign"));
    CHECK_THROWS(io::analysis_config_from({{"width", "0.1"}}));
    CHECK_THROWS(io::analysis_config_from({{"range_lo", "-1"}, {"range_hi", "1"}, {"bogus", "1"}}));
    CHECK_THROWS(io::analysis_config_from({{"range_lo", "-1"}, {"range_hi", "1"}}));  // null region outside range
    CHECK_THROWS(io::analysis_config_from({{"range_lo", "-5"}, {"range_hi", "5"}, {"alphas", "0.5,1.0"}}));
    CHECK_THROWS(io::analysis_config_from({{"range_lo", "-5"}, {"range_hi", "5"}, {"width", "abc"}}));

    const auto merged = io::merge({{"width", "0.1"}, {"range_lo", "0"}}, {{"width", "0.2"}});
    CHECK(merged.at("width") == "0.2");
    CHECK(merged.at("range_lo") == "0");

    const io::SimulationConfig s = io::simulation_config_from({{"preset", "chisq"}, {"reps", "7"}});
    CHECK(s.scenario.kind == ScenarioKind::ChisqMix);
    CHECK(s.scenario.reps == 7);
}

TEST_CASE("output directory override from the environment", "[cli_io]") {
    ::unsetenv(io::kOutputDirEnv);
    CHECK(io::resolve_output_dir("cfg") == fs::path("cfg"));
    ::setenv(io::kOutputDirEnv, "/tmp/elsewhere", 1);
    CHECK(io::resolve_output_dir("cfg") == fs::path("/tmp/elsewhere"));
    ::unsetenv(io::kOutputDirEnv);
}

TEST_CASE("doubles round-trip through text", "[cli_io][property]") {
    std::mt19937_64 rng(71);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> e(-300, 300);
    for (int i = 0; i < 10000; ++i) {
        const double v = std::ldexp(u(rng), e(rng));
        CHECK(io::parse_double(io::format_double(v)) == v);
    }
    CHECK(io::format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(std::isnan(io::parse_double("nan")));
    CHECK(io::format_double(0.1) == "0.1");
}

TEST_CASE("numeric column reader", "[cli_io]") {
    std::istringstream good("id,t\na,1.5\nb,-2\n");
    CHECK(io::read_numeric_column(good, "t") == std::vector<double>{1.5, -2.0});
    std::istringstream by_index("id,t\na,1.5\nb,-2\n");
    CHECK(io::read_numeric_column(by_index, "2") == std::vector<double>{1.5, -2.0});
    std::istringstream bad("t\n1\n2\nx\n");
    CHECK_THROWS_WITH(io::read_numeric_column(bad, "t"), Catch::Matchers::ContainsSubstring("line 4"));
    std::istringstream missing("a,b\n1,2\n");
    CHECK_THROWS(io::read_numeric_column(missing, "c"));
}

TEST_CASE("transform of zeros is zeros; spot values match the oracles", "[cli_io]") {
    const std::vector<double> zeros(5, 0.0);
    const auto r = io::transform_statistics(zeros, Dof(36.0));
    for (double z : r.z) CHECK(z == 0.0);
    CHECK(r.clamped == 0);

    const std::vector<double> t{2.0, -2.0, 1e6};
    const auto s = io::transform_statistics(t, Dof(36.0));
    const double F = 0.5 + oracle::integrate([](double x) { return oracle::t_density(x, 36.0); }, 0.0, 2.0);
    const double zref = oracle::bisect([](double x) { return normal_cdf(x); }, F, 0.0, 5.0);
    CHECK(std::fabs(s.z[0] - zref) < 1e-9);
    CHECK(std::fabs(s.z[1] + zref) < 1e-9);
    CHECK(s.clamped == 1);

    const fs::path dir = scratch("transform");
    io::write_z_csv(dir / "z.csv", s.z);
    const auto back = io::read_numeric_column(dir / "z.csv", "z");
    CHECK(back == s.z);
}

TEST_CASE("analysis writes a complete, re-parseable bundle", "[cli_io]") {
    ScenarioSpec spec = normal_preset();
    const Sample sample = sample_scenario(spec, 0);
    const io::AnalysisConfig cfg = normal_config();
    const io::AnalysisResult r = io::analyze(sample.stats, cfg);
    const fs::path dir = scratch("analysis");
    const auto written = io::write_analysis(r, dir);
    CHECK(written.size() == 4);
    for (const char* name : {"bins.csv", "decisions.csv", "summary.txt", "fdr_plot.svg"}) {
        CHECK(fs::exists(dir / name));
    }

    const io::Table bins = io::read_table(dir / "bins.csv");
    REQUIRE(bins.rows.size() == r.hist.size());
    CHECK(bins.header.front() == "t");
    for (std::size_t k = 0; k < bins.rows.size(); ++k) {
        CHECK(io::parse_double(bins.rows[k][0]) == r.hist.centers()[k]);
        CHECK(io::parse_double(bins.rows[k][2]) == r.fit.fitted[static_cast<Eigen::Index>(k)]);
        CHECK(io::parse_double(bins.rows[k][4]) == std::exp(r.mono.log_fdr_iso[static_cast<Eigen::Index>(k)]));
    }
    const io::Table dec = io::read_table(dir / "decisions.csv");
    REQUIRE(dec.rows.size() == sample.stats.size());
    CHECK(dec.header.size() == 5 + 2 * cfg.alphas.size());
    std::size_t rejected = 0;
    for (const auto& row : dec.rows) rejected += row[5] == "1";
    CHECK(rejected == r.local[0].u);
    CHECK(io::parse_double(dec.rows[17][1]) == sample.stats[17]);

    const std::string summary = slurp(dir / "summary.txt");
    CHECK(summary.find("p0_hat ") != std::string::npos);
    CHECK(summary.find("rejections alpha=0.15") != std::string::npos);
    CHECK(slurp(dir / "fdr_plot.svg").find("<svg") != std::string::npos);

    // Same input and config: byte-identical outputs.
    const fs::path dir2 = scratch("analysis2");
    io::write_analysis(io::analyze(sample.stats, cfg), dir2);
    for (const char* name : {"bins.csv", "decisions.csv", "summary.txt", "fdr_plot.svg"}) {
        CHECK(slurp(dir / name) == slurp(dir2 / name));
    }
}

TEST_CASE("pure-null input gives few rejections", "[cli_io]") {
    ScenarioSpec spec = normal_preset();
    spec.p0 = 1.0;
    const Sample sample = sample_scenario(spec, 2);
    const io::AnalysisResult r = io::analyze(sample.stats, normal_config());
    // No non-null cases exist, so every rejection is false; it should be rare.
    CHECK(r.local[0].u <= sample.stats.size() / 200);
}

TEST_CASE("simulation bundle", "[cli_io]") {
    io::SimulationConfig cfg = io::simulation_config_from({{"reps", "3"}});
    const SimulationSummary s = run_study(cfg.scenario, cfg.study);
    const fs::path dir = scratch("simulate");
    const auto written = io::write_simulation(s, cfg, dir);
    CHECK(written.size() == 4);
    const io::Table t = io::read_table(dir / "study_summary.csv");
    REQUIRE(t.rows.size() == s.grid.size());
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
        const double v = io::parse_double(t.rows[k][3]);
        CHECK(v == s.mean_fdr_iso[static_cast<Eigen::Index>(k)]);
    }
    CHECK(slurp(dir / "study_meta.txt").find("band_scale natural") != std::string::npos);
}

TEST_CASE("fit failures surface as errors", "[cli_io]") {
    const std::vector<double> few{0.1, 0.2, 3.0};
    CHECK_THROWS_AS(io::analyze(few, normal_config()), FitError);
}
