// isofdr command-line front end: transform, analyze, simulate.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "isofdr/config.hpp"
#include "isofdr/csv.hpp"
#include "isofdr/error.hpp"
#include "isofdr/null_model.hpp"
#include "isofdr/pipeline.hpp"

namespace fs = std::filesystem;
using namespace isofdr;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// Config keys exposed as --key-name flags; values are collected verbatim and
// parsed by the config layer so file and flag share one code path.
struct FlagSet {
    std::map<std::string, std::string> values;

    void add(CLI::App* app, const std::vector<std::pair<std::string, std::string>>& keys) {
        for (const auto& [key, help] : keys) {
            std::string flag = "--" + key;
            for (auto& c : flag) {
                if (c == '_') c = '-';
            }
            app->add_option(flag, values[key], help);
        }
    }

    io::KeyValues given(const CLI::App* app) const {
        io::KeyValues kv;
        for (const auto& [key, value] : values) {
            std::string flag = "--" + key;
            for (auto& c : flag) {
                if (c == '_') c = '-';
            }
            if (app->count(flag) > 0) kv[key] = value;
        }
        return kv;
    }
};

fs::path output_dir(const std::string& flag_value, const fs::path& configured) {
    if (!flag_value.empty()) return flag_value;
    return io::resolve_output_dir(configured);
}

void report_written(const std::vector<fs::path>& paths) {
    for (const auto& p : paths) std::cout << "wrote " << p.string() << "\n";
}

int cmd_transform(const std::string& input, const std::string& output, const std::string& column, double df,
                  double clamp_z) {
    const std::vector<double> t = io::read_numeric_column(input, column);
    const io::TransformResult r = io::transform_statistics(t, Dof(df), clamp_z);
    if (output.empty() || output == "-") {
        std::cout << "z\n";
        for (double z : r.z) std::cout << io::format_double(z) << "\n";
    } else {
        io::write_z_csv(output, r.z);
    }
    std::cerr << "transformed " << r.z.size() << " statistics; clamped " << r.clamped << "\n";
    return 0;
}

int cmd_analyze(const std::string& input, const std::string& config_path, const io::KeyValues& flags,
                const std::string& out_flag) {
    io::KeyValues kv;
    if (!config_path.empty()) kv = io::read_key_values(config_path);
    kv = io::merge(kv, flags);
    const io::AnalysisConfig cfg = io::analysis_config_from(kv);
    std::vector<double> stats = io::read_numeric_column(input, cfg.column);
    const io::AnalysisResult r = io::analyze(std::move(stats), cfg);
    if (cfg.df) std::cerr << "clamped " << r.clamped << " statistics in the t-to-z transform\n";
    for (const auto& w : r.mono.warnings) std::cerr << "warning: " << w << "\n";
    report_written(io::write_analysis(r, output_dir(out_flag, cfg.output_dir)));
    return 0;
}

int cmd_simulate(const std::string& config_path, const io::KeyValues& flags, const std::string& out_flag) {
    io::KeyValues kv;
    if (!config_path.empty()) kv = io::read_key_values(config_path);
    kv = io::merge(kv, flags);
    const io::SimulationConfig cfg = io::simulation_config_from(kv);
    const SimulationSummary s = run_study(cfg.scenario, cfg.study);
    if (s.failed_reps > 0) std::cerr << s.failed_reps << " replications failed\n";
    report_written(io::write_simulation(s, cfg, output_dir(out_flag, cfg.output_dir)));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Local and tail false discovery rates with monotone estimates"};
    app.require_subcommand(1);

    std::string input, output, column = "1";
    double df = 0.0;
    double clamp_z = kDefaultClampZ;
    auto* transform = app.add_subcommand("transform", "Map t statistics to z values");
    transform->add_option("input", input, "CSV with a header row")->required()->check(CLI::ExistingFile);
    transform->add_option("-o,--output", output, "output CSV (default: stdout)");
    transform->add_option("--column", column, "column name or 1-based index");
    transform->add_option("--df", df, "degrees of freedom")->required();
    transform->add_option("--clamp-z", clamp_z, "clamp |z| at this value");

    std::string a_input, a_config, a_out;
    FlagSet a_flags;
    auto* analyze = app.add_subcommand("analyze", "Estimate fdr and Fdr and apply the decision rules");
    analyze->add_option("input", a_input, "CSV with a header row")->required()->check(CLI::ExistingFile);
    analyze->add_option("-c,--config", a_config, "key = value config file")->check(CLI::ExistingFile);
    analyze->add_option("-o,--output-dir", a_out, "output directory (overrides env and config)");
    a_flags.add(analyze, {{"width", "bin width"},
                          {"range_lo", "histogram lower edge"},
                          {"range_hi", "histogram upper edge"},
                          {"null_lo", "null region lower end"},
                          {"null_hi", "null region upper end"},
                          {"family", "normal or gamma"},
                          {"sides", "none, left, right or both"},
                          {"method", "pava or qp"},
                          {"which", "fdr, Fdr or both"},
                          {"alphas", "comma-separated levels"},
                          {"column", "column name or 1-based index"},
                          {"df", "t-to-z degrees of freedom"},
                          {"clamp_z", "clamp |z| at this value"},
                          {"tol", "fit tolerance"},
                          {"max_iter", "fit iteration cap"},
                          {"delta_scale", "fitted or observed"},
                          {"per_tail", "run the local rule per tail"}});

    std::string s_config, s_out;
    FlagSet s_flags;
    auto* simulate = app.add_subcommand("simulate", "Run a seeded simulation study");
    simulate->add_option("-c,--config", s_config, "key = value config file")->check(CLI::ExistingFile);
    simulate->add_option("-o,--output-dir", s_out, "output directory (overrides env and config)");
    s_flags.add(simulate, {{"preset", "normal or chisq"},
                           {"p0", "null proportion"},
                           {"n", "statistics per replication"},
                           {"reps", "replications"},
                           {"seed", "base seed"},
                           {"width", "bin width"},
                           {"range_lo", "histogram lower edge"},
                           {"range_hi", "histogram upper edge"},
                           {"fit_lo", "null region lower end"},
                           {"fit_hi", "null region upper end"},
                           {"iso_boundary", "monotonization boundary"},
                           {"alphas", "comma-separated levels"},
                           {"threads", "worker threads (0 = all cores)"},
                           {"method", "pava or qp"},
                           {"tol", "fit tolerance"},
                           {"max_iter", "fit iteration cap"},
                           {"delta_scale", "fitted or observed"}});

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*transform) return cmd_transform(input, output, column, df, clamp_z);
        if (*analyze) return cmd_analyze(a_input, a_config, a_flags.given(analyze), a_out);
        if (*simulate) return cmd_simulate(s_config, s_flags.given(simulate), s_out);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const FitError& e) {
        std::cerr << "fit failed: " << e.what() << "\n";
        return kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}
