#include "isofdr/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "isofdr/csv.hpp"
#include "isofdr/error.hpp"
#include "isofdr/svg_plot.hpp"

namespace isofdr::io {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) { return format_double(v); }

std::string alpha_tag(double a) { return format_double(a); }

double sqrt_diag(const Eigen::MatrixXd& m, Eigen::Index k) {
    const double v = m(k, k);
    return std::isfinite(v) ? std::sqrt(v) : kNaN;
}

Eigen::VectorXd natural(const Eigen::VectorXd& logs) { return logs.array().exp(); }

double masked(const Eigen::VectorXd& logs, const std::vector<bool>& valid, Eigen::Index k) {
    return valid[static_cast<std::size_t>(k)] ? std::exp(logs[k]) : kNaN;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("failed writing " + path.string());
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

TransformResult transform_statistics(std::span<const double> t, Dof df, double clamp_z) {
    TransformResult r;
    r.z.reserve(t.size());
    for (double x : t) {
        const ZValue z = z_transform(x, df, clamp_z);
        if (z.clamped) ++r.clamped;
        r.z.push_back(z.z);
    }
    return r;
}

void write_z_csv(const fs::path& path, std::span<const double> z) {
    CsvWriter w(path);
    w.row({"z"});
    for (double v : z) w.row({fmt(v)});
    w.close();
}

AnalysisResult analyze(std::vector<double> stats, const AnalysisConfig& config) {
    config.validate();
    std::size_t clamped = 0;
    if (config.df) {
        TransformResult t = transform_statistics(stats, Dof(*config.df), config.clamp_z);
        stats = std::move(t.z);
        clamped = t.clamped;
    }
    Histogram hist = build_histogram(stats, config.width, config.range);
    NullFit fit = fit_null(hist, config.family, config.null_region, config.fit);
    FdrEstimates est = estimate_fdr(hist, fit, config.covariance);
    MonotoneFdr mono = monotonize_tails(est, hist, config.boundaries(), config.method, config.which);

    AnalysisResult r{config, std::move(stats), clamped, std::move(hist), std::move(fit), std::move(est),
                     std::move(mono), {}, {}, {}, {}, {}};
    for (std::size_t i = 0; i < r.stats.size(); ++i) {
        if (!r.hist.locate(r.stats[i])) r.out_of_range.push_back(i);
    }
    r.fdr_iso = per_hypothesis_values(r.stats, r.hist, r.mono, Which::LocalFdr);
    r.Fdr_iso = per_hypothesis_values(r.stats, r.hist, r.mono, Which::TailFdr);

    std::vector<bool> group(r.stats.size());
    const double split = 0.5 * (config.null_region.lo + config.null_region.hi);
    for (std::size_t i = 0; i < r.stats.size(); ++i) group[i] = r.stats[i] >= split;
    for (double a : config.alphas) {
        r.local.push_back(config.per_tail ? adaptive_reject_local_grouped(r.fdr_iso, group, a)
                                          : adaptive_reject_local(r.fdr_iso, a));
        r.tail.push_back(adaptive_reject_tail(r.Fdr_iso, a));
    }
    return r;
}

std::vector<fs::path> write_analysis(const AnalysisResult& r, const fs::path& dir) {
    fs::create_directories(dir);
    std::vector<fs::path> written;
    const auto K = static_cast<Eigen::Index>(r.hist.size());
    const auto& est = r.est;
    const auto& mono = r.mono;

    {
        const fs::path p = dir / "bins.csv";
        CsvWriter w(p);
        w.row({"t", "y", "y_hat", "fdr_raw", "fdr_iso", "Fdr_right_raw", "Fdr_right_iso", "Fdr_left_raw",
               "Fdr_left_iso", "se_log_fdr", "se_log_Fdr_right", "se_log_Fdr_left"});
        for (Eigen::Index k = 0; k < K; ++k) {
            const auto ks = static_cast<std::size_t>(k);
            w.row({fmt(r.hist.centers()[ks]), std::to_string(r.hist.counts()[ks]), fmt(r.fit.fitted[k]),
                   fmt(masked(est.log_fdr, est.valid, k)), fmt(std::exp(mono.log_fdr_iso[k])),
                   fmt(masked(est.log_Fdr_right, est.valid_right, k)), fmt(std::exp(mono.log_Fdr_right_iso[k])),
                   fmt(masked(est.log_Fdr_left, est.valid_left, k)), fmt(std::exp(mono.log_Fdr_left_iso[k])),
                   fmt(sqrt_diag(est.cov_log_fdr, k)), fmt(sqrt_diag(est.cov_log_Fdr_right, k)),
                   fmt(sqrt_diag(est.cov_log_Fdr_left, k))});
        }
        w.close();
        written.push_back(p);
    }
    {
        const fs::path p = dir / "decisions.csv";
        CsvWriter w(p);
        std::vector<std::string> header{"index", "statistic", "bin", "fdr_iso", "Fdr_iso"};
        for (double a : r.config.alphas) header.push_back("local_" + alpha_tag(a));
        for (double a : r.config.alphas) header.push_back("tail_" + alpha_tag(a));
        w.row(header);
        for (std::size_t i = 0; i < r.stats.size(); ++i) {
            const auto bin = r.hist.locate(r.stats[i]);
            std::vector<std::string> row{std::to_string(i + 1), fmt(r.stats[i]), bin ? std::to_string(*bin) : "",
                                         fmt(r.fdr_iso[i]), fmt(r.Fdr_iso[i])};
            for (const auto& d : r.local) row.push_back(d.rejected[i] ? "1" : "0");
            for (const auto& d : r.tail) row.push_back(d.rejected[i] ? "1" : "0");
            w.row(row);
        }
        w.close();
        written.push_back(p);
    }
    {
        std::ostringstream s;
        const auto& c = r.config;
        s << "statistics " << r.stats.size() << "\n";
        s << "out_of_range " << r.out_of_range.size() << "\n";
        if (c.df) s << "t_to_z_df " << fmt(*c.df) << "\nclamped " << r.clamped << "\n";
        s << "bins " << r.hist.size() << "\n";
        s << "width " << fmt(c.width) << "\n";
        s << "range " << fmt(c.range.lo) << " " << fmt(c.range.hi) << "\n";
        s << "null_region " << fmt(c.null_region.lo) << " " << fmt(c.null_region.hi) << "\n";
        s << "family " << to_string(c.family) << "\n";
        s << "sides " << to_string(c.sides) << "\n";
        s << "method " << to_string(mono.method) << "\n";
        s << "p0_hat " << fmt(r.fit.p0_hat) << "\n";
        if (r.fit.p0_above_one) s << "warning p0_hat above one\n";
        s << "eta";
        for (Eigen::Index j = 0; j < r.fit.eta_plus.size(); ++j) s << " " << fmt(r.fit.eta_plus[j]);
        s << "\n";
        if (c.family == Family::Normal) {
            const NormalMoments m = normal_moments(r.fit);
            s << "null_mean " << fmt(m.mean) << "\nnull_sd " << fmt(m.sd) << "\n";
        }
        s << "converged " << (r.fit.converged ? "yes" : "no") << "\n";
        s << "iterations " << r.fit.iterations << "\n";
        s << "changed_bins_fdr " << mono.changed_bins.size() << "\n";
        s << "changed_bins_Fdr " << mono.changed_bins_Fdr.size() << "\n";
        for (const auto& w : mono.warnings) s << "warning " << w << "\n";
        for (std::size_t j = 0; j < c.alphas.size(); ++j) {
            s << "rejections alpha=" << fmt(c.alphas[j]) << " local=" << r.local[j].u
              << " tail=" << r.tail[j].u << "\n";
        }
        const fs::path p = dir / "summary.txt";
        write_text(p, s.str());
        written.push_back(p);
    }
    {
        PlotSpec plot;
        plot.title = "Estimated local fdr";
        plot.y_label = "fdr";
        const std::vector<double> t = r.hist.centers();
        Eigen::VectorXd raw(K);
        for (Eigen::Index k = 0; k < K; ++k) raw[k] = masked(est.log_fdr, est.valid, k);
        plot.lines.push_back({"raw", t, to_std(raw), "#999999", true});
        plot.lines.push_back({"monotone", t, to_std(natural(mono.log_fdr_iso)), "#1f4e99", false});
        if (mono.boundaries.left) plot.vertical_markers.push_back(*mono.boundaries.left);
        if (mono.boundaries.right) plot.vertical_markers.push_back(*mono.boundaries.right);
        const fs::path p = dir / "fdr_plot.svg";
        write_svg(p, render_svg(plot));
        written.push_back(p);
    }
    return written;
}

std::vector<fs::path> write_simulation(const SimulationSummary& s, const SimulationConfig& config,
                                       const fs::path& dir) {
    fs::create_directories(dir);
    std::vector<fs::path> written;
    const auto G = static_cast<Eigen::Index>(s.grid.size());
    {
        const fs::path p = dir / "study_summary.csv";
        CsvWriter w(p);
        w.row({"t", "oracle_fdr", "mean_fdr_raw", "mean_fdr_iso", "band_lo_raw", "band_hi_raw", "band_lo_iso",
               "band_hi_iso", "mean_abs_err_raw", "mean_abs_err_iso", "oracle_Fdr", "mean_Fdr_raw",
               "mean_Fdr_iso", "raw_valid_reps"});
        for (Eigen::Index g = 0; g < G; ++g) {
            w.row({fmt(s.grid[static_cast<std::size_t>(g)]), fmt(s.oracle_fdr[g]), fmt(s.mean_fdr_raw[g]),
                   fmt(s.mean_fdr_iso[g]), fmt(s.band_lo_raw[g]), fmt(s.band_hi_raw[g]), fmt(s.band_lo_iso[g]),
                   fmt(s.band_hi_iso[g]), fmt(s.mean_abs_err_raw[g]), fmt(s.mean_abs_err_iso[g]),
                   fmt(s.oracle_Fdr[g]), fmt(s.mean_Fdr_raw[g]), fmt(s.mean_Fdr_iso[g]),
                   std::to_string(s.raw_valid_reps[static_cast<std::size_t>(g)])});
        }
        w.close();
        written.push_back(p);
    }
    {
        const auto& sc = config.scenario;
        std::ostringstream m;
        m << "preset " << config.preset << "\n";
        m << "p0 " << fmt(sc.p0) << "\nn " << sc.n << "\nreps " << sc.reps << "\nseed " << sc.base_seed << "\n";
        m << "width " << fmt(sc.width) << "\nrange " << fmt(sc.hist_range.lo) << " " << fmt(sc.hist_range.hi) << "\n";
        m << "fitting_interval " << fmt(sc.fitting_interval.lo) << " " << fmt(sc.fitting_interval.hi) << "\n";
        m << "iso_boundary " << fmt(sc.iso_boundary) << "\n";
        m << "family " << to_string(sc.family()) << "\nmethod " << to_string(config.study.method) << "\n";
        m << "band_scale natural (2.5% and 97.5% type-7 quantiles of fdr)\n";
        m << "successful_reps " << s.successful_reps << "\nfailed_reps " << s.failed_reps << "\n";
        for (const auto& f : s.failures) m << "failure " << f << "\n";
        m << "nonmonotone_raw_Fdr " << s.nonmonotone_raw_Fdr_count << "\n";
        for (std::size_t j = 0; j < s.alphas.size(); ++j) {
            m << "alpha " << fmt(s.alphas[j]) << " local_iso fdp=" << fmt(s.mean_fdp_local_iso[j])
              << " fnp=" << fmt(s.mean_fnp_local_iso[j]) << " local_raw fdp=" << fmt(s.mean_fdp_local_raw[j])
              << " fnp=" << fmt(s.mean_fnp_local_raw[j]) << " tail_iso fdp=" << fmt(s.mean_fdp_tail_iso[j])
              << " fnp=" << fmt(s.mean_fnp_tail_iso[j]) << "\n";
        }
        const fs::path p = dir / "study_meta.txt";
        write_text(p, m.str());
        written.push_back(p);
    }
    const double boundary = config.scenario.iso_boundary;
    {
        PlotSpec raw_panel, iso_panel;
        raw_panel.title = "Raw fdr estimates: mean and 95% range";
        iso_panel.title = "Monotone fdr estimates: mean and 95% range";
        for (PlotSpec* panel : {&raw_panel, &iso_panel}) {
            panel->y_label = "fdr";
            panel->vertical_markers = {boundary};
        }
        raw_panel.bands.push_back({"95% range", s.grid, to_std(s.band_lo_raw), to_std(s.band_hi_raw), "#c0504d"});
        raw_panel.lines.push_back({"mean", s.grid, to_std(s.mean_fdr_raw), "#c0504d", false});
        raw_panel.lines.push_back({"oracle", s.grid, to_std(s.oracle_fdr), "#000000", true});
        iso_panel.bands.push_back({"95% range", s.grid, to_std(s.band_lo_iso), to_std(s.band_hi_iso), "#1f4e99"});
        iso_panel.lines.push_back({"mean", s.grid, to_std(s.mean_fdr_iso), "#1f4e99", false});
        iso_panel.lines.push_back({"oracle", s.grid, to_std(s.oracle_fdr), "#000000", true});
        const fs::path p = dir / "fdr_plot.svg";
        write_svg(p, render_svg_panels({raw_panel, iso_panel}));
        written.push_back(p);
    }
    {
        PlotSpec panel;
        panel.title = "Right-tail Fdr: raw vs monotone";
        panel.y_label = "Fdr";
        panel.vertical_markers = {boundary};
        panel.lines.push_back({"raw mean", s.grid, to_std(s.mean_Fdr_raw), "#c0504d", false});
        panel.lines.push_back({"monotone mean", s.grid, to_std(s.mean_Fdr_iso), "#1f4e99", false});
        panel.lines.push_back({"oracle", s.grid, to_std(s.oracle_Fdr), "#000000", true});
        const fs::path p = dir / "tail_fdr_plot.svg";
        write_svg(p, render_svg(panel));
        written.push_back(p);
    }
    return written;
}

}  // namespace isofdr::io
