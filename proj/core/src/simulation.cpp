#include "isofdr/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <limits>
#include <numbers>
#include <thread>

#include "isofdr/error.hpp"
#include "isofdr/stats_numerics.hpp"

namespace isofdr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

constexpr std::uint32_t kMembershipStream = 0;
constexpr std::uint32_t kNullStream = 1;
constexpr std::uint32_t kAltStream = 2;

double log_normal_pdf(double t, double mean, double sd) {
    const double z = (t - mean) / sd;
    return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

// log p0 f0(t) and log p1 f1(t).
std::pair<double, double> log_subdensities(const ScenarioSpec& spec, double t) {
    const double lp0 = std::log(spec.p0);
    const double lp1 = std::log1p(-spec.p0);
    if (spec.kind == ScenarioKind::NormalMix) {
        const auto& m = spec.normal;
        return {lp0 + log_normal_pdf(t, m.null_mean, m.null_sd),
                lp1 + log_normal_pdf(t, m.alt_mean, m.alt_sd)};
    }
    const auto& c = spec.chisq;
    if (!(t >= 0.0)) throw DomainError("chi-square scenario requires t >= 0");
    // Both densities vanish at 0; evaluate the limit just above it.
    const double x = std::max(t, 1e-300);
    const double f0 = chisq_pdf(x / c.null_scale, Dof(c.null_df)) / c.null_scale;
    const double f1 = noncentral_chisq_pdf(x, Dof(c.alt_df), c.alt_ncp);
    return {lp0 + std::log(f0), lp1 + std::log(f1)};
}

std::pair<double, double> survivals(const ScenarioSpec& spec, double t) {
    if (spec.kind == ScenarioKind::NormalMix) {
        const auto& m = spec.normal;
        return {normal_sf((t - m.null_mean) / m.null_sd), normal_sf((t - m.alt_mean) / m.alt_sd)};
    }
    const auto& c = spec.chisq;
    if (!(t >= 0.0)) throw DomainError("chi-square scenario requires t >= 0");
    return {chisq_sf(t / c.null_scale, Dof(c.null_df)),
            noncentral_chisq_sf(t, Dof(c.alt_df), c.alt_ncp)};
}

std::vector<double> per_hypothesis_raw_fdr(std::span<const double> stats, const Histogram& hist,
                                           const Eigen::VectorXd& fdr_raw) {
    // Every occupied bin has a defined raw estimate; the cap keeps the rule's
    // inputs in [0, 1].
    Eigen::VectorXd capped = fdr_raw.unaryExpr([](double v) { return std::isfinite(v) ? std::min(v, 1.0) : 1.0; });
    return per_hypothesis_values(stats, hist, capped);
}

}  // namespace

void ScenarioSpec::validate() const {
    if (!(p0 > 0.0 && p0 <= 1.0)) throw DomainError("p0 must lie in (0, 1]");
    if (!(fitting_interval.lo < fitting_interval.hi)) throw DomainError("fitting interval requires lo < hi");
    if (fitting_interval.lo < hist_range.lo || fitting_interval.hi > hist_range.hi) {
        throw DomainError("fitting interval must lie inside the histogram range");
    }
    if (n == 0) throw DomainError("sample size must be positive");
    if (reps == 0) throw DomainError("replication count must be positive");
    if (kind == ScenarioKind::ChisqMix && hist_range.lo < 0.0) {
        throw DomainError("chi-square scenario needs a nonnegative histogram range");
    }
}

ScenarioSpec normal_preset() {
    ScenarioSpec s;
    s.kind = ScenarioKind::NormalMix;
    s.fitting_interval = {0.2 - 1.5, 0.2 + 1.5};
    s.iso_boundary = 1.7;
    s.hist_range = {-6.0, 8.0};
    return s;
}

ScenarioSpec chisq_preset() {
    ScenarioSpec s;
    s.kind = ScenarioKind::ChisqMix;
    s.fitting_interval = {0.0, 4.0};
    s.iso_boundary = 4.0;
    s.hist_range = {0.0, 30.0};
    return s;
}

ScenarioSpec scenario_preset(const std::string& name) {
    if (name == "normal") return normal_preset();
    if (name == "chisq") return chisq_preset();
    throw DomainError("unknown scenario preset '" + name + "' (expected normal or chisq)");
}

std::mt19937_64 make_engine(std::uint64_t base_seed, std::uint64_t rep, std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(base_seed), static_cast<std::uint32_t>(base_seed >> 32),
                      static_cast<std::uint32_t>(rep), static_cast<std::uint32_t>(rep >> 32), stream};
    return std::mt19937_64(seq);
}

Sample sample_scenario(const ScenarioSpec& spec, std::size_t rep_index) {
    spec.validate();
    auto membership = make_engine(spec.base_seed, rep_index, kMembershipStream);
    auto null_rng = make_engine(spec.base_seed, rep_index, kNullStream);
    auto alt_rng = make_engine(spec.base_seed, rep_index, kAltStream);
    std::bernoulli_distribution is_null(spec.p0);

    Sample out;
    out.stats.reserve(spec.n);
    out.truth.reserve(spec.n);
    if (spec.kind == ScenarioKind::NormalMix) {
        std::normal_distribution<double> null_dist(spec.normal.null_mean, spec.normal.null_sd);
        std::normal_distribution<double> alt_dist(spec.normal.alt_mean, spec.normal.alt_sd);
        for (std::size_t i = 0; i < spec.n; ++i) {
            const bool null = is_null(membership);
            out.truth.push_back(!null);
            out.stats.push_back(null ? null_dist(null_rng) : alt_dist(alt_rng));
        }
    } else {
        const auto& c = spec.chisq;
        std::chi_squared_distribution<double> null_dist(c.null_df);
        std::poisson_distribution<int> mixing(0.5 * c.alt_ncp);
        for (std::size_t i = 0; i < spec.n; ++i) {
            const bool null = is_null(membership);
            out.truth.push_back(!null);
            if (null) {
                out.stats.push_back(c.null_scale * null_dist(null_rng));
            } else {
                const int j = mixing(alt_rng);
                std::chi_squared_distribution<double> central(c.alt_df + 2.0 * j);
                out.stats.push_back(central(alt_rng));
            }
        }
    }
    return out;
}

double oracle_null_density(const ScenarioSpec& spec, double t) {
    if (spec.kind == ScenarioKind::NormalMix) {
        return std::exp(log_normal_pdf(t, spec.normal.null_mean, spec.normal.null_sd));
    }
    const auto& c = spec.chisq;
    if (!(t > 0.0)) return 0.0;
    return chisq_pdf(t / c.null_scale, Dof(c.null_df)) / c.null_scale;
}

double oracle_fdr(const ScenarioSpec& spec, double t) {
    if (spec.p0 >= 1.0) return 1.0;
    const auto [l0, l1] = log_subdensities(spec, t);
    return 1.0 / (1.0 + std::exp(l1 - l0));
}

double oracle_Fdr(const ScenarioSpec& spec, double t) {
    if (spec.p0 >= 1.0) return 1.0;
    const auto [s0, s1] = survivals(spec, t);
    const double a = spec.p0 * s0;
    const double b = (1.0 - spec.p0) * s1;
    if (a + b <= 0.0) return kNaN;
    return a / (a + b);
}

bool raw_Fdr_nonmonotone(const Histogram& hist, const Eigen::VectorXd& Fdr_raw, double boundary) {
    const auto& centers = hist.centers();
    const auto& counts = hist.counts();
    std::optional<std::size_t> prev;
    for (std::size_t k = 0; k < hist.size(); ++k) {
        if (centers[k] < boundary) continue;
        if (counts[k] == 0) break;
        const double v = Fdr_raw[static_cast<Eigen::Index>(k)];
        if (prev && v - Fdr_raw[static_cast<Eigen::Index>(*prev)] > 1e-10) return true;
        prev = k;
    }
    return false;
}

ReplicationResult run_replication(const ScenarioSpec& spec, const StudyConfig& cfg,
                                  std::size_t rep_index) {
    ReplicationResult r;
    r.rep = rep_index;
    const Sample sample = sample_scenario(spec, rep_index);
    const Histogram hist = build_histogram(sample.stats, spec.width, spec.hist_range);
    NullFit fit;
    try {
        fit = fit_null(hist, spec.family(), spec.fitting_interval, cfg.fit);
    } catch (const FitError& e) {
        r.error = e.what();
        return r;
    }
    r.p0_hat = fit.p0_hat;
    const FdrEstimates est = estimate_fdr(hist, fit, cfg.covariance);
    const MonotoneFdr mono =
        monotonize_tails(est, hist, TailBoundaries{std::nullopt, spec.iso_boundary}, cfg.method, Which::Both);

    r.fdr_raw = est.log_fdr.array().exp();
    r.fdr_iso = mono.log_fdr_iso.array().exp();
    r.Fdr_raw = est.log_Fdr_right.array().exp();
    r.Fdr_iso = mono.log_Fdr_right_iso.array().exp();
    r.nonmonotone_raw_Fdr = raw_Fdr_nonmonotone(hist, r.Fdr_raw, spec.iso_boundary);

    const auto local_iso = per_hypothesis_values(sample.stats, hist, mono, Which::LocalFdr);
    const auto tail_iso = per_hypothesis_values(sample.stats, hist, mono, Which::TailFdr);
    const auto local_raw = per_hypothesis_raw_fdr(sample.stats, hist, r.fdr_raw);
    for (double alpha : cfg.alphas) {
        r.scores.local_iso.push_back(score(adaptive_reject_local(local_iso, alpha), sample.truth));
        r.scores.local_raw.push_back(score(adaptive_reject_local(local_raw, alpha), sample.truth));
        r.scores.tail_iso.push_back(score(adaptive_reject_tail(tail_iso, alpha), sample.truth));
    }
    r.ok = true;
    return r;
}

double sample_quantile(std::vector<double> values, double prob) {
    if (values.empty()) return kNaN;
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

SimulationSummary summarize(const ScenarioSpec& spec, const StudyConfig& cfg,
                            std::vector<ReplicationResult> results) {
    std::sort(results.begin(), results.end(),
              [](const auto& a, const auto& b) { return a.rep < b.rep; });
    const std::size_t K = bin_count(spec.hist_range, spec.width);
    const auto Ki = static_cast<Eigen::Index>(K);

    SimulationSummary s;
    s.alphas = cfg.alphas;
    s.grid.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        s.grid[k] = spec.hist_range.lo + (static_cast<double>(k) + 0.5) * spec.width;
    }
    s.oracle_fdr.resize(Ki);
    s.oracle_Fdr.resize(Ki);
    for (Eigen::Index k = 0; k < Ki; ++k) {
        s.oracle_fdr[k] = oracle_fdr(spec, s.grid[static_cast<std::size_t>(k)]);
        s.oracle_Fdr[k] = oracle_Fdr(spec, s.grid[static_cast<std::size_t>(k)]);
    }

    std::vector<const ReplicationResult*> ok;
    for (const auto& r : results) {
        if (r.ok) ok.push_back(&r);
        else s.failures.push_back("rep " + std::to_string(r.rep) + ": " + r.error);
    }
    s.successful_reps = ok.size();
    s.failed_reps = results.size() - ok.size();

    auto init = [&](Eigen::VectorXd& v) { v = Eigen::VectorXd::Constant(Ki, kNaN); };
    for (auto* v : {&s.mean_fdr_raw, &s.mean_fdr_iso, &s.band_lo_raw, &s.band_hi_raw, &s.band_lo_iso,
                    &s.band_hi_iso, &s.mean_Fdr_raw, &s.mean_Fdr_iso, &s.mean_abs_err_raw,
                    &s.mean_abs_err_iso}) {
        init(*v);
    }
    s.raw_valid_reps.assign(K, 0);

    auto mean_of = [](const std::vector<double>& v) {
        double sum = 0.0;
        for (double x : v) sum += x;
        return v.empty() ? kNaN : sum / static_cast<double>(v.size());
    };

    for (Eigen::Index k = 0; k < Ki; ++k) {
        std::vector<double> raw, iso, Fraw, Fiso, err_raw, err_iso;
        const double truth = s.oracle_fdr[k];
        for (auto* r : ok) {
            const double vr = r->fdr_raw[k];
            if (std::isfinite(vr)) {
                raw.push_back(vr);
                err_raw.push_back(std::abs(vr - truth));
            }
            iso.push_back(r->fdr_iso[k]);
            err_iso.push_back(std::abs(r->fdr_iso[k] - truth));
            if (std::isfinite(r->Fdr_raw[k])) Fraw.push_back(r->Fdr_raw[k]);
            Fiso.push_back(r->Fdr_iso[k]);
        }
        s.raw_valid_reps[static_cast<std::size_t>(k)] = raw.size();
        s.mean_fdr_raw[k] = mean_of(raw);
        s.mean_fdr_iso[k] = mean_of(iso);
        s.mean_Fdr_raw[k] = mean_of(Fraw);
        s.mean_Fdr_iso[k] = mean_of(Fiso);
        s.mean_abs_err_raw[k] = mean_of(err_raw);
        s.mean_abs_err_iso[k] = mean_of(err_iso);
        s.band_lo_raw[k] = sample_quantile(raw, 0.025);
        s.band_hi_raw[k] = sample_quantile(raw, 0.975);
        s.band_lo_iso[k] = sample_quantile(iso, 0.025);
        s.band_hi_iso[k] = sample_quantile(iso, 0.975);
    }

    const std::size_t A = cfg.alphas.size();
    s.mean_fdp_local_iso.assign(A, 0.0);
    s.mean_fnp_local_iso.assign(A, 0.0);
    s.mean_fdp_local_raw.assign(A, 0.0);
    s.mean_fnp_local_raw.assign(A, 0.0);
    s.mean_fdp_tail_iso.assign(A, 0.0);
    s.mean_fnp_tail_iso.assign(A, 0.0);
    for (auto* r : ok) {
        s.nonmonotone_raw_Fdr_count += r->nonmonotone_raw_Fdr;
        s.per_rep_scores.push_back(r->scores);
        for (std::size_t a = 0; a < A; ++a) {
            s.mean_fdp_local_iso[a] += r->scores.local_iso[a].fdp;
            s.mean_fnp_local_iso[a] += r->scores.local_iso[a].fnp;
            s.mean_fdp_local_raw[a] += r->scores.local_raw[a].fdp;
            s.mean_fnp_local_raw[a] += r->scores.local_raw[a].fnp;
            s.mean_fdp_tail_iso[a] += r->scores.tail_iso[a].fdp;
            s.mean_fnp_tail_iso[a] += r->scores.tail_iso[a].fnp;
        }
    }
    if (!ok.empty()) {
        const double n = static_cast<double>(ok.size());
        for (auto* v : {&s.mean_fdp_local_iso, &s.mean_fnp_local_iso, &s.mean_fdp_local_raw,
                        &s.mean_fnp_local_raw, &s.mean_fdp_tail_iso, &s.mean_fnp_tail_iso}) {
            for (auto& x : *v) x /= n;
        }
    }
    return s;
}

SimulationSummary run_study(const ScenarioSpec& spec, const StudyConfig& cfg) {
    spec.validate();
    for (double a : cfg.alphas) {
        if (!(a > 0.0 && a < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    }
    std::vector<ReplicationResult> results(spec.reps);
    unsigned threads = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.threads;
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, spec.reps));

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    auto worker = [&] {
        try {
            for (std::size_t rep = next++; rep < spec.reps; rep = next++) {
                results[rep] = run_replication(spec, cfg, rep);
            }
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
            next = spec.reps;
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (first_error) std::rethrow_exception(first_error);
    return summarize(spec, cfg, std::move(results));
}

}  // namespace isofdr
