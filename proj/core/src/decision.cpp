#include "isofdr/decision.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "isofdr/error.hpp"

namespace isofdr {

namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
}

std::vector<std::size_t> ascending_order(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    return order;
}

DecisionReport make_report(std::span<const double> values, double alpha, Rule rule) {
    DecisionReport r;
    r.rejected.assign(values.size(), false);
    r.rule = rule;
    r.alpha = alpha;
    r.per_hypothesis_stat.assign(values.begin(), values.end());
    return r;
}

}  // namespace

const char* to_string(Rule rule) {
    return rule == Rule::LocalFdrStepUp ? "local" : "tail";
}

std::vector<double> per_hypothesis_values(std::span<const double> stats, const Histogram& hist,
                                          const Eigen::VectorXd& binned) {
    if (static_cast<std::size_t>(binned.size()) != hist.size()) {
        throw InputError("binned estimates do not match histogram");
    }
    const auto last = static_cast<Eigen::Index>(hist.size() - 1);
    std::vector<double> out;
    out.reserve(stats.size());
    for (double x : stats) {
        if (!std::isfinite(x)) throw InputError("non-finite statistic");
        if (auto k = hist.locate(x)) out.push_back(binned[static_cast<Eigen::Index>(*k)]);
        else out.push_back(x < hist.range().lo ? binned[0] : binned[last]);
    }
    return out;
}

std::vector<double> per_hypothesis_values(std::span<const double> stats, const Histogram& hist,
                                          const MonotoneFdr& mono, Which which) {
    const Eigen::VectorXd& logs = which == Which::TailFdr ? mono.log_Fdr_iso : mono.log_fdr_iso;
    return per_hypothesis_values(stats, hist, Eigen::VectorXd(logs.array().exp()));
}

DecisionReport adaptive_reject_local(std::span<const double> values, double alpha) {
    check_alpha(alpha);
    DecisionReport r = make_report(values, alpha, Rule::LocalFdrStepUp);
    const auto order = ascending_order(values);
    double running = 0.0;
    for (std::size_t j = 0; j < order.size(); ++j) {
        running += values[order[j]];
        if (running / static_cast<double>(j + 1) <= alpha) r.u = j + 1;
    }
    for (std::size_t j = 0; j < r.u; ++j) r.rejected[order[j]] = true;
    return r;
}

DecisionReport adaptive_reject_tail(std::span<const double> values, double alpha) {
    check_alpha(alpha);
    DecisionReport r = make_report(values, alpha, Rule::TailFdrThreshold);
    const auto order = ascending_order(values);
    for (std::size_t j = 0; j < order.size(); ++j) {
        if (values[order[j]] <= alpha) r.u = j + 1;
    }
    for (std::size_t j = 0; j < r.u; ++j) r.rejected[order[j]] = true;
    return r;
}

DecisionReport adaptive_reject_local_grouped(std::span<const double> values,
                                             const std::vector<bool>& group, double alpha) {
    check_alpha(alpha);
    if (group.size() != values.size()) throw InputError("group labels do not match values");
    DecisionReport r = make_report(values, alpha, Rule::LocalFdrStepUp);
    for (bool g : {false, true}) {
        std::vector<std::size_t> members;
        std::vector<double> sub;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (group[i] == g) {
                members.push_back(i);
                sub.push_back(values[i]);
            }
        }
        if (members.empty()) continue;
        const auto part = adaptive_reject_local(sub, alpha);
        for (std::size_t i = 0; i < members.size(); ++i) r.rejected[members[i]] = part.rejected[i];
        r.u += part.u;
    }
    return r;
}

ErrorScore score(const DecisionReport& report, const std::vector<bool>& truth) {
    if (truth.size() != report.rejected.size()) throw InputError("truth does not match decisions");
    std::size_t rejected = 0, false_rej = 0, kept = 0, false_keep = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (report.rejected[i]) {
            ++rejected;
            false_rej += !truth[i];
        } else {
            ++kept;
            false_keep += truth[i];
        }
    }
    ErrorScore s;
    s.rejections = rejected;
    s.fdp = static_cast<double>(false_rej) / static_cast<double>(std::max<std::size_t>(1, rejected));
    s.fnp = static_cast<double>(false_keep) / static_cast<double>(std::max<std::size_t>(1, kept));
    return s;
}

}  // namespace isofdr
