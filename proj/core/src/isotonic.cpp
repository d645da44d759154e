#include "isofdr/isotonic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace isofdr {

namespace {

Eigen::VectorXd pava_increasing(const Eigen::VectorXd& a, const Eigen::VectorXd& w) {
    const auto n = a.size();
    std::vector<double> value, weight;
    std::vector<Eigen::Index> length;
    value.reserve(static_cast<std::size_t>(n));
    weight.reserve(static_cast<std::size_t>(n));
    length.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        value.push_back(a[i]);
        weight.push_back(w[i]);
        length.push_back(1);
        while (value.size() >= 2 && value[value.size() - 2] > value.back()) {
            const double w2 = weight.back(), v2 = value.back();
            const Eigen::Index l2 = length.back();
            value.pop_back();
            weight.pop_back();
            length.pop_back();
            const double wt = weight.back() + w2;
            value.back() = (weight.back() * value.back() + w2 * v2) / wt;
            weight.back() = wt;
            length.back() += l2;
        }
    }
    Eigen::VectorXd out(n);
    Eigen::Index pos = 0;
    for (std::size_t b = 0; b < value.size(); ++b) {
        out.segment(pos, length[b]).setConstant(value[b]);
        pos += length[b];
    }
    return out;
}

// min 1/2 (z-a)' M (z-a) s.t. z_1 <= ... <= z_n, given Minv = M^{-1}.
// Dual: min 1/2 l'Ql + c'l, l >= 0 with Q = D Minv D', c = D a, z = a + Minv D' l.
Eigen::VectorXd chain_qp_increasing(const Eigen::VectorXd& a, const Eigen::MatrixXd& minv) {
    const auto n = a.size();
    if (n <= 1) return a;
    const Eigen::Index m = n - 1;
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(m, n);
    for (Eigen::Index i = 0; i < m; ++i) {
        D(i, i) = -1.0;
        D(i, i + 1) = 1.0;
    }
    const Eigen::MatrixXd MinvDt = minv * D.transpose();
    const Eigen::MatrixXd Q = D * MinvDt;
    const Eigen::VectorXd c = D * a;
    const double tol = 1e-13 * (1.0 + c.cwiseAbs().maxCoeff()) * (1.0 + Q.diagonal().maxCoeff());

    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m);
    std::vector<bool> free(static_cast<std::size_t>(m), false);

    auto solve_free = [&](Eigen::VectorXd& s) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index i = 0; i < m; ++i) if (free[static_cast<std::size_t>(i)]) idx.push_back(i);
        const auto f = static_cast<Eigen::Index>(idx.size());
        Eigen::MatrixXd Qff(f, f);
        Eigen::VectorXd cf(f);
        for (Eigen::Index r = 0; r < f; ++r) {
            cf[r] = c[idx[static_cast<std::size_t>(r)]];
            for (Eigen::Index q = 0; q < f; ++q) Qff(r, q) = Q(idx[static_cast<std::size_t>(r)], idx[static_cast<std::size_t>(q)]);
        }
        const Eigen::VectorXd sf = Qff.ldlt().solve(-cf);
        s.setZero();
        for (Eigen::Index r = 0; r < f; ++r) s[idx[static_cast<std::size_t>(r)]] = sf[r];
    };

    const int max_outer = static_cast<int>(10 * m + 100);
    Eigen::VectorXd s(m);
    for (int outer = 0; outer < max_outer; ++outer) {
        const Eigen::VectorXd g = Q * lambda + c;
        Eigen::Index enter = -1;
        double most_negative = -tol;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (!free[static_cast<std::size_t>(i)] && g[i] < most_negative) {
                most_negative = g[i];
                enter = i;
            }
        }
        if (enter < 0) break;
        free[static_cast<std::size_t>(enter)] = true;

        for (int inner = 0; inner <= m; ++inner) {
            solve_free(s);
            double step = 1.0;
            bool feasible = true;
            for (Eigen::Index i = 0; i < m; ++i) {
                if (free[static_cast<std::size_t>(i)] && s[i] <= 0.0) {
                    feasible = false;
                    const double denom = lambda[i] - s[i];
                    if (denom > 0.0) step = std::min(step, lambda[i] / denom);
                    else step = 0.0;
                }
            }
            if (feasible) {
                lambda = s;
                break;
            }
            lambda += step * (s - lambda);
            for (Eigen::Index i = 0; i < m; ++i) {
                if (free[static_cast<std::size_t>(i)] && lambda[i] <= 1e-15 * (1.0 + lambda.cwiseAbs().maxCoeff())) {
                    free[static_cast<std::size_t>(i)] = false;
                    lambda[i] = 0.0;
                }
            }
        }
    }
    Eigen::VectorXd z = a + MinvDt * lambda;
    // Constraints held with equality are exact ties in the solution.
    for (Eigen::Index i = 0; i < m; ++i) {
        if (lambda[i] > 0.0 && z[i + 1] < z[i]) z[i + 1] = z[i];
    }
    return z;
}

double flip(Direction d) { return d == Direction::NonIncreasing ? -1.0 : 1.0; }

Eigen::MatrixXd ridged(Eigen::MatrixXd cov) {
    const double mean_diag = cov.diagonal().mean();
    cov.diagonal().array() += kCovarianceRidge * std::max(mean_diag, std::numeric_limits<double>::min());
    return cov;
}

}  // namespace

Eigen::VectorXd pava(const ChainProblem& problem) {
    const auto* w = std::get_if<Eigen::VectorXd>(&problem.weights);
    if (w == nullptr) throw DomainError("pava requires diagonal weights");
    if (w->size() != problem.targets.size()) throw InputError("weights and targets differ in length");
    if (problem.targets.size() == 0) throw InputError("empty chain problem");
    for (Eigen::Index i = 0; i < w->size(); ++i) {
        if (!((*w)[i] > 0.0) || !std::isfinite((*w)[i])) throw DomainError("pava weights must be positive");
    }
    const double s = flip(problem.direction);
    return s * pava_increasing(s * problem.targets, *w);
}

Eigen::VectorXd qp_isotonic(const ChainProblem& problem) {
    const auto* M = std::get_if<Eigen::MatrixXd>(&problem.weights);
    if (M == nullptr) throw DomainError("qp_isotonic requires a full weight matrix");
    const auto n = problem.targets.size();
    if (n == 0) throw InputError("empty chain problem");
    if (M->rows() != n || M->cols() != n) throw InputError("weight matrix does not match targets");
    if (!M->isApprox(M->transpose(), 1e-10)) throw CovarianceNotUsable();
    Eigen::LLT<Eigen::MatrixXd> llt(*M);
    if (llt.info() != Eigen::Success) throw CovarianceNotUsable();
    const Eigen::MatrixXd minv = llt.solve(Eigen::MatrixXd::Identity(n, n));
    const double s = flip(problem.direction);
    return s * chain_qp_increasing(s * problem.targets, 0.5 * (minv + minv.transpose()));
}

Eigen::VectorXd qp_isotonic_covariance(const Eigen::VectorXd& targets,
                                       const Eigen::MatrixXd& covariance, Direction direction) {
    const auto n = targets.size();
    if (covariance.rows() != n || covariance.cols() != n) throw InputError("covariance does not match targets");
    Eigen::LLT<Eigen::MatrixXd> llt(covariance);
    if (llt.info() != Eigen::Success || !covariance.allFinite()) throw CovarianceNotUsable();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(covariance, Eigen::EigenvaluesOnly);
    if (!(eig.eigenvalues().minCoeff() > 0.0)) throw CovarianceNotUsable();
    const double s = flip(direction);
    return s * chain_qp_increasing(s * targets, covariance);
}

Eigen::VectorXd solve_chain(const ChainProblem& problem) {
    if (std::holds_alternative<Eigen::VectorXd>(problem.weights)) return pava(problem);
    return qp_isotonic(problem);
}

const char* to_string(MonotoneMethod method) {
    return method == MonotoneMethod::Pava ? "pava" : "qp";
}

MonotoneMethod parse_method(const std::string& name) {
    if (name == "pava") return MonotoneMethod::Pava;
    if (name == "qp" || name == "full-qp") return MonotoneMethod::FullQp;
    throw DomainError("unknown monotonization method '" + name + "' (expected pava or qp)");
}

namespace {

struct Segment {
    std::vector<std::size_t> bins;  // ascending bin indices of the tail
    Direction direction;
    bool outward_is_up;             // tail extends toward higher indices
};

// Monotonize one tail segment of `values` in place.
void monotonize_segment(Eigen::VectorXd& values, const std::vector<bool>& valid,
                        const Eigen::MatrixXd& cov, const Segment& seg, MonotoneMethod method,
                        const char* label, std::vector<std::string>& warnings) {
    std::vector<std::size_t> used;
    for (auto k : seg.bins) if (valid[k]) used.push_back(k);
    if (used.empty()) {
        if (!seg.bins.empty()) warnings.push_back(std::string(label) + ": no valid bins in tail, left unchanged");
        return;
    }
    const auto n = static_cast<Eigen::Index>(used.size());
    Eigen::VectorXd targets(n);
    Eigen::MatrixXd sub(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        targets[i] = values[static_cast<Eigen::Index>(used[static_cast<std::size_t>(i)])];
        for (Eigen::Index j = 0; j < n; ++j) {
            sub(i, j) = cov(static_cast<Eigen::Index>(used[static_cast<std::size_t>(i)]),
                            static_cast<Eigen::Index>(used[static_cast<std::size_t>(j)]));
        }
    }

    Eigen::VectorXd fitted;
    bool done = false;
    if (method == MonotoneMethod::FullQp) {
        try {
            fitted = qp_isotonic_covariance(targets, ridged(sub), seg.direction);
            done = true;
        } catch (const CovarianceNotUsable&) {
            warnings.push_back(std::string(label) + ": covariance not usable; fell back to diagonal weights");
        }
    }
    if (!done) {
        // Inverse-variance weights; zero or non-finite variances are floored.
        Eigen::VectorXd var = sub.diagonal();
        double positive_max = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (std::isfinite(var[i])) positive_max = std::max(positive_max, var[i]);
        }
        const double floor = std::max(1e-12 * positive_max, 1e-300);
        Eigen::VectorXd w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double v = std::isfinite(var[i]) ? std::max(var[i], floor) : positive_max;
            w[i] = 1.0 / std::max(v, floor);
        }
        fitted = pava(ChainProblem{targets, w, seg.direction});
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        values[static_cast<Eigen::Index>(used[static_cast<std::size_t>(i)])] = fitted[i];
    }

    // Back-fill excluded bins from the nearest fitted bin toward the tail end,
    // or toward the center when none lies further out.
    for (auto k : seg.bins) {
        if (valid[k]) continue;
        std::optional<std::size_t> outward, inward;
        for (auto u : used) {
            const bool is_out = seg.outward_is_up ? u > k : u < k;
            if (is_out) {
                if (!outward || (seg.outward_is_up ? u < *outward : u > *outward)) outward = u;
            } else {
                if (!inward || (seg.outward_is_up ? u > *inward : u < *inward)) inward = u;
            }
        }
        const std::size_t src = outward ? *outward : *inward;
        values[static_cast<Eigen::Index>(k)] = values[static_cast<Eigen::Index>(src)];
    }
}

Segment right_segment(const Histogram& hist, double edge, Direction direction) {
    Segment seg{{}, direction, true};
    for (std::size_t k = 0; k < hist.size(); ++k) if (hist.centers()[k] >= edge) seg.bins.push_back(k);
    return seg;
}

Segment left_segment(const Histogram& hist, double edge, Direction direction) {
    Segment seg{{}, direction, false};
    for (std::size_t k = 0; k < hist.size(); ++k) if (hist.centers()[k] <= edge) seg.bins.push_back(k);
    return seg;
}

// Caps at log 1 = 0; bins with no defined estimate become 0 (fdr = 1) unless a
// tail back-fill already gave them a value.
void cap(Eigen::VectorXd& values) {
    for (Eigen::Index k = 0; k < values.size(); ++k) {
        if (!std::isfinite(values[k]) || values[k] > 0.0) values[k] = 0.0;
    }
}

std::vector<std::size_t> changed(const Eigen::VectorXd& raw, const std::vector<bool>& valid,
                                 const Eigen::VectorXd& iso) {
    std::vector<std::size_t> out;
    for (Eigen::Index k = 0; k < raw.size(); ++k) {
        if (valid[static_cast<std::size_t>(k)] && std::abs(iso[k] - raw[k]) > 1e-12) {
            out.push_back(static_cast<std::size_t>(k));
        }
    }
    return out;
}

}  // namespace

MonotoneFdr monotonize_tails(const FdrEstimates& est, const Histogram& hist,
                             const TailBoundaries& boundaries, MonotoneMethod method, Which which) {
    const auto K = static_cast<Eigen::Index>(hist.size());
    if (est.log_fdr.size() != K) throw InputError("estimates do not match histogram");
    if (boundaries.left && boundaries.right && *boundaries.left > *boundaries.right) {
        throw DomainError("left tail edge exceeds right tail edge");
    }

    MonotoneFdr out;
    out.boundaries = boundaries;
    out.method = method;
    out.which = which;
    out.log_fdr_iso = est.log_fdr;
    out.log_Fdr_right_iso = est.log_Fdr_right;
    out.log_Fdr_left_iso = est.log_Fdr_left;

    const bool do_local = which != Which::TailFdr;
    const bool do_tail = which != Which::LocalFdr;
    if (boundaries.right) {
        if (do_local) {
            monotonize_segment(out.log_fdr_iso, est.valid, est.cov_log_fdr,
                               right_segment(hist, *boundaries.right, Direction::NonIncreasing), method,
                               "right tail fdr", out.warnings);
        }
        if (do_tail) {
            monotonize_segment(out.log_Fdr_right_iso, est.valid_right, est.cov_log_Fdr_right,
                               right_segment(hist, *boundaries.right, Direction::NonIncreasing), method,
                               "right tail Fdr", out.warnings);
        }
    }
    if (boundaries.left) {
        if (do_local) {
            monotonize_segment(out.log_fdr_iso, est.valid, est.cov_log_fdr,
                               left_segment(hist, *boundaries.left, Direction::NonDecreasing), method,
                               "left tail fdr", out.warnings);
        }
        if (do_tail) {
            monotonize_segment(out.log_Fdr_left_iso, est.valid_left, est.cov_log_Fdr_left,
                               left_segment(hist, *boundaries.left, Direction::NonDecreasing), method,
                               "left tail Fdr", out.warnings);
        }
    }
    cap(out.log_fdr_iso);
    cap(out.log_Fdr_right_iso);
    cap(out.log_Fdr_left_iso);

    out.changed_bins = changed(est.log_fdr, est.valid, out.log_fdr_iso);
    auto right_changed = changed(est.log_Fdr_right, est.valid_right, out.log_Fdr_right_iso);
    auto left_changed = changed(est.log_Fdr_left, est.valid_left, out.log_Fdr_left_iso);
    std::vector<std::size_t> merged;
    std::set_union(right_changed.begin(), right_changed.end(), left_changed.begin(),
                   left_changed.end(), std::back_inserter(merged));
    out.changed_bins_Fdr = std::move(merged);

    // Side split for the combined tail-Fdr vector.
    out.log_Fdr_iso = out.log_Fdr_right_iso;
    if (boundaries.left) {
        const double split = boundaries.right ? 0.5 * (*boundaries.left + *boundaries.right)
                                              : std::numeric_limits<double>::infinity();
        for (Eigen::Index k = 0; k < K; ++k) {
            if (hist.centers()[static_cast<std::size_t>(k)] < split) out.log_Fdr_iso[k] = out.log_Fdr_left_iso[k];
        }
    }
    return out;
}

}  // namespace isofdr
