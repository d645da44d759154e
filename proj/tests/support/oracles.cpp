#include "oracles.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace oracle {

namespace {

double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double diff = left + right - whole;
    // Stop at the tolerance or at the rounding-noise floor of the estimate.
    if (depth <= 0 || std::fabs(diff) <= 15.0 * tol || std::fabs(diff) <= 1e-15 * std::fabs(left + right))
        return left + right + diff / 15.0;
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    // Split into pieces first so narrow features are not missed.
    constexpr int pieces = 64;
    double total = 0.0;
    const double h = (b - a) / pieces;
    for (int i = 0; i < pieces; ++i) {
        const double lo = a + h * i;
        const double hi = i == pieces - 1 ? b : lo + h;
        const double fa = f(lo), fb = f(hi), fm = f(0.5 * (lo + hi));
        const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
        total += simpson_step(f, lo, hi, fa, fm, fb, whole, tol / pieces, 40);
    }
    return total;
}

double bisect(const std::function<double(double)>& f, double target, double lo, double hi) {
    for (int i = 0; i < 400 && hi - lo > 1e-15; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) < target) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

double normal_density(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double t_density(double x, double df) {
    const double c = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) - 0.5 * std::log(df * std::numbers::pi);
    return std::exp(c - 0.5 * (df + 1.0) * std::log1p(x * x / df));
}

double chisq_density(double x, double df) {
    if (x <= 0.0) return df == 2.0 && x == 0.0 ? 0.5 : 0.0;
    const double k = 0.5 * df;
    return std::exp((k - 1.0) * std::log(x) - 0.5 * x - k * std::log(2.0) - std::lgamma(k));
}

double noncentral_chisq_density_series(double x, double df, double delta, int terms) {
    long double sum = 0.0L;
    const long double lam = 0.5L * static_cast<long double>(delta);
    for (int j = 0; j < terms; ++j) {
        const long double logw = -lam + j * std::log(lam) - std::lgamma(static_cast<long double>(j) + 1.0L);
        const long double k = 0.5L * (static_cast<long double>(df) + 2.0L * j);
        const long double logc = (k - 1.0L) * std::log(static_cast<long double>(x)) - 0.5L * x -
                                 k * std::log(2.0L) - std::lgamma(k);
        sum += std::exp(logw + logc);
    }
    return static_cast<double>(sum);
}

Eigen::VectorXd isotonic_projected_gradient(const Eigen::VectorXd& a, const Eigen::VectorXd& w, bool increasing,
                                            double tol) {
    const int n = static_cast<int>(a.size());
    if (n == 1) return a;
    // Constraints g(z) = s (z_i - z_{i+1}) <= 0; dual variables lambda >= 0.
    const double s = increasing ? 1.0 : -1.0;
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n - 1, n);
    for (int i = 0; i < n - 1; ++i) {
        D(i, i) = s;
        D(i, i + 1) = -s;
    }
    const Eigen::VectorXd winv = w.cwiseInverse();
    const Eigen::MatrixXd Q = D * winv.asDiagonal() * D.transpose();
    const Eigen::VectorXd c = D * a;
    // Dual: max_{lambda>=0} -1/2 lambda'Q lambda + c'lambda ... minimized as
    // phi(lambda) = 1/2 lambda'Q lambda - c'lambda; z = a - W^{-1} D' lambda.
    const double L = Q.eigenvalues().real().maxCoeff();
    Eigen::VectorXd lam = Eigen::VectorXd::Zero(n - 1), y = lam;
    double t = 1.0;
    auto primal = [&](const Eigen::VectorXd& l) { return Eigen::VectorXd(a - winv.asDiagonal() * D.transpose() * l); };
    for (long it = 0; it < 5'000'000; ++it) {
        const Eigen::VectorXd grad = Q * y - c;
        Eigen::VectorXd next = (y - grad / L).cwiseMax(0.0);
        // Gradient-based adaptive restart.
        if (grad.dot(next - lam) > 0.0) {
            t = 1.0;
            y = lam;
            next = (lam - (Q * lam - c) / L).cwiseMax(0.0);
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        y = next + ((t - 1.0) / t_next) * (next - lam);
        lam = next;
        t = t_next;
        // Optimality of lambda >= 0 is the fixed point of the projected
        // gradient step; stop when its residual reaches rounding level.
        const Eigen::VectorXd step = lam - (lam - (Q * lam - c) / L).cwiseMax(0.0);
        if (step.cwiseAbs().maxCoeff() <= tol * (1.0 + lam.cwiseAbs().maxCoeff())) return primal(lam);
    }
    return primal(lam);
}

double isotonic_objective(const Eigen::VectorXd& z, const Eigen::VectorXd& a, const Eigen::MatrixXd& M) {
    const Eigen::VectorXd r = z - a;
    return r.dot(M * r);
}

Eigen::VectorXd isotonic_enumerate(const Eigen::VectorXd& a, const Eigen::MatrixXd& M, bool increasing) {
    const int n = static_cast<int>(a.size());
    Eigen::VectorXd best;
    double best_obj = std::numeric_limits<double>::infinity();
    for (std::uint32_t mask = 0; mask < (1u << (n - 1)); ++mask) {
        // Bit i set: z_i = z_{i+1}. Blocks become free parameters b, z = P b.
        std::vector<int> block(n);
        int nb = 0;
        for (int i = 0; i < n; ++i) {
            if (i > 0 && !(mask & (1u << (i - 1)))) ++nb;
            block[i] = nb;
        }
        ++nb;
        Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, nb);
        for (int i = 0; i < n; ++i) P(i, block[i]) = 1.0;
        const Eigen::MatrixXd H = P.transpose() * M * P;
        const Eigen::VectorXd b = H.ldlt().solve(P.transpose() * M * a);
        const Eigen::VectorXd z = P * b;
        bool feasible = true;
        for (int i = 0; i + 1 < n; ++i) {
            const double d = increasing ? z[i] - z[i + 1] : z[i + 1] - z[i];
            if (d > 1e-12) feasible = false;
        }
        if (!feasible) continue;
        const double obj = isotonic_objective(z, a, M);
        if (obj < best_obj) {
            best_obj = obj;
            best = z;
        }
    }
    return best;
}

Eigen::MatrixXd random_spd(int n, std::mt19937_64& rng, double lo, double hi) {
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(lo, hi);
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = g(rng);
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
    const Eigen::MatrixXd Qm = qr.householderQ();
    Eigen::VectorXd ev(n);
    for (int i = 0; i < n; ++i) ev[i] = u(rng);
    Eigen::MatrixXd M = Qm * ev.asDiagonal() * Qm.transpose();
    return 0.5 * (M + M.transpose());
}

std::vector<std::int64_t> multinomial(std::int64_t n, const Eigen::VectorXd& probs, std::mt19937_64& rng) {
    std::vector<std::int64_t> out(static_cast<std::size_t>(probs.size()), 0);
    double remaining_p = probs.sum();
    std::int64_t remaining_n = n;
    for (Eigen::Index k = 0; k < probs.size() && remaining_n > 0; ++k) {
        const double p = remaining_p > 0.0 ? std::min(1.0, probs[k] / remaining_p) : 0.0;
        std::binomial_distribution<std::int64_t> b(remaining_n, p);
        const std::int64_t x = b(rng);
        out[static_cast<std::size_t>(k)] = x;
        remaining_n -= x;
        remaining_p -= probs[k];
    }
    return out;
}

}  // namespace oracle
