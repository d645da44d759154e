#include "isofdr/stats_numerics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace isofdr {

namespace {

constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kMaxCfIter = 10000;

void require_nonneg(double x) {
    if (!(x >= 0.0)) throw DomainError("chi-square argument must be nonnegative");
}

// Lentz evaluation of the incomplete beta continued fraction.
double beta_cf(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxCfIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) return h;
    }
    throw Error("incomplete beta continued fraction did not converge");
}

double gamma_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < kMaxCfIter; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * kEps) {
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw Error("incomplete gamma series did not converge");
}

double gamma_cf(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxCfIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) {
            return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
        }
    }
    throw Error("incomplete gamma continued fraction did not converge");
}

// Lower-tail normal quantile for p <= 0.5 (rational approximation + Halley step).
double normal_quantile_lower(double p) {
    static constexpr std::array<double, 6> a{-3.969683028665376e+01, 2.209460984245205e+02,
                                             -2.759285104469687e+02, 1.383577518672690e+02,
                                             -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr std::array<double, 5> b{-5.447609879822406e+01, 1.615858368580409e+02,
                                             -1.556989798598866e+02, 6.680131188771972e+01,
                                             -1.328068155288572e+01};
    static constexpr std::array<double, 6> c{-7.784894002430293e-03, -3.223964580411365e-01,
                                             -2.400758277161838e+00, -2.549732539343734e+00,
                                             4.374664141464968e+00, 2.938163982698783e+00};
    static constexpr std::array<double, 4> d{7.784695709041462e-03, 3.224671290700398e-01,
                                             2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    // Halley refinement; relative residual keeps precision deep in the tail.
    for (int iter = 0; iter < 2; ++iter) {
        const double pdf = normal_pdf(x);
        if (pdf <= 0.0) break;
        const double e = normal_cdf(x) - p;
        const double u = e / pdf;
        x -= u / (1.0 + 0.5 * x * u);
    }
    return x;
}

}  // namespace

double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("normal quantile requires 0 < p < 1");
    if (p == 0.5) return 0.0;
    if (p < 0.5) return normal_quantile_lower(p);
    return -normal_quantile_lower(1.0 - p);
}

double incomplete_beta(double a, double b, double x, double y) {
    if (!(a > 0.0 && b > 0.0)) throw DomainError("incomplete beta requires a, b > 0");
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("incomplete beta requires 0 <= x <= 1");
    if (x == 0.0) return 0.0;
    if (y == 0.0) return 1.0;
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                             a * std::log(x) + b * std::log(y);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, y) / b;
}

double incomplete_beta(double a, double b, double x) { return incomplete_beta(a, b, x, 1.0 - x); }

double gamma_p(double a, double x) {
    if (!(a > 0.0)) throw DomainError("incomplete gamma requires a > 0");
    if (!(x >= 0.0)) throw DomainError("incomplete gamma requires x >= 0");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_series(a, x);
    return 1.0 - gamma_cf(a, x);
}

double gamma_q(double a, double x) {
    if (!(a > 0.0)) throw DomainError("incomplete gamma requires a > 0");
    if (!(x >= 0.0)) throw DomainError("incomplete gamma requires x >= 0");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_series(a, x);
    return gamma_cf(a, x);
}

double student_t_sf(double t, Dof df) {
    const double nu = df.value();
    if (std::isnan(t)) throw DomainError("t statistic is NaN");
    if (t == 0.0) return 0.5;
    const double t2 = t * t;
    // x = nu / (nu + t^2), y = t^2 / (nu + t^2) computed directly.
    const double x = nu / (nu + t2);
    const double y = t2 / (nu + t2);
    const double tail = 0.5 * incomplete_beta(0.5 * nu, 0.5, x, y);
    return t > 0.0 ? tail : 1.0 - tail;
}

double student_t_cdf(double t, Dof df) {
    if (t == 0.0) return 0.5;
    if (t < 0.0) return student_t_sf(-t, df);
    return 1.0 - student_t_sf(t, df);
}

ZValue z_transform(double t, Dof df, double clamp_z) {
    if (!std::isfinite(t)) throw DomainError("t statistic must be finite");
    if (t == 0.0) return {0.0, false};
    const double tail = student_t_sf(std::abs(t), df);
    const double sign = t > 0.0 ? 1.0 : -1.0;
    if (!(tail > std::numeric_limits<double>::min())) return {sign * clamp_z, true};
    const double z = -normal_quantile(tail);
    if (z > clamp_z) return {sign * clamp_z, true};
    return {sign * z, false};
}

double chisq_pdf(double x, Dof df) {
    require_nonneg(x);
    const double a = 0.5 * df.value();
    if (x == 0.0) {
        if (a < 1.0) return std::numeric_limits<double>::infinity();
        return a == 1.0 ? 0.5 : 0.0;
    }
    return 0.5 * std::exp((a - 1.0) * std::log(0.5 * x) - 0.5 * x - std::lgamma(a));
}

double chisq_cdf(double x, Dof df) {
    require_nonneg(x);
    return gamma_p(0.5 * df.value(), 0.5 * x);
}

double chisq_sf(double x, Dof df) {
    require_nonneg(x);
    return gamma_q(0.5 * df.value(), 0.5 * x);
}

double noncentral_chisq_pdf(double x, Dof df, double delta) {
    require_nonneg(x);
    if (!(delta >= 0.0)) throw DomainError("noncentrality must be nonnegative");
    if (delta == 0.0) return chisq_pdf(x, df);
    const double lambda = 0.5 * delta;
    const double log_lambda = std::log(lambda);
    double sum = 0.0;
    for (int j = 0; j < 1'000'000; ++j) {
        const double log_w = -lambda + j * log_lambda - std::lgamma(j + 1.0);
        const double term = std::exp(log_w) * chisq_pdf(x, Dof(df.value() + 2.0 * j));
        sum += term;
        if (j > lambda && term < 1e-14 * sum) break;
    }
    return sum;
}

double noncentral_chisq_sf(double x, Dof df, double delta) {
    require_nonneg(x);
    if (!(delta >= 0.0)) throw DomainError("noncentrality must be nonnegative");
    if (delta == 0.0) return chisq_sf(x, df);
    const double lambda = 0.5 * delta;
    const double log_lambda = std::log(lambda);
    double sum = 0.0;
    for (int j = 0; j < 1'000'000; ++j) {
        const double w = std::exp(-lambda + j * log_lambda - std::lgamma(j + 1.0));
        sum += w * chisq_sf(x, Dof(df.value() + 2.0 * j));
        // Remaining Poisson mass bounds the neglected terms since each sf <= 1.
        if (j + 1.0 > lambda) {
            const double remaining = w * lambda / (j + 1.0 - lambda);
            if (remaining < 1e-12 * sum) break;
        }
    }
    return sum;
}

}  // namespace isofdr
