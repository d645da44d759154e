#pragma once

#include "isofdr/error.hpp"

namespace isofdr {

/// Degrees of freedom of a t or chi-square distribution.
class Dof {
public:
    explicit Dof(double value) : value_(value) {
        if (!(value > 0.0)) throw DomainError("degrees of freedom must be positive");
    }
    double value() const { return value_; }

private:
    double value_;
};

double normal_pdf(double x);
double normal_cdf(double x);
/// Upper tail 1 - Phi(x), accurate for large x.
double normal_sf(double x);
/// Inverse of normal_cdf on (0, 1); throws DomainError outside.
double normal_quantile(double p);

/// Regularized incomplete beta I_x(a, b). `y` must equal 1 - x; passing it
/// separately keeps precision when x is close to 1.
double incomplete_beta(double a, double b, double x, double y);
double incomplete_beta(double a, double b, double x);

/// Regularized lower/upper incomplete gamma P(a, x) and Q(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

double student_t_cdf(double t, Dof df);
/// P(T > t), computed without cancellation for large t.
double student_t_sf(double t, Dof df);

struct ZValue {
    double z = 0.0;
    bool clamped = false;
};

inline constexpr double kDefaultClampZ = 8.0;

/// z = Phi^{-1}(F_df(t)). Values whose tail probability underflows, or whose
/// magnitude exceeds clamp_z, are clamped to +-clamp_z and flagged.
ZValue z_transform(double t, Dof df, double clamp_z = kDefaultClampZ);

double chisq_pdf(double x, Dof df);
double chisq_cdf(double x, Dof df);
double chisq_sf(double x, Dof df);

/// Noncentral chi-square density as a Poisson(delta/2) mixture of central
/// densities with df + 2j degrees of freedom.
double noncentral_chisq_pdf(double x, Dof df, double delta);
double noncentral_chisq_sf(double x, Dof df, double delta);

}  // namespace isofdr
