#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

namespace rvfuse::math {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// ---------------------------------------------------------------------------
// Standard normal
// ---------------------------------------------------------------------------

inline double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

// Upper tail P(Z > x).
inline double norm_sf(double x) { return 0.5 * std::erfc(x / kSqrt2); }

// Inverse standard normal CDF (Wichura's AS241, double precision).
double norm_quantile(double p);

// Inverse of the complementary CDF Q^{-1}(p) = norm_quantile(1 - p).
inline double norm_sf_inv(double p) { return -norm_quantile(p); }

// ---------------------------------------------------------------------------
// Student-t
// ---------------------------------------------------------------------------

// Regularized incomplete beta I_x(a, b) via continued fraction.
double inc_beta(double a, double b, double x);

double t_pdf(double x, double nu);
double t_cdf(double x, double nu);
double t_quantile(double p, double nu);
inline double t_logpdf(double x, double nu) {
    return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu)
         - 0.5 * std::log(nu * kPi) - 0.5 * (nu + 1.0) * std::log1p(x * x / nu);
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

// Nodes/weights of the 24-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendre24 {
    static const double nodes[24];
    static const double weights[24];
};

// Integrates f over [a, b] with a fixed composite GL24 rule (`panels` panels).
double integrate_gl(const std::function<double(double)>& f, double a, double b,
                    int panels = 8);

// ---------------------------------------------------------------------------
// Debye function D1, used by the Frank copula tau link.
// ---------------------------------------------------------------------------
double debye1(double x);

// ---------------------------------------------------------------------------
// Root finding / scalar optimization
// ---------------------------------------------------------------------------

// Brent root find on [a, b]; f(a) and f(b) must bracket a root.
double brent_root(const std::function<double(double)>& f, double a, double b,
                  double tol = 1e-12, int max_iter = 200);

// Golden-section minimization of f on [a, b]; returns (x_min, f(x_min)).
std::pair<double, double> golden_min(const std::function<double(double)>& f,
                                     double a, double b, double tol = 1e-9,
                                     int max_iter = 200);

// ---------------------------------------------------------------------------
// Distribution test helpers
// ---------------------------------------------------------------------------

// Asymptotic Kolmogorov-Smirnov p-value for statistic d with sample size n.
double ks_pvalue(double d, std::size_t n);

// One-sample KS distance of `sample` from Uniform(0,1).
double ks_uniform_statistic(std::vector<double> sample);

// Anderson-Darling A^2 against a fully specified N(mu, sigma^2).
double anderson_darling_normal(std::vector<double> sample, double mu, double sigma);

}  // namespace rvfuse::math
