#include "rvfuse/mvcop.hpp"

#include <cmath>

#include "rvfuse/math.hpp"

namespace rvfuse {

double mv_archimedean_cdf(FamilyKind kind, double phi, const std::vector<double>& u) {
    const std::size_t d = u.size();
    if (d < 2) throw domain_error("mv_archimedean_cdf: dimension must be >= 2");
    for (double x : u) {
        if (x <= 0.0) return 0.0;
    }
    switch (kind) {
        case FamilyKind::Independence: {
            double p = 1.0;
            for (double x : u) p *= std::min(x, 1.0);
            return p;
        }
        case FamilyKind::Clayton: {
            if (!(phi > 0.0)) throw domain_error("mv Clayton requires phi > 0");
            // Psi(t) = (t^-phi - 1)/phi, so C = (sum u^-phi - d + 1)^(-1/phi).
            double s = 0.0;
            for (double x : u) s += std::expm1(-phi * std::log(std::min(x, 1.0)));
            return std::exp(-std::log1p(s) / phi);
        }
        case FamilyKind::Gumbel: {
            if (!(phi >= 1.0)) throw domain_error("mv Gumbel requires phi >= 1");
            double s = 0.0;
            for (double x : u) s += std::pow(-std::log(std::min(x, 1.0)), phi);
            return std::exp(-std::pow(s, 1.0 / phi));
        }
        case FamilyKind::Frank: {
            if (phi == 0.0) throw domain_error("mv Frank requires phi != 0");
            // C = -(1/phi) log(1 + prod(e^{-phi u_l} - 1) / (e^{-phi} - 1)^{d-1}).
            const double g1 = std::expm1(-phi);
            double prod = 1.0;
            for (double x : u) prod *= std::expm1(-phi * std::min(x, 1.0));
            double ratio = prod;
            for (std::size_t k = 1; k < d; ++k) ratio /= g1;
            return -std::log1p(ratio) / phi;
        }
        default:
            throw domain_error("mv_archimedean_cdf: unsupported family");
    }
}

Matrix cholesky(const Matrix& a) {
    const std::size_t d = a.rows();
    if (a.cols() != d) throw domain_error("cholesky: matrix not square");
    Matrix l(d, d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            if (i == j) {
                if (!(s > 0.0)) throw domain_error("cholesky: matrix not positive definite");
                l(i, i) = std::sqrt(s);
            } else {
                l(i, j) = s / l(j, j);
            }
        }
    }
    return l;
}

namespace {

// Solves L y = x for lower-triangular L.
std::vector<double> forward_solve(const Matrix& l, const std::vector<double>& x) {
    const std::size_t d = x.size();
    std::vector<double> y(d);
    for (std::size_t i = 0; i < d; ++i) {
        double s = x[i];
        for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
        y[i] = s / l(i, i);
    }
    return y;
}

void check_corr(const Matrix& corr, std::size_t d) {
    if (corr.rows() != d || corr.cols() != d)
        throw domain_error("copula pdf: correlation matrix dimension mismatch");
    for (std::size_t i = 0; i < d; ++i) {
        if (std::fabs(corr(i, i) - 1.0) > 1e-12)
            throw domain_error("copula pdf: correlation matrix must have unit diagonal");
        for (std::size_t j = 0; j < i; ++j) {
            if (std::fabs(corr(i, j) - corr(j, i)) > 1e-12)
                throw domain_error("copula pdf: correlation matrix must be symmetric");
        }
    }
}

}  // namespace

double mv_gaussian_copula_pdf(const Matrix& corr, const std::vector<double>& u) {
    const std::size_t d = u.size();
    check_corr(corr, d);
    const Matrix l = cholesky(corr);
    std::vector<double> x(d);
    for (std::size_t i = 0; i < d; ++i) x[i] = math::norm_quantile(clamp_unit(u[i]));
    const std::vector<double> y = forward_solve(l, x);
    double log_det = 0.0, q = 0.0, x2 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        log_det += 2.0 * std::log(l(i, i));
        q += y[i] * y[i];
        x2 += x[i] * x[i];
    }
    return std::exp(-0.5 * log_det - 0.5 * (q - x2));
}

double mv_student_t_copula_pdf(const Matrix& corr, double nu,
                               const std::vector<double>& u) {
    const std::size_t d = u.size();
    check_corr(corr, d);
    if (!(nu >= 3.0)) throw domain_error("t copula requires nu >= 3");
    const Matrix l = cholesky(corr);
    std::vector<double> x(d);
    for (std::size_t i = 0; i < d; ++i) x[i] = math::t_quantile(clamp_unit(u[i]), nu);
    const std::vector<double> y = forward_solve(l, x);
    double log_det = 0.0, q = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        log_det += 2.0 * std::log(l(i, i));
        q += y[i] * y[i];
    }
    const double dd = static_cast<double>(d);
    double log_c = std::lgamma(0.5 * (nu + dd)) + (dd - 1.0) * std::lgamma(0.5 * nu) -
                   dd * std::lgamma(0.5 * (nu + 1.0)) - 0.5 * log_det -
                   0.5 * (nu + dd) * std::log1p(q / nu);
    for (std::size_t i = 0; i < d; ++i)
        log_c += 0.5 * (nu + 1.0) * std::log1p(x[i] * x[i] / nu);
    return std::exp(log_c);
}

}  // namespace rvfuse
