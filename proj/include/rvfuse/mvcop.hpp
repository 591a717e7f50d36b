#pragma once

#include <vector>

#include "rvfuse/bicop.hpp"
#include "rvfuse/common.hpp"

namespace rvfuse {

// Exchangeable multivariate Archimedean CDF built from the generator:
// C(u | phi) = Psi^{-1}( sum_l Psi(u_l) ). Supported kinds: Independence,
// Clayton, Frank, Gumbel. Reduces to the bivariate cdf at dimension 2.
double mv_archimedean_cdf(FamilyKind kind, double phi, const std::vector<double>& u);

// Gaussian copula density at u for a full correlation matrix (unit diagonal,
// symmetric positive definite).
double mv_gaussian_copula_pdf(const Matrix& corr, const std::vector<double>& u);

// Student-t copula density (density only; the multivariate t copula CDF has
// no closed form and is not provided).
double mv_student_t_copula_pdf(const Matrix& corr, double nu,
                               const std::vector<double>& u);

// Cholesky factor (lower) of a symmetric positive definite matrix.
Matrix cholesky(const Matrix& a);

}  // namespace rvfuse
