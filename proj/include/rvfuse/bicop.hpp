#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "rvfuse/common.hpp"

namespace rvfuse {

enum class FamilyKind { Independence, Gaussian, StudentT, Clayton, Gumbel, Frank, Joe };

// Model-selection criterion for pair-copula (and edge) selection.
enum class Criterion { AIC, BIC, MLE };

Criterion parse_criterion(const std::string& s);
std::string criterion_name(Criterion c);

struct CopulaFamily {
    FamilyKind kind = FamilyKind::Independence;
    int rotation = 0;  // 0, 90, 180, 270; nonzero only for Clayton/Gumbel/Joe

    bool operator==(const CopulaFamily&) const = default;
};

struct CopulaParams {
    double phi = 0.0;  // Archimedean dependence parameter
    double rho = 0.0;  // elliptical correlation
    double nu = 0.0;   // StudentT degrees of freedom (>= 3)
};

// A parametric pair copula: family plus parameters. Immutable and cheap to
// copy; all evaluations are pure.
class BivariateCopula {
public:
    BivariateCopula() = default;  // independence
    BivariateCopula(CopulaFamily family, CopulaParams params);

    static BivariateCopula independence() { return BivariateCopula(); }

    const CopulaFamily& family() const { return family_; }
    const CopulaParams& params() const { return params_; }
    int n_params() const;

    // C(u, v). Exact on the boundary (uniform margins, zero at the axes).
    double cdf(double u, double v) const;

    // Copula density c(u, v); boundary inputs are clamped interior.
    double pdf(double u, double v) const { return std::exp(log_pdf(u, v)); }
    double log_pdf(double u, double v) const;

    // h-functions: hfunc1(u, v) = P(U <= u | V = v) = dC/dv,
    //              hfunc2(u, v) = P(V <= v | U = u) = dC/du.
    double hfunc1(double u, double v) const;
    double hfunc2(double u, double v) const;

    // Inverses: hinv1(w, v) solves hfunc1(u, v) = w for u;
    //           hinv2(w, u) solves hfunc2(u, v) = w for v.
    double hinv1(double w, double v) const;
    double hinv2(double w, double u) const;

    // Population Kendall's tau.
    double tau() const;

    // Equivalent copula with the two coordinates swapped (90 <-> 270).
    BivariateCopula swapped() const;

    // Serialization code, e.g. "clayton@90", "gauss", "t".
    std::string code() const;

private:
    CopulaFamily family_;
    CopulaParams params_;
};

std::string family_code(const CopulaFamily& f);
CopulaFamily parse_family_code(const std::string& code);

// Canonical tie-break order: family kind first (Independence, Gaussian,
// StudentT, Clayton, Gumbel, Frank, Joe), then rotation ascending.
int family_order_key(const CopulaFamily& f);

// Parameter for a family whose population tau equals `tau`, clamped into the
// fitting domain. Elliptical families fill rho, Archimedean fill phi.
CopulaParams params_from_tau(const CopulaFamily& family, double tau);

struct FitResult {
    BivariateCopula copula;
    double loglik = 0.0;
    double aic = 0.0;  // -loglik + 2 q
    double bic = 0.0;  // -loglik + q log N
    std::size_t n = 0;
};

// Maximum-likelihood fit of one family to pseudo-observation pairs.
FitResult fit_mle(const CopulaFamily& family, const std::vector<double>& u,
                  const std::vector<double>& v);

// Fits every candidate and returns the winner under `criterion`. Ties go to
// the earliest candidate in canonical order.
FitResult select_best(const std::vector<double>& u, const std::vector<double>& v,
                      std::vector<CopulaFamily> candidates, Criterion criterion);

// Default copula library: all seven families plus the 90/180/270 rotations of
// Clayton, Gumbel and Joe.
std::vector<CopulaFamily> default_family_library();
std::vector<CopulaFamily> parse_family_list(const std::string& comma_separated);

}  // namespace rvfuse
