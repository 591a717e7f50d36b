#include "rvfuse/bicop.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rvfuse/detail/kendall.hpp"
#include "rvfuse/math.hpp"

namespace rvfuse {

namespace {

using math::norm_cdf;
using math::norm_quantile;
using math::t_cdf;
using math::t_quantile;

bool rotatable(FamilyKind k) {
    return k == FamilyKind::Clayton || k == FamilyKind::Gumbel || k == FamilyKind::Joe;
}

void validate(const CopulaFamily& f, const CopulaParams& p) {
    if (f.rotation != 0 && f.rotation != 90 && f.rotation != 180 && f.rotation != 270)
        throw domain_error("copula rotation must be 0/90/180/270");
    if (f.rotation != 0 && !rotatable(f.kind))
        throw domain_error("rotation only supported for Clayton/Gumbel/Joe");
    switch (f.kind) {
        case FamilyKind::Independence:
            break;
        case FamilyKind::Gaussian:
            if (!(p.rho > -1.0 && p.rho < 1.0))
                throw domain_error("Gaussian copula requires rho in (-1,1)");
            break;
        case FamilyKind::StudentT:
            if (!(p.rho > -1.0 && p.rho < 1.0))
                throw domain_error("StudentT copula requires rho in (-1,1)");
            if (!(p.nu >= 3.0))
                throw domain_error("StudentT copula requires nu >= 3");
            break;
        case FamilyKind::Clayton:
            if (!(p.phi > 0.0))
                throw domain_error("Clayton copula requires phi > 0 (use rotations for negative dependence)");
            break;
        case FamilyKind::Gumbel:
            if (!(p.phi >= 1.0)) throw domain_error("Gumbel copula requires phi >= 1");
            break;
        case FamilyKind::Frank:
            if (p.phi == 0.0) throw domain_error("Frank copula requires phi != 0");
            break;
        case FamilyKind::Joe:
            if (!(p.phi > 1.0)) throw domain_error("Joe copula requires phi > 1");
            break;
    }
}

// ---------------------------------------------------------------------------
// Base-family (rotation 0) evaluations. u, v are interior.
// ---------------------------------------------------------------------------

// --- Clayton ---
double clayton_cdf(double u, double v, double phi) {
    const double eu = std::expm1(-phi * std::log(u));
    const double ev = std::expm1(-phi * std::log(v));
    const double ln_s = std::log1p(eu + ev);  // log(u^-phi + v^-phi - 1)
    return std::exp(-ln_s / phi);
}

double clayton_logpdf(double u, double v, double phi) {
    const double eu = std::expm1(-phi * std::log(u));
    const double ev = std::expm1(-phi * std::log(v));
    const double ln_s = std::log1p(eu + ev);
    return std::log1p(phi) - (phi + 1.0) * (std::log(u) + std::log(v)) -
           (1.0 / phi + 2.0) * ln_s;
}

double clayton_h1(double u, double v, double phi) {
    // dC/dv = v^{-phi-1} (u^-phi + v^-phi - 1)^{-1/phi - 1}
    const double eu = std::expm1(-phi * std::log(u));
    const double ev = std::expm1(-phi * std::log(v));
    const double ln_s = std::log1p(eu + ev);
    return std::exp(-(phi + 1.0) * std::log(v) - (1.0 / phi + 1.0) * ln_s);
}

double clayton_hinv1(double w, double v, double phi) {
    // Closed form, arranged cancellation-free:
    // u^-phi - 1 = v^-phi (w^{-phi/(phi+1)} - 1).
    const double a = std::exp(-phi * std::log(v));                  // v^-phi
    const double b = std::expm1(-phi / (phi + 1.0) * std::log(w));  // >= 0
    const double t = a * b;                                         // u^-phi - 1
    if (!(t > 0.0)) return 1.0 - kUnitEps;
    return std::exp(-std::log1p(t) / phi);
}

// --- Gumbel ---
double gumbel_cdf(double u, double v, double phi) {
    const double x = -std::log(u), y = -std::log(v);
    const double s = std::pow(x, phi) + std::pow(y, phi);
    return std::exp(-std::pow(s, 1.0 / phi));
}

double gumbel_logpdf(double u, double v, double phi) {
    const double x = -std::log(u), y = -std::log(v);
    const double s = std::pow(x, phi) + std::pow(y, phi);
    const double r = std::pow(s, 1.0 / phi);
    return -r + x + y + (2.0 / phi - 2.0) * std::log(s) +
           (phi - 1.0) * (std::log(x) + std::log(y)) + std::log1p((phi - 1.0) / r);
}

double gumbel_h1(double u, double v, double phi) {
    const double x = -std::log(u), y = -std::log(v);
    const double s = std::pow(x, phi) + std::pow(y, phi);
    const double r = std::pow(s, 1.0 / phi);
    return std::exp(-r + (phi - 1.0) * (std::log(y) - std::log(r)) + y);
}

double gumbel_hinv1(double w, double v, double phi) {
    // Solve g(r) = r + (phi-1) log r = y + (phi-1) log y - log w, r >= y,
    // then x^phi = r^phi - y^phi and u = exp(-x).
    const double y = -std::log(v);
    const double target = y + (phi - 1.0) * std::log(y) - std::log(w);
    auto g = [phi](double r) { return r + (phi - 1.0) * std::log(r); };
    double hi = std::max(2.0 * y, 1.0);
    int guard = 0;
    while (g(hi) < target && guard++ < 200) hi *= 2.0;
    const double r = math::brent_root([&](double rr) { return g(rr) - target; }, y, hi,
                                      1e-14);
    const double ratio = phi * (std::log(r) - std::log(y));
    const double xpow = std::pow(y, phi) * std::expm1(ratio);  // r^phi - y^phi
    if (!(xpow > 0.0)) return 1.0 - kUnitEps;
    const double x = std::pow(xpow, 1.0 / phi);
    double u = std::exp(-x);
    // Newton polish on h1(u|v) = w; dh1/du is the copula density.
    for (int it = 0; it < 2; ++it) {
        const double f = gumbel_h1(u, v, phi) - w;
        const double dens = std::exp(gumbel_logpdf(u, v, phi));
        if (!(dens > 0.0)) break;
        const double un = u - f / dens;
        if (!(un > 0.0 && un < 1.0)) break;
        u = un;
    }
    return u;
}

// --- Frank ---
double frank_cdf(double u, double v, double phi) {
    const double gu = std::expm1(-phi * u);
    const double gv = std::expm1(-phi * v);
    const double g1 = std::expm1(-phi);
    return -std::log1p(gu * gv / g1) / phi;
}

double frank_logpdf(double u, double v, double phi) {
    const double gu = std::expm1(-phi * u);
    const double gv = std::expm1(-phi * v);
    const double g1 = std::expm1(-phi);
    const double den = g1 + gu * gv;  // same sign as g1
    return std::log(std::fabs(phi)) + std::log(std::fabs(g1)) - phi * (u + v) -
           2.0 * std::log(std::fabs(den));
}

double frank_h1(double u, double v, double phi) {
    const double gu = std::expm1(-phi * u);
    const double gv = std::expm1(-phi * v);
    const double g1 = std::expm1(-phi);
    return gu * (1.0 + gv) / (g1 + gu * gv);
}

double frank_hinv1(double w, double v, double phi) {
    const double gv = std::expm1(-phi * v);
    const double g1 = std::expm1(-phi);
    const double gu = w * g1 / (1.0 + gv * (1.0 - w));
    return -std::log1p(gu) / phi;
}

// --- Joe ---
// With x = (1-u)^phi and y = (1-v)^phi, S = x + y - x y satisfies
// S >= max(x, y), so the direct expression is relatively accurate in all
// corners.
double joe_ln_s(double u, double v, double phi) {
    const double x = std::exp(phi * std::log1p(-u));
    const double y = std::exp(phi * std::log1p(-v));
    return std::log(x + y - x * y);
}

double joe_cdf(double u, double v, double phi) {
    return -std::expm1(joe_ln_s(u, v, phi) / phi);
}

double joe_logpdf(double u, double v, double phi) {
    const double lxb = std::log1p(-u);  // log(1-u)
    const double lyb = std::log1p(-v);
    const double ln_s = joe_ln_s(u, v, phi);
    const double s = std::exp(ln_s);
    return (1.0 / phi - 2.0) * ln_s + (phi - 1.0) * (lxb + lyb) +
           std::log(phi - 1.0 + s);
}

double joe_h1(double u, double v, double phi) {
    const double lyb = std::log1p(-v);
    const double ax = -std::expm1(phi * std::log1p(-u));  // 1 - (1-u)^phi
    const double ln_s = joe_ln_s(u, v, phi);
    return std::exp((phi - 1.0) * lyb + std::log(ax) + (1.0 / phi - 1.0) * ln_s);
}

double joe_hinv1(double w, double v, double phi) {
    // Monotone in u; solve log h1(u) = log w by bracketed root find.
    const double lw = std::log(w);
    auto g = [&](double u) { return std::log(joe_h1(u, v, phi)) - lw; };
    const double lo = kUnitEps;
    const double hi = 1.0 - kUnitEps;
    if (g(lo) >= 0.0) return lo;
    if (g(hi) <= 0.0) return hi;
    return math::brent_root(g, lo, hi, 1e-13);
}

// --- Gaussian ---
int gauss_panels(double rho) {
    const double a = std::fabs(rho);
    if (a <= 0.8) return 4;
    if (a <= 0.95) return 8;
    return 16;
}

double gauss_cdf(double u, double v, double rho) {
    const double a = norm_quantile(u);
    const double b = norm_quantile(v);
    const double base = u * v;
    if (rho == 0.0) return base;
    const double integral = math::integrate_gl(
        [a, b](double r) {
            const double o = 1.0 - r * r;
            return std::exp(-(a * a - 2.0 * r * a * b + b * b) / (2.0 * o)) /
                   std::sqrt(o);
        },
        std::min(0.0, rho), std::max(0.0, rho), gauss_panels(rho));
    return base + ((rho > 0.0) ? 1.0 : -1.0) * integral / (2.0 * math::kPi);
}

double gauss_logpdf(double u, double v, double rho) {
    const double a = norm_quantile(u);
    const double b = norm_quantile(v);
    const double o = 1.0 - rho * rho;
    return -0.5 * std::log(o) -
           (rho * rho * (a * a + b * b) - 2.0 * rho * a * b) / (2.0 * o);
}

double gauss_h1(double u, double v, double rho) {
    const double a = norm_quantile(u);
    const double b = norm_quantile(v);
    return norm_cdf((a - rho * b) / std::sqrt(1.0 - rho * rho));
}

double gauss_hinv1(double w, double v, double rho) {
    const double b = norm_quantile(v);
    return norm_cdf(norm_quantile(w) * std::sqrt(1.0 - rho * rho) + rho * b);
}

// --- Student-t ---
int t_panels(double rho) {
    const double a = std::fabs(rho);
    if (a <= 0.8) return 8;
    if (a <= 0.95) return 12;
    return 20;
}

double t_h1_quantiles(double a, double b, double rho, double nu) {
    const double scale = std::sqrt((1.0 - rho * rho) * (nu + b * b) / (nu + 1.0));
    return t_cdf((a - rho * b) / scale, nu + 1.0);
}

double t_copula_cdf(double u, double v, double rho, double nu) {
    const double b = t_quantile(v, nu);
    // C(u,v) = int_0^u P(V <= v | U = s) ds, conditional is a scaled t_{nu+1}.
    const double integral = math::integrate_gl(
        [&](double s) {
            const double a = t_quantile(s, nu);
            return t_h1_quantiles(b, a, rho, nu);
        },
        0.0, u, t_panels(rho));
    return integral;
}

double t_logpdf(double u, double v, double rho, double nu) {
    const double a = t_quantile(u, nu);
    const double b = t_quantile(v, nu);
    const double o = 1.0 - rho * rho;
    return std::lgamma(0.5 * (nu + 2.0)) + std::lgamma(0.5 * nu) -
           2.0 * std::lgamma(0.5 * (nu + 1.0)) - 0.5 * std::log(o) -
           0.5 * (nu + 2.0) * std::log1p((a * a - 2.0 * rho * a * b + b * b) / (nu * o)) +
           0.5 * (nu + 1.0) * (std::log1p(a * a / nu) + std::log1p(b * b / nu));
}

double t_h1(double u, double v, double rho, double nu) {
    const double a = t_quantile(u, nu);
    const double b = t_quantile(v, nu);
    return t_h1_quantiles(a, b, rho, nu);
}

double t_hinv1(double w, double v, double rho, double nu) {
    const double b = t_quantile(v, nu);
    const double scale = std::sqrt((1.0 - rho * rho) * (nu + b * b) / (nu + 1.0));
    return t_cdf(t_quantile(w, nu + 1.0) * scale + rho * b, nu);
}

// Kendall's tau for Joe as a series; converges for phi > 1.
double joe_tau(double phi) {
    double sum = 0.0;
    for (int k = 1; k <= 20000; ++k) {
        const double term = 1.0 / (k * (2.0 + k * phi) * (phi * (k - 1.0) + 2.0));
        sum += term;
        if (term < 1e-16 * (1.0 + sum)) break;
    }
    return 1.0 - 4.0 * sum;
}

double frank_tau(double phi) {
    return 1.0 - 4.0 / phi * (1.0 - math::debye1(phi));
}

}  // namespace

// ---------------------------------------------------------------------------
// BivariateCopula
// ---------------------------------------------------------------------------

BivariateCopula::BivariateCopula(CopulaFamily family, CopulaParams params)
    : family_(family), params_(params) {
    validate(family_, params_);
}

int BivariateCopula::n_params() const {
    switch (family_.kind) {
        case FamilyKind::Independence: return 0;
        case FamilyKind::StudentT: return 2;
        default: return 1;
    }
}

namespace {

// Dispatch helpers on the base (rotation 0) family.
double base_cdf(const CopulaFamily& f, const CopulaParams& p, double u, double v) {
    switch (f.kind) {
        case FamilyKind::Independence: return u * v;
        case FamilyKind::Gaussian: return gauss_cdf(u, v, p.rho);
        case FamilyKind::StudentT: return t_copula_cdf(u, v, p.rho, p.nu);
        case FamilyKind::Clayton: return clayton_cdf(u, v, p.phi);
        case FamilyKind::Gumbel: return gumbel_cdf(u, v, p.phi);
        case FamilyKind::Frank: return frank_cdf(u, v, p.phi);
        case FamilyKind::Joe: return joe_cdf(u, v, p.phi);
    }
    return u * v;
}

double base_logpdf(const CopulaFamily& f, const CopulaParams& p, double u, double v) {
    switch (f.kind) {
        case FamilyKind::Independence: return 0.0;
        case FamilyKind::Gaussian: return gauss_logpdf(u, v, p.rho);
        case FamilyKind::StudentT: return t_logpdf(u, v, p.rho, p.nu);
        case FamilyKind::Clayton: return clayton_logpdf(u, v, p.phi);
        case FamilyKind::Gumbel: return gumbel_logpdf(u, v, p.phi);
        case FamilyKind::Frank: return frank_logpdf(u, v, p.phi);
        case FamilyKind::Joe: return joe_logpdf(u, v, p.phi);
    }
    return 0.0;
}

double base_h1(const CopulaFamily& f, const CopulaParams& p, double u, double v) {
    switch (f.kind) {
        case FamilyKind::Independence: return u;
        case FamilyKind::Gaussian: return gauss_h1(u, v, p.rho);
        case FamilyKind::StudentT: return t_h1(u, v, p.rho, p.nu);
        case FamilyKind::Clayton: return clayton_h1(u, v, p.phi);
        case FamilyKind::Gumbel: return gumbel_h1(u, v, p.phi);
        case FamilyKind::Frank: return frank_h1(u, v, p.phi);
        case FamilyKind::Joe: return joe_h1(u, v, p.phi);
    }
    return u;
}

double base_hinv1(const CopulaFamily& f, const CopulaParams& p, double w, double v) {
    switch (f.kind) {
        case FamilyKind::Independence: return w;
        case FamilyKind::Gaussian: return gauss_hinv1(w, v, p.rho);
        case FamilyKind::StudentT: return t_hinv1(w, v, p.rho, p.nu);
        case FamilyKind::Clayton: return clayton_hinv1(w, v, p.phi);
        case FamilyKind::Gumbel: return gumbel_hinv1(w, v, p.phi);
        case FamilyKind::Frank: return frank_hinv1(w, v, p.phi);
        case FamilyKind::Joe: return joe_hinv1(w, v, p.phi);
    }
    return w;
}

}  // namespace

double BivariateCopula::cdf(double u, double v) const {
    // Exact boundary behaviour before any clamping.
    if (u <= 0.0 || v <= 0.0) return 0.0;
    if (u >= 1.0 && v >= 1.0) return 1.0;
    if (u >= 1.0) return v;
    if (v >= 1.0) return u;
    u = clamp_unit(u);
    v = clamp_unit(v);
    double c;
    switch (family_.rotation) {
        case 0: c = base_cdf(family_, params_, u, v); break;
        case 90: c = v - base_cdf(family_, params_, 1.0 - u, v); break;
        case 180: c = u + v - 1.0 + base_cdf(family_, params_, 1.0 - u, 1.0 - v); break;
        default: c = u - base_cdf(family_, params_, u, 1.0 - v); break;
    }
    // Project onto the Frechet-Hoeffding band to absorb quadrature noise.
    const double lo = std::max(u + v - 1.0, 0.0);
    const double hi = std::min(u, v);
    return std::min(hi, std::max(lo, c));
}

double BivariateCopula::log_pdf(double u, double v) const {
    u = clamp_unit(u);
    v = clamp_unit(v);
    switch (family_.rotation) {
        case 0: return base_logpdf(family_, params_, u, v);
        case 90: return base_logpdf(family_, params_, 1.0 - u, v);
        case 180: return base_logpdf(family_, params_, 1.0 - u, 1.0 - v);
        default: return base_logpdf(family_, params_, u, 1.0 - v);
    }
}

double BivariateCopula::hfunc1(double u, double v) const {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    u = clamp_unit(u);
    v = clamp_unit(v);
    double h;
    switch (family_.rotation) {
        case 0: h = base_h1(family_, params_, u, v); break;
        case 90: h = 1.0 - base_h1(family_, params_, 1.0 - u, v); break;
        case 180: h = 1.0 - base_h1(family_, params_, 1.0 - u, 1.0 - v); break;
        default: h = base_h1(family_, params_, u, 1.0 - v); break;
    }
    return clamp01(h);
}

double BivariateCopula::hfunc2(double u, double v) const {
    return swapped().hfunc1(v, u);
}

double BivariateCopula::hinv1(double w, double v) const {
    if (w <= 0.0) return 0.0;
    if (w >= 1.0) return 1.0;
    // w is a probability level, not a copula argument: do not clamp it to the
    // coarse interior band or extreme inversions lose all accuracy.
    v = clamp_unit(v);
    double u;
    switch (family_.rotation) {
        case 0: u = base_hinv1(family_, params_, w, v); break;
        case 90: u = 1.0 - base_hinv1(family_, params_, 1.0 - w, v); break;
        case 180: u = 1.0 - base_hinv1(family_, params_, 1.0 - w, 1.0 - v); break;
        default: u = base_hinv1(family_, params_, w, 1.0 - v); break;
    }
    return clamp_unit(clamp01(u));
}

double BivariateCopula::hinv2(double w, double u) const {
    return swapped().hinv1(w, u);
}

BivariateCopula BivariateCopula::swapped() const {
    CopulaFamily f = family_;
    if (f.rotation == 90) f.rotation = 270;
    else if (f.rotation == 270) f.rotation = 90;
    return BivariateCopula(f, params_);
}

double BivariateCopula::tau() const {
    double t;
    switch (family_.kind) {
        case FamilyKind::Independence: return 0.0;
        case FamilyKind::Gaussian:
        case FamilyKind::StudentT:
            return 2.0 / math::kPi * std::asin(params_.rho);
        case FamilyKind::Clayton: t = params_.phi / (params_.phi + 2.0); break;
        case FamilyKind::Gumbel: t = 1.0 - 1.0 / params_.phi; break;
        case FamilyKind::Frank: return frank_tau(params_.phi);
        case FamilyKind::Joe: t = joe_tau(params_.phi); break;
        default: t = 0.0; break;
    }
    if (family_.rotation == 90 || family_.rotation == 270) return -t;
    return t;
}

// ---------------------------------------------------------------------------
// Codes / ordering
// ---------------------------------------------------------------------------

std::string family_code(const CopulaFamily& f) {
    std::string base;
    switch (f.kind) {
        case FamilyKind::Independence: base = "indep"; break;
        case FamilyKind::Gaussian: base = "gauss"; break;
        case FamilyKind::StudentT: base = "t"; break;
        case FamilyKind::Clayton: base = "clayton"; break;
        case FamilyKind::Gumbel: base = "gumbel"; break;
        case FamilyKind::Frank: base = "frank"; break;
        case FamilyKind::Joe: base = "joe"; break;
    }
    if (f.rotation != 0) base += "@" + std::to_string(f.rotation);
    return base;
}

std::string BivariateCopula::code() const { return family_code(family_); }

CopulaFamily parse_family_code(const std::string& code) {
    std::string base = code;
    int rot = 0;
    const auto at = code.find('@');
    if (at != std::string::npos) {
        base = code.substr(0, at);
        const std::string r = code.substr(at + 1);
        if (r == "90") rot = 90;
        else if (r == "180") rot = 180;
        else if (r == "270") rot = 270;
        else throw domain_error("bad rotation suffix in family code: " + code);
    }
    CopulaFamily f;
    f.rotation = rot;
    if (base == "indep") f.kind = FamilyKind::Independence;
    else if (base == "gauss") f.kind = FamilyKind::Gaussian;
    else if (base == "t") f.kind = FamilyKind::StudentT;
    else if (base == "clayton") f.kind = FamilyKind::Clayton;
    else if (base == "gumbel") f.kind = FamilyKind::Gumbel;
    else if (base == "frank") f.kind = FamilyKind::Frank;
    else if (base == "joe") f.kind = FamilyKind::Joe;
    else throw domain_error("unknown copula family code: " + code);
    if (rot != 0 && !rotatable(f.kind))
        throw domain_error("rotation not supported for family: " + code);
    return f;
}

int family_order_key(const CopulaFamily& f) {
    return static_cast<int>(f.kind) * 4 + f.rotation / 90;
}

Criterion parse_criterion(const std::string& s) {
    if (s == "aic" || s == "AIC") return Criterion::AIC;
    if (s == "bic" || s == "BIC") return Criterion::BIC;
    if (s == "mle" || s == "MLE") return Criterion::MLE;
    throw domain_error("unknown criterion: " + s);
}

std::string criterion_name(Criterion c) {
    switch (c) {
        case Criterion::AIC: return "aic";
        case Criterion::BIC: return "bic";
        default: return "mle";
    }
}

// ---------------------------------------------------------------------------
// Tau inversion
// ---------------------------------------------------------------------------

namespace {
constexpr double kClaytonLo = 1e-4, kClaytonHi = 28.0;
constexpr double kGumbelLo = 1.0, kGumbelHi = 17.0;
constexpr double kFrankLo = 1e-4, kFrankHi = 35.0;
constexpr double kJoeLo = 1.0 + 1e-6, kJoeHi = 30.0;
constexpr double kRhoMax = 0.9999;

double clamp(double x, double lo, double hi) { return std::min(hi, std::max(lo, x)); }
}  // namespace

CopulaParams params_from_tau(const CopulaFamily& family, double tau) {
    CopulaParams p;
    const double at = (family.rotation == 90 || family.rotation == 270) ? -tau : tau;
    switch (family.kind) {
        case FamilyKind::Independence:
            break;
        case FamilyKind::Gaussian:
        case FamilyKind::StudentT:
            p.rho = clamp(std::sin(math::kPi * tau / 2.0), -kRhoMax, kRhoMax);
            if (family.kind == FamilyKind::StudentT) p.nu = 8.0;
            break;
        case FamilyKind::Clayton:
            p.phi = clamp(2.0 * at / std::max(1.0 - at, 1e-6), kClaytonLo, kClaytonHi);
            break;
        case FamilyKind::Gumbel:
            p.phi = clamp(1.0 / std::max(1.0 - at, 1e-6), kGumbelLo, kGumbelHi);
            break;
        case FamilyKind::Frank: {
            double t = at;
            const double s = (t >= 0.0) ? 1.0 : -1.0;
            t = std::fabs(t);
            if (t < 1e-5) {
                p.phi = s * kFrankLo;
            } else if (frank_tau(kFrankHi) <= t) {
                p.phi = s * kFrankHi;
            } else {
                p.phi = s * math::brent_root(
                                [t](double phi) { return frank_tau(phi) - t; },
                                kFrankLo, kFrankHi, 1e-10);
            }
            break;
        }
        case FamilyKind::Joe: {
            const double t = clamp(at, 0.0, joe_tau(kJoeHi));
            if (t <= joe_tau(kJoeLo)) {
                p.phi = kJoeLo;
            } else {
                p.phi = math::brent_root([t](double phi) { return joe_tau(phi) - t; },
                                         kJoeLo, kJoeHi, 1e-10);
            }
            break;
        }
    }
    return p;
}

// ---------------------------------------------------------------------------
// Fitting
// ---------------------------------------------------------------------------

namespace {

struct PairData {
    std::vector<double> u, v;
    double tau = 0.0;  // empirical tau of (u, v)
};

double empirical_tau_raw(const std::vector<double>& u, const std::vector<double>& v);

// Applies the rotation transform to the data so the base family can be fitted
// directly: the rotated density equals the base density at transformed args.
PairData rotate_data(const std::vector<double>& u, const std::vector<double>& v,
                     int rotation, double tau) {
    PairData d;
    d.u = u;
    d.v = v;
    if (rotation == 90 || rotation == 180)
        for (auto& x : d.u) x = 1.0 - x;
    if (rotation == 180 || rotation == 270)
        for (auto& x : d.v) x = 1.0 - x;
    d.tau = (rotation == 90 || rotation == 270) ? -tau : tau;
    return d;
}

double loglik_of(const BivariateCopula& c, const std::vector<double>& u,
                 const std::vector<double>& v) {
    double ll = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) ll += c.log_pdf(u[i], v[i]);
    return ll;
}

FitResult make_result(BivariateCopula cop, double ll, std::size_t n) {
    FitResult r;
    r.copula = cop;
    r.loglik = ll;
    const double q = cop.n_params();
    r.aic = -ll + 2.0 * q;
    r.bic = -ll + q * std::log(static_cast<double>(n));
    r.n = n;
    return r;
}

// One-parameter golden-section MLE on [lo, hi], guaranteed no worse than the
// tau-inversion start.
std::pair<double, double> fit_scalar_param(
    const std::function<double(double)>& negll, double lo, double hi, double start) {
    auto [x, f] = math::golden_min(negll, lo, hi, 1e-9, 120);
    const double fs = negll(start);
    if (fs < f) return {start, fs};
    return {x, f};
}

}  // namespace

FitResult fit_mle(const CopulaFamily& family, const std::vector<double>& u,
                  const std::vector<double>& v) {
    if (u.size() != v.size()) throw fit_error("fit_mle: length mismatch");
    const std::size_t n = u.size();
    if (n < 10) throw fit_error("fit_mle: need at least 10 pairs");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(u[i] > 0.0 && u[i] < 1.0 && v[i] > 0.0 && v[i] < 1.0))
            throw fit_error("fit_mle: pseudo-observations must lie strictly in (0,1)");
    }
    bool all_same = true;
    for (std::size_t i = 1; i < n && all_same; ++i)
        all_same = (u[i] == u[0] && v[i] == v[0]);
    if (all_same) throw fit_error("fit_mle: degenerate input (all pairs identical)");

    if (family.kind == FamilyKind::Independence) {
        return make_result(BivariateCopula::independence(), 0.0, n);
    }

    const double tau_hat = empirical_tau_raw(u, v);
    const PairData d = rotate_data(u, v, family.rotation, tau_hat);
    const CopulaFamily base{family.kind, 0};

    auto negll_phi = [&](double phi) {
        CopulaParams p;
        p.phi = phi;
        const BivariateCopula c(base, p);
        return -loglik_of(c, d.u, d.v);
    };
    auto finish_phi = [&](double phi) {
        CopulaParams p;
        p.phi = phi;
        const BivariateCopula c(family, p);
        return make_result(c, loglik_of(c, u, v), n);
    };

    switch (family.kind) {
        case FamilyKind::Gaussian: {
            std::vector<double> a(n), b(n);
            for (std::size_t i = 0; i < n; ++i) {
                a[i] = norm_quantile(clamp_unit(d.u[i]));
                b[i] = norm_quantile(clamp_unit(d.v[i]));
            }
            auto negll = [&](double rho) {
                const double o = 1.0 - rho * rho;
                double ll = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    ll += -0.5 * std::log(o) -
                          (rho * rho * (a[i] * a[i] + b[i] * b[i]) -
                           2.0 * rho * a[i] * b[i]) / (2.0 * o);
                }
                return -ll;
            };
            const double start = params_from_tau(base, d.tau).rho;
            auto [rho, f] = fit_scalar_param(negll, -kRhoMax, kRhoMax, start);
            CopulaParams p;
            p.rho = rho;
            const BivariateCopula c(family, p);
            return make_result(c, -f, n);
        }
        case FamilyKind::StudentT: {
            double best_f = 1e300, best_rho = 0.0, best_nu = 8.0;
            for (int nu = 3; nu <= 30; ++nu) {
                std::vector<double> a(n), b(n);
                for (std::size_t i = 0; i < n; ++i) {
                    a[i] = t_quantile(clamp_unit(d.u[i]), nu);
                    b[i] = t_quantile(clamp_unit(d.v[i]), nu);
                }
                const double lg = std::lgamma(0.5 * (nu + 2.0)) + std::lgamma(0.5 * nu) -
                                  2.0 * std::lgamma(0.5 * (nu + 1.0));
                auto negll = [&](double rho) {
                    const double o = 1.0 - rho * rho;
                    double ll = 0.0;
                    for (std::size_t i = 0; i < n; ++i) {
                        ll += lg - 0.5 * std::log(o) -
                              0.5 * (nu + 2.0) *
                                  std::log1p((a[i] * a[i] - 2.0 * rho * a[i] * b[i] +
                                              b[i] * b[i]) / (nu * o)) +
                              0.5 * (nu + 1.0) * (std::log1p(a[i] * a[i] / nu) +
                                                  std::log1p(b[i] * b[i] / nu));
                    }
                    return -ll;
                };
                const double start = params_from_tau(base, d.tau).rho;
                auto [rho, f] = fit_scalar_param(negll, -kRhoMax, kRhoMax, start);
                if (f < best_f) {
                    best_f = f;
                    best_rho = rho;
                    best_nu = nu;
                }
            }
            CopulaParams p;
            p.rho = best_rho;
            p.nu = best_nu;
            const BivariateCopula c(family, p);
            return make_result(c, -best_f, n);
        }
        case FamilyKind::Clayton: {
            const double start = params_from_tau(base, d.tau).phi;
            auto [phi, f] = fit_scalar_param(negll_phi, kClaytonLo, kClaytonHi, start);
            (void)f;
            return finish_phi(phi);
        }
        case FamilyKind::Gumbel: {
            const double start = params_from_tau(base, d.tau).phi;
            auto [phi, f] = fit_scalar_param(negll_phi, kGumbelLo, kGumbelHi, start);
            (void)f;
            return finish_phi(phi);
        }
        case FamilyKind::Joe: {
            const double start = params_from_tau(base, d.tau).phi;
            auto [phi, f] = fit_scalar_param(negll_phi, kJoeLo, kJoeHi, start);
            (void)f;
            return finish_phi(phi);
        }
        case FamilyKind::Frank: {
            const double start = params_from_tau(base, d.tau).phi;
            double phi, f;
            if (std::fabs(d.tau) < 0.005) {
                // Near zero dependence the sign is uncertain: try both branches.
                auto [pp, fp] = fit_scalar_param(negll_phi, kFrankLo, kFrankHi,
                                                 std::max(start, kFrankLo));
                auto [pn, fn] = fit_scalar_param(negll_phi, -kFrankHi, -kFrankLo,
                                                 std::min(start, -kFrankLo));
                if (fp <= fn) { phi = pp; f = fp; }
                else { phi = pn; f = fn; }
            } else if (d.tau > 0.0) {
                std::tie(phi, f) = fit_scalar_param(negll_phi, kFrankLo, kFrankHi, start);
            } else {
                std::tie(phi, f) = fit_scalar_param(negll_phi, -kFrankHi, -kFrankLo, start);
            }
            (void)f;
            return finish_phi(phi);
        }
        default:
            throw fit_error("fit_mle: unsupported family");
    }
}

FitResult select_best(const std::vector<double>& u, const std::vector<double>& v,
                      std::vector<CopulaFamily> candidates, Criterion criterion) {
    if (candidates.empty()) throw fit_error("select_best: empty candidate set");
    std::sort(candidates.begin(), candidates.end(),
              [](const CopulaFamily& a, const CopulaFamily& b) {
                  return family_order_key(a) < family_order_key(b);
              });
    candidates.erase(std::unique(candidates.begin(), candidates.end()),
                     candidates.end());

    bool have = false;
    FitResult best;
    double best_score = 0.0;
    std::ostringstream failures;
    for (const auto& fam : candidates) {
        try {
            FitResult r = fit_mle(fam, u, v);
            const double score = (criterion == Criterion::AIC)   ? r.aic
                                 : (criterion == Criterion::BIC) ? r.bic
                                                                 : -r.loglik;
            if (!have || score < best_score) {
                have = true;
                best = r;
                best_score = score;
            }
        } catch (const std::exception& e) {
            failures << family_code(fam) << ": " << e.what() << "; ";
        }
    }
    if (!have) throw fit_error("select_best: all fits failed: " + failures.str());
    return best;
}

std::vector<CopulaFamily> default_family_library() {
    std::vector<CopulaFamily> lib;
    lib.push_back({FamilyKind::Independence, 0});
    lib.push_back({FamilyKind::Gaussian, 0});
    lib.push_back({FamilyKind::StudentT, 0});
    for (const auto kind : {FamilyKind::Clayton, FamilyKind::Gumbel, FamilyKind::Joe}) {
        for (int rot : {0, 90, 180, 270}) lib.push_back({kind, rot});
    }
    lib.push_back({FamilyKind::Frank, 0});
    return lib;
}

std::vector<CopulaFamily> parse_family_list(const std::string& comma_separated) {
    std::vector<CopulaFamily> out;
    std::stringstream ss(comma_separated);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(parse_family_code(tok));
    }
    if (out.empty()) throw domain_error("empty family list");
    return out;
}

namespace {
double empirical_tau_raw(const std::vector<double>& u, const std::vector<double>& v) {
    return detail::kendall_tau_impl(u.data(), v.data(), u.size(), nullptr);
}
}  // namespace

}  // namespace rvfuse
