#include "rvfuse/math.hpp"

#include <algorithm>
#include <cstddef>

#include "rvfuse/common.hpp"

namespace rvfuse::math {

// ---------------------------------------------------------------------------
// Wichura AS241 (PPND16): inverse normal CDF, ~1 ulp over (0,1).
// ---------------------------------------------------------------------------
double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -1e308;
        if (p == 1.0) return 1e308;
        throw domain_error("norm_quantile: p outside (0,1)");
    }
    const double q = p - 0.5;
    double r;
    if (std::fabs(q) <= 0.425) {
        r = 0.180625 - q * q;
        return q *
            (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                  6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
              1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
            (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                  3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
              4.2313330701600911252e1) * r + 1.0);
    }
    r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                  3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
                4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                  6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
                2.05319162663775882187e0) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                  2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
                5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                    1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                  1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                5.99832206555887937690e-1) * r + 1.0);
    }
    return (q < 0.0) ? -val : val;
}

// ---------------------------------------------------------------------------
// Regularized incomplete beta (Lentz continued fraction, NR style).
// ---------------------------------------------------------------------------
namespace {

double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kFpMin = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    throw numeric_error("inc_beta: continued fraction did not converge");
}

}  // namespace

double inc_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double lbeta = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
    const double front = std::exp(lbeta + a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * betacf(a, b, x) / a;
    }
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double t_pdf(double x, double nu) { return std::exp(t_logpdf(x, nu)); }

double t_cdf(double x, double nu) {
    if (x == 0.0) return 0.5;
    const double p = 0.5 * inc_beta(0.5 * nu, 0.5, nu / (nu + x * x));
    return (x > 0.0) ? 1.0 - p : p;
}

double t_quantile(double p, double nu) {
    if (!(p > 0.0 && p < 1.0)) throw domain_error("t_quantile: p outside (0,1)");
    if (p == 0.5) return 0.0;
    // Start from the normal quantile, polish with safeguarded Newton.
    double x = norm_quantile(p);
    // Initial scale correction (Cornish-Fisher first term).
    x = x * std::sqrt(nu / std::max(nu - 2.0, 0.5));
    double lo = -1e10, hi = 1e10;
    for (int it = 0; it < 100; ++it) {
        const double f = t_cdf(x, nu) - p;
        if (f > 0.0) hi = std::min(hi, x);
        else lo = std::max(lo, x);
        const double d = t_pdf(x, nu);
        double step = (d > 0.0) ? f / d : 0.0;
        double xn = x - step;
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (std::fabs(xn - x) <= 1e-14 * (1.0 + std::fabs(xn))) return xn;
        x = xn;
    }
    return x;
}

// ---------------------------------------------------------------------------
// Gauss-Legendre 24 on [-1, 1].
// ---------------------------------------------------------------------------
const double GaussLegendre24::nodes[24] = {
    -0.9951872199970213601799, -0.9747285559713094981984, -0.9382745520027327585237,
    -0.8864155270044010342132, -0.8200019859739029219539, -0.7401241915785543642438,
    -0.6480936519369755692524, -0.5454214713888395356583, -0.4337935076260451384870,
    -0.3150426796961633743868, -0.1911188674736163091586, -0.0640568928626056260850,
     0.0640568928626056260850,  0.1911188674736163091586,  0.3150426796961633743868,
     0.4337935076260451384870,  0.5454214713888395356583,  0.6480936519369755692524,
     0.7401241915785543642438,  0.8200019859739029219539,  0.8864155270044010342132,
     0.9382745520027327585237,  0.9747285559713094981984,  0.9951872199970213601799};

const double GaussLegendre24::weights[24] = {
    0.0123412297999871995468, 0.0285313886289336631813, 0.0442774388174198061686,
    0.0592985849154367807464, 0.0733464814110803057340, 0.0861901615319532759172,
    0.0976186521041138882699, 0.1074442701159656347826, 0.1155056680537256013533,
    0.1216704729278033912045, 0.1258374563468282961214, 0.1279381953467521569740,
    0.1279381953467521569740, 0.1258374563468282961214, 0.1216704729278033912045,
    0.1155056680537256013533, 0.1074442701159656347826, 0.0976186521041138882699,
    0.0861901615319532759172, 0.0733464814110803057340, 0.0592985849154367807464,
    0.0442774388174198061686, 0.0285313886289336631813, 0.0123412297999871995468};

double integrate_gl(const std::function<double(double)>& f, double a, double b,
                    int panels) {
    if (b <= a) return 0.0;
    const double width = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * width;
        const double mid = lo + 0.5 * width;
        const double half = 0.5 * width;
        double acc = 0.0;
        for (int i = 0; i < 24; ++i) {
            acc += GaussLegendre24::weights[i] * f(mid + half * GaussLegendre24::nodes[i]);
        }
        total += acc * half;
    }
    return total;
}

double debye1(double x) {
    if (x == 0.0) return 1.0;
    const double ax = std::fabs(x);
    const double integral = integrate_gl(
        [](double t) { return (t == 0.0) ? 1.0 : t / std::expm1(t); }, 0.0, ax, 10);
    double d = integral / ax;
    if (x < 0.0) d += 0.5 * ax;  // D1(-x) = D1(x) + x/2
    return d;
}

// ---------------------------------------------------------------------------
// Brent root / golden-section minimum
// ---------------------------------------------------------------------------
double brent_root(const std::function<double(double)>& f, double a, double b,
                  double tol, int max_iter) {
    double fa = f(a);
    double fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0) throw numeric_error("brent_root: root not bracketed");
    double c = a, fc = fa;
    double d = b - a, e = d;
    for (int it = 0; it < max_iter; ++it) {
        if (std::fabs(fc) < std::fabs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 = 2.0 * 2.22e-16 * std::fabs(b) + 0.5 * tol;
        const double xm = 0.5 * (c - b);
        if (std::fabs(xm) <= tol1 || fb == 0.0) return b;
        if (std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
            double p, q, r;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                q = fa / fc;
                r = fb / fc;
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
                q = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::fabs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::fabs(tol1 * q), std::fabs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::fabs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
        fb = f(b);
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            e = d = b - a;
        }
    }
    throw numeric_error("brent_root: did not converge");
}

std::pair<double, double> golden_min(const std::function<double(double)>& f,
                                     double a, double b, double tol, int max_iter) {
    constexpr double kInvPhi = 0.6180339887498948482;
    double x1 = b - kInvPhi * (b - a);
    double x2 = a + kInvPhi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int it = 0; it < max_iter && (b - a) > tol * (1.0 + std::fabs(a) + std::fabs(b));
         ++it) {
        if (f1 < f2) {
            b = x2;
            x2 = x1; f2 = f1;
            x1 = b - kInvPhi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2; f1 = f2;
            x2 = a + kInvPhi * (b - a);
            f2 = f(x2);
        }
    }
    return (f1 < f2) ? std::make_pair(x1, f1) : std::make_pair(x2, f2);
}

// ---------------------------------------------------------------------------
// KS / Anderson-Darling helpers
// ---------------------------------------------------------------------------
double ks_pvalue(double d, std::size_t n) {
    const double lambda = (std::sqrt(static_cast<double>(n)) + 0.12 +
                           0.11 / std::sqrt(static_cast<double>(n))) * d;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = 2.0 * ((k % 2 == 1) ? 1.0 : -1.0) *
                            std::exp(-2.0 * k * k * lambda * lambda);
        sum += term;
        if (std::fabs(term) < 1e-12) break;
    }
    return std::min(1.0, std::max(0.0, sum));
}

double ks_uniform_statistic(std::vector<double> sample) {
    std::sort(sample.begin(), sample.end());
    const std::size_t n = sample.size();
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double fn_hi = static_cast<double>(i + 1) / n;
        const double fn_lo = static_cast<double>(i) / n;
        d = std::max(d, std::max(std::fabs(fn_hi - sample[i]), std::fabs(sample[i] - fn_lo)));
    }
    return d;
}

double anderson_darling_normal(std::vector<double> sample, double mu, double sigma) {
    std::sort(sample.begin(), sample.end());
    const std::size_t n = sample.size();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double z = norm_cdf((sample[i] - mu) / sigma);
        z = std::min(1.0 - 1e-15, std::max(1e-15, z));
        const double zr = norm_cdf((sample[n - 1 - i] - mu) / sigma);
        const double zc = std::min(1.0 - 1e-15, std::max(1e-15, 1.0 - zr));
        s += (2.0 * i + 1.0) * (std::log(z) + std::log(zc));
    }
    return -static_cast<double>(n) - s / n;
}

}  // namespace rvfuse::math
