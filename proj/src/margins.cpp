#include "rvfuse/margins.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rvfuse/detail/kendall.hpp"
#include "rvfuse/kernels.hpp"
#include "rvfuse/math.hpp"

namespace rvfuse {

// ---------------------------------------------------------------------------
// MarginalModel
// ---------------------------------------------------------------------------

MarginalModel MarginalModel::gaussian(double mu, double sigma) {
    if (!(sigma > 0.0)) throw domain_error("gaussian marginal requires sigma > 0");
    MarginalModel m;
    m.kind_ = MarginalKind::Gaussian;
    m.p0_ = mu;
    m.p1_ = sigma;
    return m;
}

MarginalModel MarginalModel::rayleigh(double xi) {
    if (!(xi > 0.0)) throw domain_error("rayleigh marginal requires xi > 0");
    MarginalModel m;
    m.kind_ = MarginalKind::Rayleigh;
    m.p0_ = xi;
    return m;
}

MarginalModel kde_fit_with_bandwidth(const std::vector<double>& samples,
                                     double bandwidth) {
    if (samples.size() < 10) throw fit_error("kde_fit: need at least 10 samples");
    for (double x : samples)
        if (!std::isfinite(x)) throw fit_error("kde_fit: non-finite sample");
    if (!(bandwidth > 0.0)) throw fit_error("kde_fit: bandwidth must be positive");
    MarginalModel m;
    m.kind_ = MarginalKind::Kde;
    m.samples_ = samples;
    m.bandwidth_ = bandwidth;
    return m;
}

MarginalModel kde_fit(const std::vector<double>& samples) {
    const std::size_t n = samples.size();
    if (n < 10) throw fit_error("kde_fit: need at least 10 samples");
    double mean = 0.0;
    for (double x : samples) mean += x;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double x : samples) var += (x - mean) * (x - mean);
    var /= static_cast<double>(n - 1);
    const double sd = std::sqrt(var);
    if (!(sd > 0.0)) throw fit_error("kde_fit: zero-variance samples");

    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    const auto quantile_at = [&](double p) {
        const double idx = p * (n - 1);
        const std::size_t lo = static_cast<std::size_t>(idx);
        const std::size_t hi = std::min(lo + 1, n - 1);
        const double f = idx - lo;
        return sorted[lo] * (1.0 - f) + sorted[hi] * f;
    };
    const double iqr = quantile_at(0.75) - quantile_at(0.25);
    double sigma_hat = sd;
    if (iqr > 0.0) sigma_hat = std::min(sd, iqr / 1.34);
    const double h = 1.06 * sigma_hat * std::pow(static_cast<double>(n), -0.2);
    return kde_fit_with_bandwidth(samples, h);
}

double MarginalModel::pdf(double x) const {
    switch (kind_) {
        case MarginalKind::Gaussian:
            return math::norm_pdf((x - p0_) / p1_) / p1_;
        case MarginalKind::Rayleigh: {
            if (x <= 0.0) return 0.0;
            const double r = x / p0_;
            return r / p0_ * std::exp(-0.5 * r * r);
        }
        case MarginalKind::Kde: {
            double s = 0.0;
            for (double xi : samples_) s += math::norm_pdf((x - xi) / bandwidth_);
            return s / (samples_.size() * bandwidth_);
        }
    }
    return 0.0;
}

double MarginalModel::cdf(double x) const {
    switch (kind_) {
        case MarginalKind::Gaussian:
            return math::norm_cdf((x - p0_) / p1_);
        case MarginalKind::Rayleigh: {
            if (x <= 0.0) return 0.0;
            const double r = x / p0_;
            return -std::expm1(-0.5 * r * r);
        }
        case MarginalKind::Kde: {
            double s = 0.0;
            for (double xi : samples_) s += math::norm_cdf((x - xi) / bandwidth_);
            return s / samples_.size();
        }
    }
    return 0.0;
}

double MarginalModel::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw domain_error("marginal quantile: p outside (0,1)");
    switch (kind_) {
        case MarginalKind::Gaussian:
            return p0_ + p1_ * math::norm_quantile(p);
        case MarginalKind::Rayleigh:
            return p0_ * std::sqrt(-2.0 * std::log1p(-p));
        case MarginalKind::Kde: {
            const auto [mn, mx] =
                std::minmax_element(samples_.begin(), samples_.end());
            double lo = *mn - 8.0 * bandwidth_;
            double hi = *mx + 8.0 * bandwidth_;
            // cdf(lo) ~ 0 and cdf(hi) ~ 1, widen if the tail target escapes.
            int guard = 0;
            while (cdf(lo) > p && guard++ < 60) lo -= 4.0 * bandwidth_;
            while (cdf(hi) < p && guard++ < 120) hi += 4.0 * bandwidth_;
            return math::brent_root([&](double x) { return cdf(x) - p; }, lo, hi,
                                    1e-11 * (1.0 + std::fabs(*mx - *mn)));
        }
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// EPIT
// ---------------------------------------------------------------------------

Matrix ecdf_transform(const Matrix& samples) {
    const std::size_t n = samples.rows();
    const std::size_t L = samples.cols();
    if (n < 10) throw fit_error("ecdf_transform: need at least 10 rows");
    Matrix out(n, L);
    std::vector<std::size_t> idx(n);
    for (std::size_t c = 0; c < L; ++c) {
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return samples(a, c) < samples(b, c);
        });
        // Average ranks over tie groups; ranks are 1-based.
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && samples(idx[j + 1], c) == samples(idx[i], c)) ++j;
            const double avg_rank = 0.5 * static_cast<double>(i + 1 + j + 1);
            for (std::size_t k = i; k <= j; ++k)
                out(idx[k], c) = avg_rank / static_cast<double>(n + 1);
            i = j + 1;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Kendall's tau
// ---------------------------------------------------------------------------

namespace detail {

double kendall_tau_impl(const double* x, const double* y, std::size_t n,
                        bool* degenerate) {
    if (degenerate) *degenerate = false;
    if (n < 2) throw domain_error("kendall_tau: need at least 2 observations");
    kernels::TauCounts c;
    kernels::tau_pair_counts(x, y, n, &c);
    const double n0 = 0.5 * static_cast<double>(n) * (n - 1);
    const double n1 = static_cast<double>(c.tie_x + c.tie_xy);
    const double n2 = static_cast<double>(c.tie_y + c.tie_xy);
    const double dx = n0 - n1;
    const double dy = n0 - n2;
    if (dx <= 0.0 || dy <= 0.0) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    return (static_cast<double>(c.concordant) - static_cast<double>(c.discordant)) /
           std::sqrt(dx * dy);
}

}  // namespace detail

double kendall_tau(const std::vector<double>& x, const std::vector<double>& y,
                   bool* degenerate) {
    if (x.size() != y.size()) throw domain_error("kendall_tau: length mismatch");
    return detail::kendall_tau_impl(x.data(), y.data(), x.size(), degenerate);
}

namespace {

// Counts strict inversions of v (pairs i<j with v[i] > v[j]) by merge sort.
std::uint64_t count_inversions(std::vector<double>& v, std::vector<double>& buf,
                               std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::uint64_t inv = count_inversions(v, buf, lo, mid) +
                        count_inversions(v, buf, mid, hi);
    std::size_t a = lo, b = mid, k = lo;
    while (a < mid && b < hi) {
        if (v[b] < v[a]) {
            inv += mid - a;
            buf[k++] = v[b++];
        } else {
            buf[k++] = v[a++];
        }
    }
    while (a < mid) buf[k++] = v[a++];
    while (b < hi) buf[k++] = v[b++];
    std::copy(buf.begin() + lo, buf.begin() + hi, v.begin() + lo);
    return inv;
}

std::uint64_t tie_pairs(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::uint64_t t = 0;
    std::size_t i = 0;
    while (i < v.size()) {
        std::size_t j = i;
        while (j + 1 < v.size() && v[j + 1] == v[i]) ++j;
        const std::uint64_t g = j - i + 1;
        t += g * (g - 1) / 2;
        i = j + 1;
    }
    return t;
}

}  // namespace

double kendall_tau_nlogn(std::vector<double> x, std::vector<double> y,
                         bool* degenerate) {
    if (x.size() != y.size()) throw domain_error("kendall_tau: length mismatch");
    const std::size_t n = x.size();
    if (degenerate) *degenerate = false;
    if (n < 2) throw domain_error("kendall_tau: need at least 2 observations");

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (x[a] != x[b]) return x[a] < x[b];
        return y[a] < y[b];
    });
    std::vector<double> ys(n);
    for (std::size_t i = 0; i < n; ++i) ys[i] = y[idx[i]];

    // Tie bookkeeping on the (x, y)-sorted sequence.
    std::uint64_t n1 = 0, n3 = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
        const std::uint64_t g = j - i + 1;
        n1 += g * (g - 1) / 2;
        std::size_t a = i;
        while (a <= j) {
            std::size_t b = a;
            while (b + 1 <= j && y[idx[b + 1]] == y[idx[a]]) ++b;
            const std::uint64_t t = b - a + 1;
            n3 += t * (t - 1) / 2;
            a = b + 1;
        }
        i = j + 1;
    }
    const std::uint64_t n2 = tie_pairs(y);

    std::vector<double> buf(n);
    const std::uint64_t swaps = count_inversions(ys, buf, 0, n);

    const double n0 = 0.5 * static_cast<double>(n) * (n - 1);
    const double dx = n0 - static_cast<double>(n1);
    const double dy = n0 - static_cast<double>(n2);
    if (dx <= 0.0 || dy <= 0.0) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    // Pairs untied in both coordinates: concordant + discordant.
    const double m = n0 - static_cast<double>(n1) - static_cast<double>(n2) +
                     static_cast<double>(n3);
    const double cd = m - 2.0 * static_cast<double>(swaps);
    return cd / std::sqrt(dx * dy);
}

Matrix tau_matrix(const Matrix& pseudo_obs) {
    const std::size_t L = pseudo_obs.cols();
    if (L < 2) throw domain_error("tau_matrix: need at least 2 columns");
    Matrix t(L, L, 0.0);
    std::vector<std::vector<double>> cols(L);
    for (std::size_t c = 0; c < L; ++c) cols[c] = pseudo_obs.column(c);
    for (std::size_t i = 0; i < L; ++i) {
        t(i, i) = 1.0;
        for (std::size_t j = i + 1; j < L; ++j) {
            const double tau = kendall_tau(cols[i], cols[j]);
            t(i, j) = tau;
            t(j, i) = tau;
        }
    }
    return t;
}

}  // namespace rvfuse
