#pragma once

#include <string>
#include <vector>

#include "rvfuse/common.hpp"

namespace rvfuse {

enum class MarginalKind { Kde, Gaussian, Rayleigh };

// One-dimensional marginal model: Gaussian-kernel KDE over stored samples, or
// a parametric form when the generating distribution is known.
class MarginalModel {
public:
    MarginalModel() = default;

    static MarginalModel gaussian(double mu, double sigma);
    static MarginalModel rayleigh(double xi);

    MarginalKind kind() const { return kind_; }
    double bandwidth() const { return bandwidth_; }
    const std::vector<double>& samples() const { return samples_; }
    double param(int i) const { return i == 0 ? p0_ : p1_; }

    double pdf(double x) const;
    double cdf(double x) const;
    double survival(double x) const { return 1.0 - cdf(x); }
    double quantile(double p) const;
    // Threshold t with survival(t) = beta (root-found for KDE).
    double inverse_survival(double beta) const { return quantile(1.0 - beta); }

    friend MarginalModel kde_fit(const std::vector<double>& samples);
    friend MarginalModel kde_fit_with_bandwidth(const std::vector<double>& samples,
                                                double bandwidth);

private:
    MarginalKind kind_ = MarginalKind::Kde;
    std::vector<double> samples_;   // KDE only
    double bandwidth_ = 0.0;        // KDE only
    double p0_ = 0.0, p1_ = 1.0;    // parametric: (mu, sigma) or (xi, -)
};

// Gaussian-kernel KDE with Silverman bandwidth 1.06 * min(sd, IQR/1.34) * N^(-1/5).
MarginalModel kde_fit(const std::vector<double>& samples);
MarginalModel kde_fit_with_bandwidth(const std::vector<double>& samples,
                                     double bandwidth);

// Empirical probability integral transform: entry (n, l) = rank / (N + 1),
// ties broken by average rank. All entries strictly inside (0, 1).
Matrix ecdf_transform(const Matrix& samples);

// Kendall tau-b (tie corrected). Constant input yields 0 and sets *degenerate.
double kendall_tau(const std::vector<double>& x, const std::vector<double>& y,
                   bool* degenerate = nullptr);

// O(N log N) merge-count variant; agrees exactly with kendall_tau.
double kendall_tau_nlogn(std::vector<double> x, std::vector<double> y,
                         bool* degenerate = nullptr);

// L x L symmetric matrix of pairwise empirical taus, unit diagonal.
Matrix tau_matrix(const Matrix& pseudo_obs);

}  // namespace rvfuse
