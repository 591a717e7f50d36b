#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rvfuse/common.hpp"
#include "rvfuse/margins.hpp"
#include "rvfuse/vine_subsets.hpp"

namespace rvfuse {

// Decision patterns are indexed with sensor 1 as the most significant bit,
// so index order equals lexicographic order of the bit strings "000".."111".
inline int pattern_index(const std::uint8_t* bits, int L) {
    int s = 0;
    for (int l = 0; l < L; ++l) s = (s << 1) | (bits[l] & 1);
    return s;
}
std::string pattern_string(int index, int L);
std::vector<int> mask_to_labels(int mask, int L);  // ascending sensor labels

struct QuantizerBank {
    std::vector<double> tau;
};

struct LocalRates {
    std::vector<double> p;  // detection probabilities
    std::vector<double> q;  // false-alarm probabilities
    bool useful() const;    // p_l > q_l for every sensor
};

// Joint decision PMF tables under H1 (p) and H0 (q), floored and normalized.
struct DecisionPMF {
    int L = 0;
    std::vector<double> p, q;  // size 2^L, indexed by pattern
    double clamped_mass_p = 0.0, clamped_mass_q = 0.0;
    double presum_p = 0.0, presum_q = 0.0;  // sums before clamping
    bool se_warning = false;                // any subset-CDF SE above target
};

// Coefficients of the log fusion statistic, indexed by sensor-subset mask.
struct FusionWeights {
    int L = 0;
    std::vector<double> a;  // size 2^L, a[0] = 0
};

struct AsymptoticStats {
    double mu0 = 0.0, var0 = 0.0, mu1 = 0.0, var1 = 0.0;
    std::size_t n = 0;
};

struct OperatingPoint {
    double gamma = 0.0;
    double predicted_pd = 0.0;
};

// bit = 1 iff z >= tau (boundary inclusive).
BitMatrix quantize(const Matrix& z, const QuantizerBank& bank);

// Local Neyman-Pearson thresholds: q_l = beta_l exactly.
QuantizerBank solve_thresholds(const std::vector<MarginalModel>& h0_marginals,
                               const std::vector<double>& beta);

LocalRates local_rates(const std::vector<MarginalModel>& h1_marginals,
                       const std::vector<MarginalModel>& h0_marginals,
                       const QuantizerBank& bank);

// One PMF table by inclusion-exclusion over subset copula CDF values at the
// zero-probabilities 1 - rate. Throws numeric_error when the clamped mass
// exceeds 1e-3 (Monte Carlo budget too small).
std::vector<double> pmf_from_copulas(const SubsetCopulaSet& subsets,
                                     const std::vector<double>& rates,
                                     std::size_t mc_budget, std::uint64_t seed,
                                     double* clamped_mass = nullptr,
                                     double* presum = nullptr,
                                     bool* se_warning = nullptr);

DecisionPMF build_decision_pmf(const SubsetCopulaSet& h1_subsets,
                               const SubsetCopulaSet& h0_subsets,
                               const LocalRates& rates, std::size_t mc_budget,
                               std::uint64_t seed);

// A-coefficients by Mobius inversion of s -> log(P_s/Q_s) - log(P_0/Q_0).
FusionWeights weights_from_pmf(const DecisionPMF& pmf);

// Per-pattern statistic contributions U_s (subset sums of the weights).
std::vector<double> pattern_values(const FusionWeights& w);

double eval_statistic(const FusionWeights& w, const BitMatrix& decisions);
double chair_varshney(const LocalRates& rates, const BitMatrix& decisions);

AsymptoticStats asymptotic_stats(const DecisionPMF& pmf, const FusionWeights& w,
                                 std::size_t n);

OperatingPoint np_operating_point(const AsymptoticStats& stats, double alpha);

// 1 iff statistic strictly exceeds gamma (ties decide H0).
int fuse(double statistic, double gamma);

// Experimental: coarse grid search over per-sensor quantizer levels that
// maximizes the predicted system P_D at system false alarm `alpha`, using the
// asymptotic operating point. The local NP solution (q_l = beta_l) is always
// part of the grid, so the result never predicts worse than the default.
QuantizerBank grid_search_thresholds(const std::vector<MarginalModel>& h1_marginals,
                                     const std::vector<MarginalModel>& h0_marginals,
                                     const SubsetCopulaSet& h1_subsets,
                                     const SubsetCopulaSet& h0_subsets,
                                     const std::vector<double>& beta, double alpha,
                                     std::size_t n_instants, std::size_t mc_budget,
                                     std::uint64_t seed,
                                     const std::vector<double>& q_grid = {
                                         0.02, 0.05, 0.1, 0.2, 0.35});

std::vector<std::uint64_t> pattern_histogram(const BitMatrix& decisions);

struct PipelineOptions {
    std::vector<double> beta;
    SelectOptions select;
    std::size_t mc_budget = 200000;
    std::uint64_t seed = 1;
};

// End-to-end training: thresholds, rates, per-hypothesis subset copula sets,
// PMFs and fusion weights, from labeled raw training observations.
struct PipelineModel {
    std::vector<MarginalModel> h1_marginals, h0_marginals;
    QuantizerBank bank;
    LocalRates rates;
    SubsetCopulaSet h1_subsets, h0_subsets;
    DecisionPMF pmf;
    FusionWeights weights;
};

PipelineModel run_fusion_pipeline(const Matrix& h1_train, const Matrix& h0_train,
                                  const PipelineOptions& opt);

}  // namespace rvfuse
