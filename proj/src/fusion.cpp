#include "rvfuse/fusion.hpp"

#include <algorithm>
#include <cmath>

#include "rvfuse/kernels.hpp"
#include "rvfuse/math.hpp"
#include "rvfuse/rng.hpp"

namespace rvfuse {

namespace {
constexpr double kPmfFloor = 1e-12;
constexpr double kMaxClampedMass = 1e-3;
}  // namespace

std::string pattern_string(int index, int L) {
    std::string s(L, '0');
    for (int l = 0; l < L; ++l)
        if (index & (1 << (L - 1 - l))) s[l] = '1';
    return s;
}

std::vector<int> mask_to_labels(int mask, int L) {
    std::vector<int> out;
    for (int l = 1; l <= L; ++l)
        if (mask & (1 << (L - l))) out.push_back(l);
    return out;
}

bool LocalRates::useful() const {
    for (std::size_t l = 0; l < p.size(); ++l)
        if (!(p[l] > q[l])) return false;
    return true;
}

BitMatrix quantize(const Matrix& z, const QuantizerBank& bank) {
    const std::size_t n = z.rows();
    const std::size_t L = z.cols();
    if (bank.tau.size() != L) throw domain_error("quantize: threshold count mismatch");
    BitMatrix bits(n, L);
    std::vector<double> col(n);
    std::vector<std::uint8_t> out(n);
    for (std::size_t c = 0; c < L; ++c) {
        for (std::size_t r = 0; r < n; ++r) col[r] = z(r, c);
        kernels::quantize_ge(col.data(), n, bank.tau[c], out.data());
        for (std::size_t r = 0; r < n; ++r) bits(r, c) = out[r];
    }
    return bits;
}

QuantizerBank solve_thresholds(const std::vector<MarginalModel>& h0_marginals,
                               const std::vector<double>& beta) {
    if (h0_marginals.size() != beta.size())
        throw domain_error("solve_thresholds: beta count mismatch");
    QuantizerBank bank;
    for (std::size_t l = 0; l < beta.size(); ++l) {
        if (!(beta[l] > 0.0 && beta[l] < 1.0))
            throw domain_error("solve_thresholds: beta must lie in (0,1)");
        bank.tau.push_back(h0_marginals[l].inverse_survival(beta[l]));
    }
    return bank;
}

LocalRates local_rates(const std::vector<MarginalModel>& h1_marginals,
                       const std::vector<MarginalModel>& h0_marginals,
                       const QuantizerBank& bank) {
    if (h1_marginals.size() != bank.tau.size() ||
        h0_marginals.size() != bank.tau.size())
        throw domain_error("local_rates: marginal count mismatch");
    LocalRates r;
    for (std::size_t l = 0; l < bank.tau.size(); ++l) {
        r.p.push_back(std::min(1.0 - 1e-12, std::max(1e-12, h1_marginals[l].survival(bank.tau[l]))));
        r.q.push_back(std::min(1.0 - 1e-12, std::max(1e-12, h0_marginals[l].survival(bank.tau[l]))));
    }
    return r;
}

std::vector<double> pmf_from_copulas(const SubsetCopulaSet& subsets,
                                     const std::vector<double>& rates,
                                     std::size_t mc_budget, std::uint64_t seed,
                                     double* clamped_mass, double* presum,
                                     bool* se_warning) {
    const int L = static_cast<int>(rates.size());
    const int P = 1 << L;
    for (double r : rates) {
        if (!(r > 0.0 && r < 1.0))
            throw domain_error("pmf_from_copulas: rates must lie strictly in (0,1)");
    }

    // Subset CDF values at margins (1 - rate); one evaluation per subset.
    std::vector<double> c(P, 1.0);
    bool warn = false;
    for (int mask = 1; mask < P; ++mask) {
        const auto labels = mask_to_labels(mask, L);
        if (labels.size() == 1) {
            c[mask] = 1.0 - rates[labels[0] - 1];
            continue;
        }
        std::vector<double> margins;
        margins.reserve(labels.size());
        for (int l : labels) margins.push_back(1.0 - rates[l - 1]);
        const auto v = subset_copula_cdf(subsets.at(labels), margins, mc_budget,
                                         Rng::derive(seed, static_cast<std::uint64_t>(mask)));
        c[mask] = v.value;
        warn = warn || v.se_warning;
    }

    // Superset Mobius transform: g[Z] = sum_{T >= Z} (-1)^{|T\Z|} C_T.
    std::vector<double> g = c;
    for (int b = 0; b < L; ++b) {
        for (int s = 0; s < P; ++s) {
            if (!(s & (1 << b))) g[s] -= g[s | (1 << b)];
        }
    }

    std::vector<double> pmf(P);
    double raw_sum = 0.0, clamped = 0.0;
    for (int s = 0; s < P; ++s) {
        const double raw = g[(~s) & (P - 1)];
        raw_sum += raw;
        if (raw < kPmfFloor) clamped += kPmfFloor - raw;
        pmf[s] = std::max(raw, kPmfFloor);
    }
    if (clamped > kMaxClampedMass)
        throw numeric_error(
            "pmf_from_copulas: clamped mass exceeds 1e-3; raise the MC budget");
    double total = 0.0;
    for (double v : pmf) total += v;
    for (auto& v : pmf) v = std::max(v / total, kPmfFloor);

    if (clamped_mass) *clamped_mass = clamped;
    if (presum) *presum = raw_sum;
    if (se_warning) *se_warning = warn;
    return pmf;
}

DecisionPMF build_decision_pmf(const SubsetCopulaSet& h1_subsets,
                               const SubsetCopulaSet& h0_subsets,
                               const LocalRates& rates, std::size_t mc_budget,
                               std::uint64_t seed) {
    DecisionPMF pmf;
    pmf.L = static_cast<int>(rates.p.size());
    bool warn1 = false, warn0 = false;
    pmf.p = pmf_from_copulas(h1_subsets, rates.p, mc_budget, Rng::derive(seed, 1),
                             &pmf.clamped_mass_p, &pmf.presum_p, &warn1);
    pmf.q = pmf_from_copulas(h0_subsets, rates.q, mc_budget, Rng::derive(seed, 2),
                             &pmf.clamped_mass_q, &pmf.presum_q, &warn0);
    pmf.se_warning = warn1 || warn0;
    return pmf;
}

FusionWeights weights_from_pmf(const DecisionPMF& pmf) {
    const int L = pmf.L;
    const int P = 1 << L;
    FusionWeights w;
    w.L = L;
    w.a.resize(P);
    const double base = std::log(pmf.p[0] / pmf.q[0]);
    for (int s = 0; s < P; ++s) w.a[s] = std::log(pmf.p[s] / pmf.q[s]) - base;
    // Mobius inversion over the subset lattice of the ones-mask.
    for (int b = 0; b < L; ++b) {
        for (int s = 0; s < P; ++s) {
            if (s & (1 << b)) w.a[s] -= w.a[s ^ (1 << b)];
        }
    }
    w.a[0] = 0.0;
    return w;
}

std::vector<double> pattern_values(const FusionWeights& w) {
    const int P = 1 << w.L;
    std::vector<double> u = w.a;
    for (int b = 0; b < w.L; ++b) {
        for (int s = 0; s < P; ++s) {
            if (s & (1 << b)) u[s] += u[s ^ (1 << b)];
        }
    }
    return u;
}

std::vector<std::uint64_t> pattern_histogram(const BitMatrix& decisions) {
    const int L = static_cast<int>(decisions.cols());
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(1) << L, 0);
    for (std::size_t r = 0; r < decisions.rows(); ++r)
        ++counts[pattern_index(decisions.row_ptr(r), L)];
    return counts;
}

double eval_statistic(const FusionWeights& w, const BitMatrix& decisions) {
    if (static_cast<int>(decisions.cols()) != w.L)
        throw domain_error("eval_statistic: dimension mismatch");
    const auto counts = pattern_histogram(decisions);
    const auto u = pattern_values(w);
    double s = 0.0;
    for (std::size_t k = 0; k < counts.size(); ++k)
        s += static_cast<double>(counts[k]) * u[k];
    return s;
}

double chair_varshney(const LocalRates& rates, const BitMatrix& decisions) {
    const std::size_t L = decisions.cols();
    if (rates.p.size() != L) throw domain_error("chair_varshney: dimension mismatch");
    std::vector<double> w1(L), w0(L);
    for (std::size_t l = 0; l < L; ++l) {
        w1[l] = std::log(rates.p[l] / rates.q[l]);
        w0[l] = std::log((1.0 - rates.p[l]) / (1.0 - rates.q[l]));
    }
    double s = 0.0;
    for (std::size_t r = 0; r < decisions.rows(); ++r) {
        const std::uint8_t* bits = decisions.row_ptr(r);
        for (std::size_t l = 0; l < L; ++l) s += bits[l] ? w1[l] : w0[l];
    }
    return s;
}

AsymptoticStats asymptotic_stats(const DecisionPMF& pmf, const FusionWeights& w,
                                 std::size_t n) {
    const auto u = pattern_values(w);
    const int P = 1 << pmf.L;
    double m0 = 0.0, m1 = 0.0, s0 = 0.0, s1 = 0.0;
    for (int s = 0; s < P; ++s) {
        m0 += u[s] * pmf.q[s];
        m1 += u[s] * pmf.p[s];
        s0 += u[s] * u[s] * pmf.q[s];
        s1 += u[s] * u[s] * pmf.p[s];
    }
    AsymptoticStats st;
    st.n = n;
    const double nn = static_cast<double>(n);
    st.mu0 = nn * m0;
    st.mu1 = nn * m1;
    st.var0 = nn * (s0 - m0 * m0);
    st.var1 = nn * (s1 - m1 * m1);
    if (st.var0 < 0.0) st.var0 = 0.0;
    if (st.var1 < 0.0) st.var1 = 0.0;
    return st;
}

OperatingPoint np_operating_point(const AsymptoticStats& stats, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw domain_error("np_operating_point: alpha must lie in (0,1)");
    if (!(stats.var0 > 0.0))
        throw domain_error("np_operating_point: zero variance under H0");
    OperatingPoint op;
    op.gamma = std::sqrt(stats.var0) * math::norm_sf_inv(alpha) + stats.mu0;
    const double s1 = std::sqrt(stats.var1);
    op.predicted_pd =
        (s1 > 0.0) ? math::norm_sf((op.gamma - stats.mu1) / s1)
                   : (op.gamma < stats.mu1 ? 1.0 : 0.0);
    return op;
}

int fuse(double statistic, double gamma) { return statistic > gamma ? 1 : 0; }

QuantizerBank grid_search_thresholds(const std::vector<MarginalModel>& h1_marginals,
                                     const std::vector<MarginalModel>& h0_marginals,
                                     const SubsetCopulaSet& h1_subsets,
                                     const SubsetCopulaSet& h0_subsets,
                                     const std::vector<double>& beta, double alpha,
                                     std::size_t n_instants, std::size_t mc_budget,
                                     std::uint64_t seed,
                                     const std::vector<double>& q_grid) {
    const std::size_t L = h0_marginals.size();
    // Candidate local false-alarm levels per sensor; the NP default is
    // always included.
    std::vector<std::vector<double>> levels(L);
    for (std::size_t l = 0; l < L; ++l) {
        levels[l] = q_grid;
        levels[l].push_back(beta[l]);
        std::sort(levels[l].begin(), levels[l].end());
        levels[l].erase(std::unique(levels[l].begin(), levels[l].end()),
                        levels[l].end());
    }
    std::vector<std::size_t> idx(L, 0);
    QuantizerBank best;
    double best_pd = -1.0;
    for (;;) {
        std::vector<double> q(L);
        for (std::size_t l = 0; l < L; ++l) q[l] = levels[l][idx[l]];
        QuantizerBank bank = solve_thresholds(h0_marginals, q);
        const LocalRates rates = local_rates(h1_marginals, h0_marginals, bank);
        try {
            const DecisionPMF pmf =
                build_decision_pmf(h1_subsets, h0_subsets, rates, mc_budget, seed);
            const FusionWeights w = weights_from_pmf(pmf);
            const auto st = asymptotic_stats(pmf, w, n_instants);
            if (st.var0 > 0.0) {
                const double pd = np_operating_point(st, alpha).predicted_pd;
                if (pd > best_pd) {
                    best_pd = pd;
                    best = bank;
                }
            }
        } catch (const numeric_error&) {
            // Budget too small for this corner of the grid; skip it.
        }
        std::size_t l = 0;
        while (l < L && ++idx[l] == levels[l].size()) idx[l++] = 0;
        if (l == L) break;
    }
    if (best_pd < 0.0)
        throw numeric_error("grid_search_thresholds: no grid point evaluated cleanly");
    return best;
}

PipelineModel run_fusion_pipeline(const Matrix& h1_train, const Matrix& h0_train,
                                  const PipelineOptions& opt) {
    if (h1_train.cols() != h0_train.cols())
        throw domain_error("run_fusion_pipeline: sensor count mismatch");
    const std::size_t L = h1_train.cols();
    if (opt.beta.size() != L)
        throw domain_error("run_fusion_pipeline: beta count mismatch");

    PipelineModel m;
    for (std::size_t l = 0; l < L; ++l) {
        m.h1_marginals.push_back(kde_fit(h1_train.column(l)));
        m.h0_marginals.push_back(kde_fit(h0_train.column(l)));
    }
    m.bank = solve_thresholds(m.h0_marginals, opt.beta);
    m.rates = local_rates(m.h1_marginals, m.h0_marginals, m.bank);

    const Matrix pseudo1 = ecdf_transform(h1_train);
    const Matrix pseudo0 = ecdf_transform(h0_train);
    m.h1_subsets = build_subset_copula_set(pseudo1, opt.select);
    m.h0_subsets = build_subset_copula_set(pseudo0, opt.select);

    m.pmf = build_decision_pmf(m.h1_subsets, m.h0_subsets, m.rates, opt.mc_budget,
                               opt.seed);
    m.weights = weights_from_pmf(m.pmf);
    return m;
}

}  // namespace rvfuse
