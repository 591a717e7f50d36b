#include <cmath>

#include "doctest.h"
#include "rvfuse/fusion.hpp"
#include "rvfuse/math.hpp"
#include "rvfuse/rng.hpp"
#include "test_util.hpp"

using namespace rvfuse;

namespace {

// Random strictly positive PMF pair over 2^L patterns.
DecisionPMF random_pmf(int L, Rng& rng) {
    DecisionPMF pmf;
    pmf.L = L;
    const int P = 1 << L;
    pmf.p.resize(P);
    pmf.q.resize(P);
    double sp = 0.0, sq = 0.0;
    for (int s = 0; s < P; ++s) {
        pmf.p[s] = 0.02 + rng.uniform();
        pmf.q[s] = 0.02 + rng.uniform();
        sp += pmf.p[s];
        sq += pmf.q[s];
    }
    for (int s = 0; s < P; ++s) {
        pmf.p[s] /= sp;
        pmf.q[s] /= sq;
    }
    return pmf;
}

DecisionPMF product_pmf(const std::vector<double>& p, const std::vector<double>& q) {
    const int L = static_cast<int>(p.size());
    DecisionPMF pmf;
    pmf.L = L;
    const int P = 1 << L;
    pmf.p.assign(P, 1.0);
    pmf.q.assign(P, 1.0);
    for (int s = 0; s < P; ++s) {
        for (int l = 1; l <= L; ++l) {
            const bool one = s & (1 << (L - l));
            pmf.p[s] *= one ? p[l - 1] : 1.0 - p[l - 1];
            pmf.q[s] *= one ? q[l - 1] : 1.0 - q[l - 1];
        }
    }
    return pmf;
}

BitMatrix single_pattern(int s, int L) {
    BitMatrix b(1, L);
    for (int l = 0; l < L; ++l) b(0, l) = (s >> (L - 1 - l)) & 1;
    return b;
}

// Literal alternating-product construction of the subset coefficients for
// |E| <= 3, written directly from the explicit case enumeration.
double weight_by_products(const DecisionPMF& pmf, int mask) {
    const int L = pmf.L;
    std::vector<int> members;
    for (int l = 1; l <= L; ++l)
        if (mask & (1 << (L - l))) members.push_back(l);
    const int t = static_cast<int>(members.size());
    auto pat = [&](std::vector<int> on) {
        int s = 0;
        for (int l : on) s |= 1 << (L - l);
        return s;
    };
    const double P0 = pmf.p[0], Q0 = pmf.q[0];
    if (t == 1) {
        const int s1 = pat({members[0]});
        return std::log(Q0 * pmf.p[s1] / (P0 * pmf.q[s1]));
    }
    if (t == 2) {
        const int s12 = pat(members);
        const int s1 = pat({members[0]});
        const int s2 = pat({members[1]});
        return std::log(P0 * pmf.p[s12] * pmf.q[s1] * pmf.q[s2] /
                        (Q0 * pmf.q[s12] * pmf.p[s1] * pmf.p[s2]));
    }
    if (t == 3) {
        const int s123 = pat(members);
        const int s12 = pat({members[0], members[1]});
        const int s13 = pat({members[0], members[2]});
        const int s23 = pat({members[1], members[2]});
        const int s1 = pat({members[0]});
        const int s2 = pat({members[1]});
        const int s3 = pat({members[2]});
        const double num = Q0 * pmf.q[s12] * pmf.q[s13] * pmf.q[s23] * pmf.p[s1] *
                           pmf.p[s2] * pmf.p[s3] * pmf.p[s123];
        const double den = P0 * pmf.p[s12] * pmf.p[s13] * pmf.p[s23] * pmf.q[s1] *
                           pmf.q[s2] * pmf.q[s3] * pmf.q[s123];
        return std::log(num / den);
    }
    throw std::runtime_error("weight_by_products limited to |E| <= 3");
}

}  // namespace

TEST_CASE("quantize honors the inclusive boundary and sentinels") {
    Matrix z(3, 2);
    z(0, 0) = 1.0;  z(0, 1) = -5.0;
    z(1, 0) = 0.99; z(1, 1) = 5.0;
    z(2, 0) = 1.01; z(2, 1) = 0.0;
    QuantizerBank bank;
    bank.tau = {1.0, -std::numeric_limits<double>::infinity()};
    const auto bits = quantize(z, bank);
    CHECK(bits(0, 0) == 1);  // z == tau -> 1
    CHECK(bits(1, 0) == 0);
    CHECK(bits(2, 0) == 1);
    for (int r = 0; r < 3; ++r) CHECK(bits(r, 1) == 1);  // -inf threshold
    bank.tau = {1.0, std::numeric_limits<double>::infinity()};
    const auto bits2 = quantize(z, bank);
    for (int r = 0; r < 3; ++r) CHECK(bits2(r, 1) == 0);

    Rng rng(66);
    Matrix zn(4000, 1);
    for (std::size_t r = 0; r < zn.rows(); ++r) zn(r, 0) = rng.normal();
    QuantizerBank zero{{0.0}};
    const auto nb = quantize(zn, zero);
    double mean = 0.0;
    for (std::size_t r = 0; r < nb.rows(); ++r) mean += nb(r, 0);
    mean /= nb.rows();
    CHECK(std::fabs(mean - 0.5) <= 3.0 / std::sqrt(4.0 * zn.rows()));
}

TEST_CASE("thresholds solve the local NP constraint exactly") {
    const std::vector<MarginalModel> h0{MarginalModel::gaussian(0.0, 1.0),
                                        MarginalModel::gaussian(0.0, 2.0)};
    const auto bank = solve_thresholds(h0, {0.1, 0.1});
    CHECK(bank.tau[0] == doctest::Approx(1.2815515655446004).epsilon(1e-9));
    CHECK(bank.tau[1] == doctest::Approx(2.5631031310892007).epsilon(1e-9));

    const std::vector<MarginalModel> sym{MarginalModel::gaussian(0.0, 1.0)};
    CHECK(solve_thresholds(sym, {0.5}).tau[0] == doctest::Approx(0.0).epsilon(1e-12));

    // KDE marginal: held-out false alarm close to beta.
    Rng rng(12);
    std::vector<double> train(4000);
    for (auto& x : train) x = rng.normal();
    const std::vector<MarginalModel> kde{kde_fit(train)};
    const auto kb = solve_thresholds(kde, {0.1});
    CHECK(kde[0].survival(kb.tau[0]) == doctest::Approx(0.1).epsilon(1e-8));
}

TEST_CASE("local rates from parametric marginals") {
    const std::vector<MarginalModel> h0{MarginalModel::gaussian(0.0, 1.0)};
    const std::vector<MarginalModel> h1{MarginalModel::gaussian(2.0, 1.0)};
    QuantizerBank bank{{1.2815515655446004}};
    const auto r = local_rates(h1, h0, bank);
    CHECK(r.q[0] == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(r.p[0] == doctest::Approx(math::norm_sf(1.2815515655446004 - 2.0)).epsilon(1e-12));
    CHECK(r.p[0] == doctest::Approx(0.7638).epsilon(1e-3));
    CHECK(r.useful());

    QuantizerBank low{{-40.0}};
    const auto r2 = local_rates(h1, h0, low);
    CHECK(r2.p[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r2.q[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("pmf from independence evaluators gives exact products") {
    const auto set = independence_subset_set(3);
    const std::vector<double> rates{0.8, 0.8, 0.8};
    double clamped = 0.0, presum = 0.0;
    const auto pmf = pmf_from_copulas(set, rates, 100, 1, &clamped, &presum);
    CHECK(pmf[7] == doctest::Approx(0.512).epsilon(1e-12));  // "111"
    CHECK(pmf[0] == doctest::Approx(0.008).epsilon(1e-12));  // "000"
    CHECK(clamped == 0.0);
    CHECK(presum == doctest::Approx(1.0).epsilon(1e-12));
    double total = 0.0;
    for (double v : pmf) total += v;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("P_101 expansion matches term for term") {
    // Three sensors with a known dependent model under H1.
    const auto set = independence_subset_set(3);
    const std::vector<double> p{0.7, 0.6, 0.55};
    const auto pmf = pmf_from_copulas(set, p, 100, 1);
    // P_101 = (1-p2) - C23(1-p2,1-p3) - C12(1-p1,1-p2) + C123(1-p1,1-p2,1-p3).
    auto C = [&](const std::vector<int>& t, const std::vector<double>& m) {
        return subset_copula_cdf(set.at(t), m, 100, 1).value;
    };
    const double want = (1.0 - p[1]) - C({2, 3}, {1 - p[1], 1 - p[2]}) -
                        C({1, 2}, {1 - p[0], 1 - p[1]}) +
                        C({1, 2, 3}, {1 - p[0], 1 - p[1], 1 - p[2]});
    CHECK(pmf[5] == doctest::Approx(want).epsilon(1e-12));  // "101"
}

TEST_CASE("weights: zero when P equals Q, explicit A1 value") {
    Rng rng(1);
    DecisionPMF pmf = random_pmf(3, rng);
    pmf.q = pmf.p;
    const auto w = weights_from_pmf(pmf);
    for (double a : w.a) CHECK(std::fabs(a) <= 1e-14);

    DecisionPMF pm2;
    pm2.L = 2;
    pm2.p = {0.1, 0.3, 0.2, 0.4};   // patterns 00,01,10,11
    pm2.q = {0.4, 0.3, 0.1, 0.2};
    const auto w2 = weights_from_pmf(pm2);
    // A for sensor 1 (mask 10): log(Q00 * P10 / (P00 * Q10)) = log 8.
    CHECK(w2.a[2] == doctest::Approx(std::log(8.0)).epsilon(1e-12));
}

TEST_CASE("product-form PMFs collapse to Chair-Varshney weights") {
    const std::vector<double> p{0.7, 0.62, 0.8};
    const std::vector<double> q{0.12, 0.2, 0.08};
    const auto pmf = product_pmf(p, q);
    const auto w = weights_from_pmf(pmf);
    for (int mask = 1; mask < 8; ++mask) {
        if (__builtin_popcount(static_cast<unsigned>(mask)) >= 2) {
            CHECK(std::fabs(w.a[mask]) <= 1e-10);
        }
    }
    for (int l = 1; l <= 3; ++l) {
        const double want =
            std::log(p[l - 1] * (1.0 - q[l - 1]) / (q[l - 1] * (1.0 - p[l - 1])));
        CHECK(w.a[1 << (3 - l)] == doctest::Approx(want).epsilon(1e-10));
    }
}

TEST_CASE("statistic equals the shifted log-PMF ratio on all patterns") {
    Rng rng(9);
    for (int L : {1, 2, 3, 4}) {
        for (int rep = 0; rep < 25; ++rep) {
            const auto pmf = random_pmf(L, rng);
            const auto w = weights_from_pmf(pmf);
            const double base = std::log(pmf.p[0] / pmf.q[0]);
            for (int s = 0; s < (1 << L); ++s) {
                const double got = eval_statistic(w, single_pattern(s, L));
                const double want = std::log(pmf.p[s] / pmf.q[s]) - base;
                CHECK(std::fabs(got - want) <= 1e-10);
            }
        }
    }
}

TEST_CASE("A coefficients match the literal product construction up to |E|=3") {
    Rng rng(17);
    const auto pmf = random_pmf(3, rng);
    const auto w = weights_from_pmf(pmf);
    for (int mask = 1; mask < 8; ++mask) {
        CHECK(w.a[mask] == doctest::Approx(weight_by_products(pmf, mask)).epsilon(1e-11));
    }
}

TEST_CASE("all-zero decisions score zero; single sensor counts ones") {
    DecisionPMF pmf;
    pmf.L = 1;
    pmf.p = {0.2, 0.8};
    pmf.q = {0.9, 0.1};
    const auto w = weights_from_pmf(pmf);
    BitMatrix zeros(10, 1, 0);
    CHECK(eval_statistic(w, zeros) == 0.0);
    BitMatrix three(5, 1, 0);
    three(1, 0) = three(2, 0) = three(4, 0) = 1;
    CHECK(eval_statistic(w, three) == doctest::Approx(3.0 * w.a[1]).epsilon(1e-12));
}

TEST_CASE("chair-varshney identities") {
    const std::vector<double> p{0.8, 0.7, 0.9};
    const std::vector<double> q{0.1, 0.15, 0.05};
    LocalRates rates;
    rates.p = p;
    rates.q = q;

    // p == q gives 0 for any decisions.
    LocalRates flat;
    flat.p = {0.3, 0.3};
    flat.q = {0.3, 0.3};
    Rng rng(3);
    BitMatrix bits(50, 2);
    for (std::size_t r = 0; r < 50; ++r)
        for (int c = 0; c < 2; ++c) bits(r, c) = rng.uniform() < 0.5;
    CHECK(chair_varshney(flat, bits) == doctest::Approx(0.0).epsilon(1e-12));

    // Single firing sensor with p=0.8, q=0.1.
    LocalRates one;
    one.p = {0.8};
    one.q = {0.1};
    BitMatrix fire(1, 1, 1);
    CHECK(chair_varshney(one, fire) == doctest::Approx(std::log(8.0)).epsilon(1e-12));

    // Independent-sensor PMFs: optimal statistic differs from Chair-Varshney
    // by exactly N * sum log((1-p)/(1-q)).
    const auto pmf = product_pmf(p, q);
    const auto w = weights_from_pmf(pmf);
    const std::size_t N = 40;
    BitMatrix dec(N, 3);
    for (std::size_t r = 0; r < N; ++r)
        for (int c = 0; c < 3; ++c) dec(r, c) = rng.uniform() < 0.5;
    double offset = 0.0;
    for (int l = 0; l < 3; ++l) offset += std::log((1.0 - p[l]) / (1.0 - q[l]));
    const double cv = chair_varshney(rates, dec);
    const double opt = eval_statistic(w, dec);
    CHECK(cv - opt == doctest::Approx(N * offset).epsilon(1e-10));
}

TEST_CASE("asymptotic statistics: hand case and scaling") {
    DecisionPMF pmf;
    pmf.L = 1;
    pmf.p = {0.2, 0.8};
    pmf.q = {0.9, 0.1};
    const auto w = weights_from_pmf(pmf);
    const auto st = asymptotic_stats(pmf, w, 100);
    const double l36 = std::log(36.0);
    CHECK(st.mu1 == doctest::Approx(100.0 * 0.8 * l36).epsilon(1e-12));
    CHECK(st.mu0 == doctest::Approx(100.0 * 0.1 * l36).epsilon(1e-12));
    CHECK(st.var1 == doctest::Approx(100.0 * 0.16 * l36 * l36).epsilon(1e-12));
    CHECK(st.var0 == doctest::Approx(100.0 * 0.09 * l36 * l36).epsilon(1e-12));

    const auto st2 = asymptotic_stats(pmf, w, 200);
    CHECK(st2.mu1 == doctest::Approx(2.0 * st.mu1));
    CHECK(st2.var0 == doctest::Approx(2.0 * st.var0));

    // P == Q: identical moments under both hypotheses.
    DecisionPMF same;
    same.L = 2;
    Rng rng(8);
    same.p = {0.1, 0.2, 0.3, 0.4};
    same.q = same.p;
    const auto ws = weights_from_pmf(same);
    const auto sts = asymptotic_stats(same, ws, 50);
    CHECK(sts.mu0 == doctest::Approx(sts.mu1));
    CHECK(sts.var0 == doctest::Approx(sts.var1));
}

TEST_CASE("operating point follows the asymptotic threshold rule") {
    AsymptoticStats st;
    st.mu0 = -3.0;
    st.var0 = 4.0;
    st.mu1 = 7.0;
    st.var1 = 9.0;
    st.n = 100;
    const auto half = np_operating_point(st, 0.5);
    CHECK(half.gamma == doctest::Approx(st.mu0).epsilon(1e-12));
    const auto op = np_operating_point(st, 0.1);
    CHECK(op.gamma == doctest::Approx(-3.0 + 2.0 * 1.2815515655446004).epsilon(1e-9));
    CHECK(op.predicted_pd ==
          doctest::Approx(math::norm_sf((op.gamma - 7.0) / 3.0)).epsilon(1e-12));

    AsymptoticStats equal = st;
    equal.mu1 = st.mu0;
    equal.var1 = st.var0;
    for (double a : {0.05, 0.2, 0.5}) {
        CHECK(np_operating_point(equal, a).predicted_pd == doctest::Approx(a).epsilon(1e-12));
    }
    // Monotone predicted ROC.
    double prev = 0.0;
    for (double a = 0.02; a < 1.0; a += 0.02) {
        const double pd = np_operating_point(st, a).predicted_pd;
        CHECK(pd >= prev);
        prev = pd;
    }

    AsymptoticStats degenerate = st;
    degenerate.var0 = 0.0;
    CHECK_THROWS_AS(np_operating_point(degenerate, 0.1), domain_error);
}

TEST_CASE("fuse tie rule decides H0") {
    CHECK(fuse(5.0, 5.0) == 0);
    CHECK(fuse(6.0, 5.0) == 1);
    CHECK(fuse(4.0, 5.0) == 0);
}

TEST_CASE("empirical CLT of the statistic matches the asymptotic moments") {
    // Fixed L=3 PMF pair; patterns sampled directly from the PMF.
    Rng rng(2718);
    const auto pmf = random_pmf(3, rng);
    const auto w = weights_from_pmf(pmf);
    const auto u = pattern_values(w);
    const std::size_t N = 200;
    const std::size_t trials = 2000;
    const auto st = asymptotic_stats(pmf, w, N);

    auto run = [&](const std::vector<double>& probs, double mu, double var) {
        std::vector<double> cum(probs.size());
        double acc = 0.0;
        for (std::size_t s = 0; s < probs.size(); ++s) {
            acc += probs[s];
            cum[s] = acc;
        }
        std::vector<double> stats(trials);
        for (std::size_t t = 0; t < trials; ++t) {
            double sum = 0.0;
            for (std::size_t n = 0; n < N; ++n) {
                const double x = rng.uniform();
                const int s = static_cast<int>(
                    std::lower_bound(cum.begin(), cum.end(), x) - cum.begin());
                sum += u[std::min<std::size_t>(s, probs.size() - 1)];
            }
            stats[t] = sum;
        }
        double mean = 0.0;
        for (double s : stats) mean += s;
        mean /= trials;
        double m2 = 0.0, m4 = 0.0;
        for (double s : stats) {
            const double d = s - mean;
            m2 += d * d;
            m4 += d * d * d * d;
        }
        m2 /= trials;
        m4 /= trials;
        const double se_mean = std::sqrt(var / trials);
        CHECK(std::fabs(mean - mu) <= 3.0 * se_mean);
        const double se_var = std::sqrt(std::max(0.0, m4 - m2 * m2) / trials);
        CHECK(std::fabs(m2 - var) <= 3.0 * se_var);
        // Normality with known mean/variance (Anderson-Darling, 1% critical 3.857).
        const double a2 = math::anderson_darling_normal(stats, mu, std::sqrt(var));
        CHECK(a2 < 3.857);
    };
    run(pmf.q, st.mu0, st.var0);
    run(pmf.p, st.mu1, st.var1);
}

TEST_CASE("threshold grid search never predicts below the local NP default") {
    // Exact parametric marginals and independence copulas keep this fast.
    const double s = 1.2;
    std::vector<MarginalModel> h0m, h1m;
    for (int l = 0; l < 3; ++l) {
        h0m.push_back(MarginalModel::gaussian(0.0, 1.0));
        h1m.push_back(MarginalModel::gaussian(s, 1.0));
    }
    const auto set = independence_subset_set(3);
    const std::vector<double> beta{0.1, 0.1, 0.1};
    const std::size_t N = 100;

    const auto def_bank = solve_thresholds(h0m, beta);
    const auto def_rates = local_rates(h1m, h0m, def_bank);
    const auto def_pmf = build_decision_pmf(set, set, def_rates, 1000, 1);
    const auto def_w = weights_from_pmf(def_pmf);
    const double def_pd =
        np_operating_point(asymptotic_stats(def_pmf, def_w, N), 0.1).predicted_pd;

    const auto bank =
        grid_search_thresholds(h1m, h0m, set, set, beta, 0.1, N, 1000, 1);
    const auto rates = local_rates(h1m, h0m, bank);
    const auto pmf = build_decision_pmf(set, set, rates, 1000, 1);
    const auto w = weights_from_pmf(pmf);
    const double pd =
        np_operating_point(asymptotic_stats(pmf, w, N), 0.1).predicted_pd;
    CHECK(pd >= def_pd - 1e-12);
}
