#include <cmath>

#include "doctest.h"
#include "rvfuse/margins.hpp"
#include "rvfuse/rng.hpp"
#include "rvfuse/vine_gof.hpp"
#include "rvfuse/vine_subsets.hpp"
#include "test_util.hpp"

using namespace rvfuse;

namespace {

Matrix correlated_gaussian_data(int L, double load, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Matrix data(n, L);
    for (std::size_t r = 0; r < n; ++r) {
        const double common = rng.normal();
        for (int c = 0; c < L; ++c) data(r, c) = load * common + rng.normal();
    }
    return data;
}

Matrix clayton_exchangeable_data(int L, double phi, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Matrix data(n, L);
    for (std::size_t r = 0; r < n; ++r) {
        const double v = rng.gamma(1.0 / phi);
        for (int c = 0; c < L; ++c) {
            data(r, c) = std::exp(-std::log1p(rng.exponential() / v) / phi);
        }
    }
    return data;
}

}  // namespace

TEST_CASE("nested margins of the worked 5-dim array") {
    const auto subs = nested_margin_subsets(example_array_5());
    const std::vector<std::vector<int>> expect{
        {1, 2}, {2, 3}, {2, 4}, {3, 5}, {1, 2, 3}, {1, 2, 3, 4}, {1, 2, 3, 4, 5}};
    CHECK(subs == expect);
}

TEST_CASE("subset copula set covers the full lattice") {
    SelectOptions opt;
    opt.library = {{FamilyKind::Gaussian, 0}};
    const auto data = correlated_gaussian_data(3, 0.8, 600, 42);
    const auto set = build_subset_copula_set(ecdf_transform(data), opt);
    CHECK(set.L == 3);
    CHECK(set.count() == 4);  // {1,2},{1,3},{2,3},{1,2,3}
    const std::vector<std::vector<int>> expect{{1, 2}, {1, 3}, {2, 3}, {1, 2, 3}};
    for (std::size_t i = 0; i < expect.size(); ++i)
        CHECK(set.evaluators[i].subset == expect[i]);
    // Exactly one residual pair had to be fitted separately.
    int subvine = 0;
    for (const auto& ev : set.evaluators)
        subvine += (ev.provenance == SubsetEvaluator::Provenance::SubVine) ? 1 : 0;
    CHECK(subvine == 1);

    // L=2: a single nested-margin pair.
    const auto data2 = correlated_gaussian_data(2, 0.8, 600, 43);
    const auto set2 = build_subset_copula_set(ecdf_transform(data2), opt);
    CHECK(set2.count() == 1);
    CHECK(set2.evaluators[0].subset == std::vector<int>{1, 2});
    CHECK(set2.evaluators[0].provenance == SubsetEvaluator::Provenance::NestedMargin);

    // L=4 count: C(4,2)+C(4,3)+C(4,4) = 11.
    const auto data4 = correlated_gaussian_data(4, 0.8, 600, 44);
    const auto set4 = build_subset_copula_set(ecdf_transform(data4), opt);
    CHECK(set4.count() == 11);
}

TEST_CASE("pair evaluators match the closed-form edge copulas") {
    SelectOptions opt;
    opt.library = {{FamilyKind::Gaussian, 0}, {FamilyKind::Clayton, 0}};
    const auto data = correlated_gaussian_data(3, 0.9, 800, 7);
    const auto set = build_subset_copula_set(ecdf_transform(data), opt);
    for (const auto& ev : set.evaluators) {
        if (ev.subset.size() != 2) continue;
        REQUIRE(ev.pair.has_value());
        const auto v = subset_copula_cdf(ev, {0.3, 0.62}, 1000, 5);
        CHECK(v.value == doctest::Approx(ev.pair->cdf(0.3, 0.62)).epsilon(1e-12));
        CHECK(v.se == 0.0);
    }
}

TEST_CASE("independence evaluators give exact products; zero margins short-circuit") {
    const auto set = independence_subset_set(3);
    CHECK(set.count() == 4);
    const auto& triple = set.at({1, 2, 3});
    const auto v = subset_copula_cdf(triple, {0.5, 0.5, 0.5}, 10, 1);
    CHECK(v.value == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(v.se == 0.0);
    const auto z = subset_copula_cdf(triple, {0.5, 0.0, 0.5}, 10, 1);
    CHECK(z.value == 0.0);
}

TEST_CASE("triple subset MC estimate agrees with plain-indicator MC") {
    SelectOptions opt;
    opt.library = {{FamilyKind::Gaussian, 0}};
    const auto data = correlated_gaussian_data(3, 0.9, 1200, 17);
    const auto set = build_subset_copula_set(ecdf_transform(data), opt);
    const auto& ev = set.at({1, 2, 3});
    REQUIRE(ev.vine.has_value());
    const std::vector<double> margins{0.4, 0.55, 0.7};
    const auto smart = subset_copula_cdf(ev, margins, 200000, 99);

    const auto samples = ev.vine->sample(200000, 1234);
    std::size_t hits = 0;
    for (std::size_t r = 0; r < samples.rows(); ++r) {
        bool in = true;
        for (int c = 0; c < 3; ++c) in = in && samples(r, c) <= margins[c];
        hits += in ? 1 : 0;
    }
    const double plain = static_cast<double>(hits) / samples.rows();
    const double plain_se = std::sqrt(plain * (1.0 - plain) / samples.rows());
    CHECK(std::fabs(smart.value - plain) <=
          4.0 * std::sqrt(plain_se * plain_se + smart.se * smart.se));
    // Conditional MC must not be noisier than the plain indicator.
    CHECK(smart.se <= plain_se * 1.5);
}

TEST_CASE("subset cdf is componentwise nondecreasing up to MC noise") {
    SelectOptions opt;
    opt.library = {{FamilyKind::Gaussian, 0}, {FamilyKind::Gumbel, 0}};
    const auto data = clayton_exchangeable_data(3, 2.0, 900, 3);
    const auto set = build_subset_copula_set(ecdf_transform(data), opt);
    const auto& ev = set.at({1, 2, 3});
    double prev = -1.0, prev_se = 0.0;
    for (double m = 0.2; m <= 0.9; m += 0.1) {
        const auto v = subset_copula_cdf(ev, {m, 0.6, 0.7}, 50000, 77);
        CHECK(v.value + 3.0 * (v.se + prev_se) >= prev);
        prev = v.value;
        prev_se = v.se;
    }
}

TEST_CASE("cvm statistic matches a brute-force integral on a tiny sample") {
    Matrix w(3, 2);
    w(0, 0) = 0.2; w(0, 1) = 0.7;
    w(1, 0) = 0.55; w(1, 1) = 0.3;
    w(2, 0) = 0.9; w(2, 1) = 0.85;
    const int grid = 400;
    double integral = 0.0;
    for (int i = 0; i < grid; ++i) {
        const double x = (i + 0.5) / grid;
        for (int j = 0; j < grid; ++j) {
            const double y = (j + 0.5) / grid;
            double dn = 0.0;
            for (int r = 0; r < 3; ++r)
                dn += (w(r, 0) <= x && w(r, 1) <= y) ? 1.0 / 3.0 : 0.0;
            const double diff = dn - x * y;
            integral += diff * diff;
        }
    }
    integral /= grid * static_cast<double>(grid);
    CHECK(cvm_statistic_uniform(w) == doctest::Approx(3.0 * integral).epsilon(5e-3));
}

TEST_CASE("gof bootstrap: p-value in range and power against misspecification") {
    SelectOptions gauss_only;
    gauss_only.library = {{FamilyKind::Gaussian, 0}};
    gauss_only.independence_shortcut = false;

    // Matched model: moderate p-value expected (not asserted beyond range).
    const auto gdata = correlated_gaussian_data(3, 0.8, 400, 21);
    const auto gp = ecdf_transform(gdata);
    const auto gvine = select_structure(gp, gauss_only);
    const auto ok = gof_bootstrap(gvine, gp, 60, 5, 2);
    CHECK(ok.p_value >= 0.0);
    CHECK(ok.p_value <= 1.0);
    CHECK(ok.replicates + ok.skipped == 60);

    // Strong tail dependence fitted by a Gaussian vine: small p-value.
    const auto cdata = clayton_exchangeable_data(3, 3.0, 700, 22);
    const auto cp = ecdf_transform(cdata);
    const auto cvine = select_structure(cp, gauss_only);
    const auto bad = gof_bootstrap(cvine, cp, 60, 6, 2);
    CHECK(bad.p_value < ok.p_value + 1e-12);
    CHECK(bad.p_value <= 0.05);

    CHECK_THROWS_AS(gof_bootstrap(gvine, gp, 10, 1, 1), domain_error);
}
