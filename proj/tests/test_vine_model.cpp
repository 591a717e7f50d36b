#include <cmath>
#include <map>

#include "doctest.h"
#include "rvfuse/margins.hpp"
#include "rvfuse/math.hpp"
#include "rvfuse/rng.hpp"
#include "rvfuse/vine_array.hpp"
#include "rvfuse/vine_model.hpp"
#include "test_util.hpp"
#include "vine_fixtures.hpp"

using namespace rvfuse;

namespace {

BivariateCopula gauss(double rho) {
    CopulaParams p;
    p.rho = rho;
    return BivariateCopula({FamilyKind::Gaussian, 0}, p);
}

BivariateCopula clayton(double phi) {
    CopulaParams p;
    p.phi = phi;
    return BivariateCopula({FamilyKind::Clayton, 0}, p);
}

// All-independence vine of dimension d on a D-vine path structure.
FittedRVine independence_vine(int d) {
    VineTreeSequence trees(d - 1);
    for (int s = 1; s <= d - 1; ++s) {
        for (int i = 1; i + s <= d; ++i) {
            VineEdge e;
            e.a = i;
            e.b = i + s;
            for (int m = i + 1; m < i + s; ++m) e.conditioning.push_back(m);
            trees[s - 1].push_back(e);
        }
    }
    const RVineArray arr = array_from_trees(trees);
    std::vector<std::vector<BivariateCopula>> cops(d - 1);
    for (int col = 1; col <= d - 1; ++col)
        cops[col - 1].assign(d - col, BivariateCopula::independence());
    return FittedRVine(arr, std::move(cops));
}

}  // namespace

TEST_CASE("independence vine has zero log density") {
    const auto v = independence_vine(4);
    CHECK(v.log_density({0.2, 0.9, 0.4, 0.66}) == 0.0);
}

TEST_CASE("2-dim vine density equals its single pair copula") {
    const RVineArray arr({{2}, {1, 1}});
    std::vector<std::vector<BivariateCopula>> cops{{clayton(2.5)}};
    const FittedRVine v(arr, std::move(cops));
    for (double u : {0.2, 0.7}) {
        for (double w : {0.33, 0.81}) {
            CHECK(v.log_density({u, w}) ==
                  doctest::Approx(clayton(2.5).log_pdf(u, w)).epsilon(1e-13));
        }
    }
}

TEST_CASE("5-dim density matches the hand-coded ten-factor expansion") {
    const auto v = testutil::fixture_worked_gaussian_vine();
    Rng rng(31);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> u(5);
        for (auto& x : u) x = rng.uniform(0.02, 0.98);
        const double got = std::exp(v.log_density(u));
        const double want = testutil::fixture_expansion_density(u);
        CHECK(got == doctest::Approx(want).epsilon(1e-10));
    }
}

TEST_CASE("sampling is deterministic in the seed") {
    const auto v = testutil::fixture_worked_gaussian_vine();
    const auto a = v.sample(64, 2024);
    const auto b = v.sample(64, 2024);
    CHECK(a.data() == b.data());
    const auto c = v.sample(64, 2025);
    CHECK(a.data() != c.data());
}

TEST_CASE("independence vine samples are uniform per column") {
    const auto v = independence_vine(3);
    const auto s = v.sample(5000, 99);
    for (int col = 0; col < 3; ++col) {
        const double d = math::ks_uniform_statistic(s.column(col));
        CHECK(math::ks_pvalue(d, s.rows()) > 0.01);
    }
}

TEST_CASE("first-tree Clayton vine reproduces its pair tau when sampled") {
    // Tree 1: (1,2), (2,3) with Clayton(2); tree 2 independent.
    VineTreeSequence trees(2);
    trees[0] = {{1, 2, {}}, {2, 3, {}}};
    trees[1] = {{1, 3, {2}}};
    const auto arr = array_from_trees(trees);
    std::vector<std::vector<BivariateCopula>> cops(2);
    for (int col = 1; col <= 2; ++col) {
        for (int row = col + 1; row <= 3; ++row) {
            const int a = std::min(arr.diag(col), arr(row, col));
            const int b = std::max(arr.diag(col), arr(row, col));
            if (row == 3 && ((a == 1 && b == 2) || (a == 2 && b == 3)))
                cops[col - 1].push_back(clayton(2.0));
            else
                cops[col - 1].push_back(BivariateCopula::independence());
        }
    }
    const FittedRVine v(arr, std::move(cops));
    const auto s = v.sample(5000, 7);
    CHECK(std::fabs(kendall_tau(s.column(0), s.column(1)) - 0.5) < 0.05);
    CHECK(std::fabs(kendall_tau(s.column(1), s.column(2)) - 0.5) < 0.05);
}

TEST_CASE("rosenblatt of an independence vine is a permutation-free identity") {
    const auto v = independence_vine(3);
    const std::vector<double> u{0.3, 0.6, 0.85};
    const auto w = v.rosenblatt(u);
    // Coordinates map one-to-one onto the diagonal order.
    std::vector<double> sorted_u = u, sorted_w = w;
    std::sort(sorted_u.begin(), sorted_u.end());
    std::sort(sorted_w.begin(), sorted_w.end());
    for (int i = 0; i < 3; ++i) CHECK(sorted_w[i] == doctest::Approx(sorted_u[i]));
}

TEST_CASE("rosenblatt inverts sampling within 1e-6") {
    const auto v = testutil::fixture_worked_gaussian_vine();
    Rng rng(5);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> w(5);
        for (auto& x : w) x = rng.uniform(0.02, 0.98);
        const auto u = v.inverse_rosenblatt(w);
        const auto w2 = v.rosenblatt(u);
        for (int i = 0; i < 5; ++i) CHECK(std::fabs(w2[i] - w[i]) <= 1e-6);
    }
}

TEST_CASE("rosenblatt of model samples is uniform") {
    const auto v = testutil::fixture_worked_gaussian_vine();
    const auto s = v.sample(2000, 11);
    Matrix w(s.rows(), s.cols());
    std::vector<double> u(5);
    for (std::size_t r = 0; r < s.rows(); ++r) {
        for (int c = 0; c < 5; ++c) u[c] = s(r, c);
        const auto t = v.rosenblatt(u);
        for (int c = 0; c < 5; ++c) w(r, c) = t[c];
    }
    for (int c = 0; c < 5; ++c) {
        const double d = math::ks_uniform_statistic(w.column(c));
        CHECK(math::ks_pvalue(d, w.rows()) > 0.01);
    }
}

TEST_CASE("3-dim density normalizes under Monte Carlo") {
    // Mixed 3-dim vine.
    VineTreeSequence trees(2);
    trees[0] = {{1, 2, {}}, {2, 3, {}}};
    trees[1] = {{1, 3, {2}}};
    const auto arr = array_from_trees(trees);
    std::vector<std::vector<BivariateCopula>> cops(2);
    for (int col = 1; col <= 2; ++col) {
        for (int row = col + 1; row <= 3; ++row) {
            const int a = std::min(arr.diag(col), arr(row, col));
            const int b = std::max(arr.diag(col), arr(row, col));
            if (a == 1 && b == 2 && row == 3) cops[col - 1].push_back(clayton(1.5));
            else if (a == 2 && b == 3 && row == 3) cops[col - 1].push_back(gauss(0.6));
            else cops[col - 1].push_back(gauss(0.25));
        }
    }
    const FittedRVine v(arr, std::move(cops));
    Rng rng(123);
    const std::size_t n = 30000;
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double val =
            std::exp(v.log_density({rng.uniform(), rng.uniform(), rng.uniform()}));
        s += val;
        s2 += val * val;
    }
    const double mean = s / n;
    const double se = std::sqrt((s2 / n - mean * mean) / n);
    CHECK(std::fabs(mean - 1.0) <= 3.0 * se);
}

TEST_CASE("margin vine of the worked structure matches a direct construction") {
    const auto v = testutil::fixture_worked_gaussian_vine();
    std::vector<int> labels;
    const auto m123 = v.margin_vine(3, &labels);  // suffix set {1,3,2}
    CHECK(labels == std::vector<int>{1, 2, 3});
    CHECK(m123.dim() == 3);

    // Direct 3-dim model with the same edges (1,2), (2,3), (1,3|2).
    VineTreeSequence trees(2);
    trees[0] = {{1, 2, {}}, {2, 3, {}}};
    trees[1] = {{1, 3, {2}}};
    const auto arr = array_from_trees(trees);
    const auto rho = testutil::fixture_rho_by_edge();
    std::vector<std::vector<BivariateCopula>> cops(2);
    for (int col = 1; col <= 2; ++col) {
        for (int row = col + 1; row <= 3; ++row) {
            std::vector<int> key{std::min(arr.diag(col), arr(row, col)),
                                 std::max(arr.diag(col), arr(row, col))};
            for (int i = row + 1; i <= 3; ++i) key.push_back(arr(i, col));
            cops[col - 1].push_back(gauss(rho.at(key)));
        }
    }
    const FittedRVine direct(arr, std::move(cops));
    Rng rng(77);
    for (int rep = 0; rep < 50; ++rep) {
        const std::vector<double> u{rng.uniform(), rng.uniform(), rng.uniform()};
        CHECK(m123.log_density(u) == doctest::Approx(direct.log_density(u)).epsilon(1e-12));
    }
}

TEST_CASE("mc_cdf agrees with the closed form in two dimensions") {
    const RVineArray arr({{2}, {1, 1}});
    std::vector<std::vector<BivariateCopula>> cops{{gauss(0.55)}};
    const FittedRVine v(arr, std::move(cops));
    const auto [est, se] = v.mc_cdf({0.35, 0.7}, 60000, 42);
    CHECK(se < 3e-3);
    CHECK(std::fabs(est - gauss(0.55).cdf(0.35, 0.7)) <= 4.0 * std::max(se, 1e-4));
    const auto zero = v.mc_cdf({0.0, 0.7}, 1000, 1);
    CHECK(zero.first == 0.0);
}

TEST_CASE("model samples score higher average log density than uniforms") {
    const auto v = testutil::fixture_worked_gaussian_vine();
    const auto s = v.sample(2000, 404);
    double on_model = 0.0;
    std::vector<double> u(5);
    for (std::size_t r = 0; r < s.rows(); ++r) {
        for (int c = 0; c < 5; ++c) u[c] = s(r, c);
        const double ld = v.log_density(u);
        CHECK(std::isfinite(ld));
        on_model += ld;
    }
    on_model /= s.rows();
    Rng rng(405);
    double on_uniform = 0.0;
    for (int r = 0; r < 2000; ++r) {
        for (int c = 0; c < 5; ++c) u[c] = rng.uniform();
        on_uniform += v.log_density(u);
    }
    on_uniform /= 2000.0;
    CHECK(on_model > on_uniform);  // empirical KL nonnegativity
}
