#include "rvfuse/vine_gof.hpp"

#include <cmath>

#include "rvfuse/kernels.hpp"
#include "rvfuse/margins.hpp"
#include "rvfuse/parallel.hpp"
#include "rvfuse/rng.hpp"
#include "rvfuse/vine_select.hpp"

namespace rvfuse {

double cvm_statistic_uniform(const Matrix& w) {
    const std::size_t n = w.rows();
    const std::size_t d = w.cols();
    if (n == 0 || d == 0) throw domain_error("cvm_statistic_uniform: empty input");
    // Column-major copies for the pairwise kernel.
    std::vector<std::vector<double>> cols(d);
    std::vector<const double*> ptrs(d);
    for (std::size_t j = 0; j < d; ++j) {
        cols[j] = w.column(j);
        ptrs[j] = cols[j].data();
    }
    double t1 = 0.0;  // sum_n prod_j (1 - w_nj^2) / 2
    for (std::size_t r = 0; r < n; ++r) {
        double p = 1.0;
        for (std::size_t j = 0; j < d; ++j) p *= 0.5 * (1.0 - cols[j][r] * cols[j][r]);
        t1 += p;
    }
    const double t2 = kernels::cvm_cross_sum(ptrs.data(), n, d);
    const double nn = static_cast<double>(n);
    return nn * (std::pow(3.0, -static_cast<double>(d)) - 2.0 / nn * t1 +
                 t2 / (nn * nn));
}

namespace {

double rosenblatt_cvm(const FittedRVine& vine, const Matrix& pseudo) {
    Matrix w(pseudo.rows(), pseudo.cols());
    std::vector<double> u(pseudo.cols());
    for (std::size_t r = 0; r < pseudo.rows(); ++r) {
        for (std::size_t c = 0; c < pseudo.cols(); ++c) u[c] = pseudo(r, c);
        const auto t = vine.rosenblatt(u);
        for (std::size_t c = 0; c < pseudo.cols(); ++c) w(r, c) = t[c];
    }
    return cvm_statistic_uniform(w);
}

}  // namespace

GofResult gof_bootstrap(const FittedRVine& vine, const Matrix& pseudo_obs, int B,
                        std::uint64_t seed, unsigned threads) {
    if (B < 50) throw domain_error("gof_bootstrap: need B >= 50 replicates");
    if (static_cast<int>(pseudo_obs.cols()) != vine.dim())
        throw domain_error("gof_bootstrap: dimension mismatch");

    GofResult out;
    out.statistic = rosenblatt_cvm(vine, pseudo_obs);

    const std::size_t n = pseudo_obs.rows();
    std::vector<double> stats(B, 0.0);
    std::vector<char> ok(B, 0);
    parallel_for(static_cast<std::size_t>(B), threads, [&](std::size_t b) {
        try {
            const Matrix sampled = vine.sample(n, Rng::derive(seed, b));
            const Matrix ranked = ecdf_transform(sampled);
            const FittedRVine refit = select_structure(ranked, vine.fit_options);
            stats[b] = rosenblatt_cvm(refit, ranked);
            ok[b] = 1;
        } catch (const std::exception&) {
            ok[b] = 0;
        }
    });

    int exceed = 0;
    for (int b = 0; b < B; ++b) {
        if (!ok[b]) {
            ++out.skipped;
            continue;
        }
        ++out.replicates;
        if (stats[b] > out.statistic) ++exceed;
    }
    if (out.replicates == 0) throw numeric_error("gof_bootstrap: all replicates failed");
    out.p_value = static_cast<double>(exceed) / out.replicates;
    return out;
}

}  // namespace rvfuse
