#include "rvfuse/kernels.hpp"

namespace rvfuse::kernels {

void tau_pair_counts_scalar(const double* x, const double* y, std::size_t n,
                            TauCounts* out) {
    TauCounts c;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double xi = x[i];
        const double yi = y[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = xi - x[j];
            const double dy = yi - y[j];
            if (dx == 0.0) {
                if (dy == 0.0) ++c.tie_xy;
                else ++c.tie_x;
            } else if (dy == 0.0) {
                ++c.tie_y;
            } else if ((dx > 0.0) == (dy > 0.0)) {
                ++c.concordant;
            } else {
                ++c.discordant;
            }
        }
    }
    *out = c;
}

void quantize_ge_scalar(const double* z, std::size_t n, double threshold,
                        std::uint8_t* bits) {
    for (std::size_t i = 0; i < n; ++i) bits[i] = (z[i] >= threshold) ? 1 : 0;
}

// Lane-blocked accumulation mirroring the AVX2 variant exactly: four running
// sums over the m-blocks, a separate scalar tail sum, fixed reduction order.
double cvm_cross_sum_scalar(const double* const* cols, std::size_t n, std::size_t d) {
    double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0, tail = 0.0;
    const std::size_t nblk = n - n % 4;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t m = 0; m < nblk; m += 4) {
            double p0 = 1.0, p1 = 1.0, p2 = 1.0, p3 = 1.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double wij = cols[j][i];
                const double* cj = cols[j] + m;
                p0 *= 1.0 - (wij > cj[0] ? wij : cj[0]);
                p1 *= 1.0 - (wij > cj[1] ? wij : cj[1]);
                p2 *= 1.0 - (wij > cj[2] ? wij : cj[2]);
                p3 *= 1.0 - (wij > cj[3] ? wij : cj[3]);
            }
            acc0 += p0;
            acc1 += p1;
            acc2 += p2;
            acc3 += p3;
        }
        for (std::size_t m = nblk; m < n; ++m) {
            double p = 1.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double wij = cols[j][i];
                const double wmj = cols[j][m];
                p *= 1.0 - (wij > wmj ? wij : wmj);
            }
            tail += p;
        }
    }
    return ((acc0 + acc1) + (acc2 + acc3)) + tail;
}

}  // namespace rvfuse::kernels
