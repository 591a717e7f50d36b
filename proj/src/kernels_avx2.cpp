#include "rvfuse/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

namespace rvfuse::kernels {

void tau_pair_counts_avx2(const double* x, const double* y, std::size_t n,
                          TauCounts* out) {
    TauCounts c;
    const __m256d zero = _mm256_setzero_pd();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const __m256d xi = _mm256_set1_pd(x[i]);
        const __m256d yi = _mm256_set1_pd(y[i]);
        std::size_t j = i + 1;
        std::uint64_t conc = 0, disc = 0, tx = 0, ty = 0, txy = 0;
        for (; j + 4 <= n; j += 4) {
            const __m256d dx = _mm256_sub_pd(xi, _mm256_loadu_pd(x + j));
            const __m256d dy = _mm256_sub_pd(yi, _mm256_loadu_pd(y + j));
            const __m256d xpos = _mm256_cmp_pd(dx, zero, _CMP_GT_OQ);
            const __m256d xneg = _mm256_cmp_pd(dx, zero, _CMP_LT_OQ);
            const __m256d ypos = _mm256_cmp_pd(dy, zero, _CMP_GT_OQ);
            const __m256d yneg = _mm256_cmp_pd(dy, zero, _CMP_LT_OQ);
            const __m256d xeq = _mm256_cmp_pd(dx, zero, _CMP_EQ_OQ);
            const __m256d yeq = _mm256_cmp_pd(dy, zero, _CMP_EQ_OQ);
            const int mconc = _mm256_movemask_pd(_mm256_or_pd(
                _mm256_and_pd(xpos, ypos), _mm256_and_pd(xneg, yneg)));
            const int mdisc = _mm256_movemask_pd(_mm256_or_pd(
                _mm256_and_pd(xpos, yneg), _mm256_and_pd(xneg, ypos)));
            const int mtxy = _mm256_movemask_pd(_mm256_and_pd(xeq, yeq));
            const int mtx = _mm256_movemask_pd(xeq);
            const int mty = _mm256_movemask_pd(yeq);
            conc += static_cast<unsigned>(__builtin_popcount(mconc));
            disc += static_cast<unsigned>(__builtin_popcount(mdisc));
            txy += static_cast<unsigned>(__builtin_popcount(mtxy));
            tx += static_cast<unsigned>(__builtin_popcount(mtx & ~mtxy));
            ty += static_cast<unsigned>(__builtin_popcount(mty & ~mtxy));
        }
        for (; j < n; ++j) {
            const double dx = x[i] - x[j];
            const double dy = y[i] - y[j];
            if (dx == 0.0) {
                if (dy == 0.0) ++txy;
                else ++tx;
            } else if (dy == 0.0) {
                ++ty;
            } else if ((dx > 0.0) == (dy > 0.0)) {
                ++conc;
            } else {
                ++disc;
            }
        }
        c.concordant += conc;
        c.discordant += disc;
        c.tie_x += tx;
        c.tie_y += ty;
        c.tie_xy += txy;
    }
    *out = c;
}

void quantize_ge_avx2(const double* z, std::size_t n, double threshold,
                      std::uint8_t* bits) {
    const __m256d thr = _mm256_set1_pd(threshold);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(z + i);
        const int m = _mm256_movemask_pd(_mm256_cmp_pd(v, thr, _CMP_GE_OQ));
        bits[i] = static_cast<std::uint8_t>(m & 1);
        bits[i + 1] = static_cast<std::uint8_t>((m >> 1) & 1);
        bits[i + 2] = static_cast<std::uint8_t>((m >> 2) & 1);
        bits[i + 3] = static_cast<std::uint8_t>((m >> 3) & 1);
    }
    for (; i < n; ++i) bits[i] = (z[i] >= threshold) ? 1 : 0;
}

double cvm_cross_sum_avx2(const double* const* cols, std::size_t n, std::size_t d) {
    const __m256d one = _mm256_set1_pd(1.0);
    __m256d acc = _mm256_setzero_pd();
    double tail = 0.0;
    const std::size_t nblk = n - n % 4;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t m = 0; m < nblk; m += 4) {
            __m256d p = one;
            for (std::size_t j = 0; j < d; ++j) {
                const __m256d wij = _mm256_set1_pd(cols[j][i]);
                const __m256d wmj = _mm256_loadu_pd(cols[j] + m);
                p = _mm256_mul_pd(p, _mm256_sub_pd(one, _mm256_max_pd(wij, wmj)));
            }
            acc = _mm256_add_pd(acc, p);
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
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    return ((lanes[0] + lanes[1]) + (lanes[2] + lanes[3])) + tail;
}

}  // namespace rvfuse::kernels

#endif  // x86
