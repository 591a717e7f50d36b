#pragma once

#include <cstddef>
#include <cstdint>

// Data-parallel inner loops used by the statistics layers. Each kernel has a
// scalar reference implementation and an AVX2 variant; the dispatched entry
// points are selected once at startup from CPU capabilities. Outputs of the
// two variants are bit-identical: the integer kernels count exactly, and the
// floating-point kernel uses the same lane-blocked accumulation order in both
// implementations.

namespace rvfuse::kernels {

struct TauCounts {
    std::uint64_t concordant = 0;
    std::uint64_t discordant = 0;
    std::uint64_t tie_x = 0;   // tied in x only
    std::uint64_t tie_y = 0;   // tied in y only
    std::uint64_t tie_xy = 0;  // tied in both
};

using tau_counts_fn = void (*)(const double* x, const double* y, std::size_t n,
                               TauCounts* out);
using quantize_fn = void (*)(const double* z, std::size_t n, double threshold,
                             std::uint8_t* bits);
using cvm_cross_fn = double (*)(const double* const* cols, std::size_t n,
                                std::size_t d);

// Scalar reference implementations.
void tau_pair_counts_scalar(const double* x, const double* y, std::size_t n,
                            TauCounts* out);
void quantize_ge_scalar(const double* z, std::size_t n, double threshold,
                        std::uint8_t* bits);
double cvm_cross_sum_scalar(const double* const* cols, std::size_t n, std::size_t d);

#if defined(__x86_64__) || defined(__i386__)
void tau_pair_counts_avx2(const double* x, const double* y, std::size_t n,
                          TauCounts* out);
void quantize_ge_avx2(const double* z, std::size_t n, double threshold,
                      std::uint8_t* bits);
double cvm_cross_sum_avx2(const double* const* cols, std::size_t n, std::size_t d);
#endif

// Dispatched entry points.
extern tau_counts_fn tau_pair_counts;
extern quantize_fn quantize_ge;
extern cvm_cross_fn cvm_cross_sum;

// "avx2" or "scalar".
const char* active_backend();

// Force a backend by name (tests); returns false if unavailable.
bool select_backend(const char* name);

}  // namespace rvfuse::kernels
