#include "rvfuse/kernels.hpp"

#include <cstring>

namespace rvfuse::kernels {

namespace {

bool cpu_has_avx2() {
#if (defined(__x86_64__) || defined(__i386__)) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

const char* g_backend = "scalar";

}  // namespace

tau_counts_fn tau_pair_counts = tau_pair_counts_scalar;
quantize_fn quantize_ge = quantize_ge_scalar;
cvm_cross_fn cvm_cross_sum = cvm_cross_sum_scalar;

bool select_backend(const char* name) {
    if (std::strcmp(name, "scalar") == 0) {
        tau_pair_counts = tau_pair_counts_scalar;
        quantize_ge = quantize_ge_scalar;
        cvm_cross_sum = cvm_cross_sum_scalar;
        g_backend = "scalar";
        return true;
    }
#if defined(__x86_64__) || defined(__i386__)
    if (std::strcmp(name, "avx2") == 0 && cpu_has_avx2()) {
        tau_pair_counts = tau_pair_counts_avx2;
        quantize_ge = quantize_ge_avx2;
        cvm_cross_sum = cvm_cross_sum_avx2;
        g_backend = "avx2";
        return true;
    }
#endif
    return false;
}

const char* active_backend() { return g_backend; }

namespace {

struct AutoSelect {
    AutoSelect() {
        if (!select_backend("avx2")) select_backend("scalar");
    }
};
const AutoSelect g_auto_select;

}  // namespace

}  // namespace rvfuse::kernels
