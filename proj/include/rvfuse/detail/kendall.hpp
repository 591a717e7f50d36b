#pragma once

#include <cstddef>

namespace rvfuse::detail {

// Kendall tau-b over raw arrays; shared between the margins layer and the
// copula fitter. Sets *degenerate when either column is constant.
double kendall_tau_impl(const double* x, const double* y, std::size_t n,
                        bool* degenerate);

}  // namespace rvfuse::detail
