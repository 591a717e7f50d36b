#pragma once

#include "rvfuse/vine_model.hpp"

namespace rvfuse {

// Cramer-von Mises distance of rows of w (in the unit hypercube) from the
// independence-uniform distribution:
//   N * int (D_N(w) - prod_j w_j)^2 dw, in closed form.
double cvm_statistic_uniform(const Matrix& w);

struct GofResult {
    double statistic = 0.0;
    double p_value = 0.0;
    int replicates = 0;  // completed bootstrap replicates
    int skipped = 0;     // replicates whose refit failed
};

// Parametric bootstrap goodness-of-fit: the observed statistic is the CvM
// distance of the Rosenblatt-transformed data; each replicate samples from
// the fitted model, rank-transforms, refits with the model's own selection
// options and recomputes the statistic.
GofResult gof_bootstrap(const FittedRVine& vine, const Matrix& pseudo_obs, int B,
                        std::uint64_t seed, unsigned threads = 0);

}  // namespace rvfuse
