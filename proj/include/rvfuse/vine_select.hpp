#pragma once

#include "rvfuse/common.hpp"
#include "rvfuse/vine_model.hpp"

namespace rvfuse {

// Maximum spanning tree over a symmetric nonnegative weight matrix (Prim,
// ties broken by the lexicographically smallest sorted node pair). Returns
// 0-based node pairs.
std::vector<std::pair<int, int>> max_spanning_tree(const Matrix& weights);

// Sum of weights over every spanning tree, maximized by brute force via
// Prufer enumeration (test oracle; d <= 7).
double brute_force_max_spanning_weight(const Matrix& weights);
double mst_weight(const Matrix& weights);

// Fits one pair copula for a vine edge, applying the independence shortcut
// before model selection.
FitResult fit_edge_copula(const std::vector<double>& u, const std::vector<double>& v,
                          const SelectOptions& opt);

// Sequential tree-by-tree structure selection driven by |Kendall tau|
// weights; fits a copula on every edge and assembles the R-vine array form.
FittedRVine select_structure(const Matrix& pseudo_obs, const SelectOptions& opt);

}  // namespace rvfuse
