#pragma once

#include <optional>

#include "rvfuse/vine_select.hpp"

namespace rvfuse {

// One evaluator of a subset copula CDF C_T. Pairs evaluate in closed form;
// larger subsets hold a vine model over the subset (relabeled 1..|T| in
// ascending original-label order).
struct SubsetEvaluator {
    std::vector<int> subset;  // sorted original sensor labels (1-based)
    enum class Provenance { NestedMargin, SubVine };
    Provenance provenance = Provenance::NestedMargin;
    std::optional<BivariateCopula> pair;  // |T| == 2, first argument subset[0]
    std::optional<FittedRVine> vine;      // |T| >= 3
};

struct SubsetCdfValue {
    double value = 0.0;
    double se = 0.0;
    bool se_warning = false;  // standard error above target
};

// C_T(margins) with margins aligned to the sorted subset. Bivariate subsets
// and all-independence models are exact; otherwise conditional Monte Carlo.
SubsetCdfValue subset_copula_cdf(const SubsetEvaluator& ev,
                                 const std::vector<double>& margins,
                                 std::size_t mc_budget, std::uint64_t seed,
                                 double se_target = 5e-4);

class SubsetCopulaSet {
public:
    int L = 0;
    FittedRVine full_vine;
    std::vector<SubsetEvaluator> evaluators;  // sorted by (size, lexicographic)

    const SubsetEvaluator& at(const std::vector<int>& subset) const;
    std::size_t count() const { return evaluators.size(); }
};

// The suffix variable sets readable off each array column: the tree-1 pair
// (diag, bottom) and the full column suffix, deduplicated, sorted.
std::vector<std::vector<int>> nested_margin_subsets(const RVineArray& m);

// Fits the full vine once, reuses its nested margins, then covers the rest
// of the subset lattice with sub-vine fits in decreasing dimension order
// (each sub-vine's own nested margins are reused as well).
SubsetCopulaSet build_subset_copula_set(const Matrix& pseudo_obs,
                                        const SelectOptions& opt);

// Evaluator set in which every subset copula is the independence copula
// (products of margins); used for baselines and tests.
SubsetCopulaSet independence_subset_set(int L);

}  // namespace rvfuse
