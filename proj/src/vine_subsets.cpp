#include "rvfuse/vine_subsets.hpp"

#include <algorithm>
#include <map>

namespace rvfuse {

namespace {

std::vector<std::vector<int>> all_subsets_geq2(int L) {
    std::vector<std::vector<int>> out;
    for (int mask = 1; mask < (1 << L); ++mask) {
        if (__builtin_popcount(static_cast<unsigned>(mask)) < 2) continue;
        std::vector<int> s;
        for (int v = 1; v <= L; ++v)
            if (mask & (1 << (v - 1))) s.push_back(v);
        out.push_back(std::move(s));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    });
    return out;
}

// Maps subset labels through `labels[i] -> i+1` relabeling used by sub-vines.
std::vector<int> original_labels(const std::vector<int>& relabeled,
                                 const std::vector<int>& labels) {
    std::vector<int> out;
    out.reserve(relabeled.size());
    for (int v : relabeled) out.push_back(labels[v - 1]);
    std::sort(out.begin(), out.end());
    return out;
}

// Pair copula of the tree-1 edge in column `col`, oriented so the first
// argument belongs to the smaller variable label.
BivariateCopula column_pair_copula(const FittedRVine& vine, int col) {
    const int d = vine.dim();
    BivariateCopula c = vine.edge_copula(d, col);
    if (vine.array().diag(col) > vine.array()(d, col)) c = c.swapped();
    return c;
}

}  // namespace

std::vector<std::vector<int>> nested_margin_subsets(const RVineArray& m) {
    const int d = m.dim();
    std::vector<std::vector<int>> out;
    for (int col = 1; col <= d - 1; ++col) {
        std::vector<int> pair{m.diag(col), m(d, col)};
        std::sort(pair.begin(), pair.end());
        out.push_back(std::move(pair));
        std::vector<int> suffix;
        for (int i = col; i <= d; ++i) suffix.push_back(m(i, col));
        std::sort(suffix.begin(), suffix.end());
        out.push_back(std::move(suffix));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    });
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

SubsetCdfValue subset_copula_cdf(const SubsetEvaluator& ev,
                                 const std::vector<double>& margins,
                                 std::size_t mc_budget, std::uint64_t seed,
                                 double se_target) {
    if (margins.size() != ev.subset.size())
        throw domain_error("subset_copula_cdf: margin count mismatch");
    SubsetCdfValue out;
    for (double m : margins) {
        if (m <= 0.0) return out;  // zero margin short-circuits to 0 exactly
    }
    if (ev.subset.size() == 2) {
        if (!ev.pair) throw domain_error("subset_copula_cdf: missing pair copula");
        out.value = ev.pair->cdf(margins[0], margins[1]);
        return out;
    }
    if (!ev.vine) throw domain_error("subset_copula_cdf: missing subset vine");
    if (ev.vine->all_independence()) {
        out.value = 1.0;
        for (double m : margins) out.value *= std::min(m, 1.0);
        return out;
    }
    const auto [value, se] = ev.vine->mc_cdf(margins, mc_budget, seed);
    out.value = value;
    out.se = se;
    out.se_warning = se > se_target;
    return out;
}

const SubsetEvaluator& SubsetCopulaSet::at(const std::vector<int>& subset) const {
    for (const auto& ev : evaluators) {
        if (ev.subset == subset) return ev;
    }
    throw domain_error("SubsetCopulaSet: subset not found");
}

SubsetCopulaSet build_subset_copula_set(const Matrix& pseudo_obs,
                                        const SelectOptions& opt) {
    const int L = static_cast<int>(pseudo_obs.cols());
    if (L < 2) throw fit_error("build_subset_copula_set: need at least 2 sensors");

    SubsetCopulaSet set;
    set.L = L;
    set.full_vine = select_structure(pseudo_obs, opt);

    std::map<std::vector<int>, SubsetEvaluator> cover;

    // Registers the nested margins of `vine` (on original labels `labels`).
    auto register_nested = [&](const FittedRVine& vine, const std::vector<int>& labels,
                               SubsetEvaluator::Provenance prov) {
        const int d = vine.dim();
        for (int col = 1; col <= d - 1; ++col) {
            std::vector<int> pair{vine.array().diag(col), vine.array()(d, col)};
            std::sort(pair.begin(), pair.end());
            const auto pair_orig = original_labels(pair, labels);
            if (!cover.count(pair_orig)) {
                SubsetEvaluator ev;
                ev.subset = pair_orig;
                ev.provenance = prov;
                ev.pair = column_pair_copula(vine, col);
                cover.emplace(pair_orig, std::move(ev));
            }
            std::vector<int> suffix;
            for (int i = col; i <= d; ++i) suffix.push_back(vine.array()(i, col));
            std::sort(suffix.begin(), suffix.end());
            if (suffix.size() < 3) continue;
            const auto suffix_orig = original_labels(suffix, labels);
            if (!cover.count(suffix_orig)) {
                SubsetEvaluator ev;
                ev.subset = suffix_orig;
                ev.provenance = prov;
                std::vector<int> sub_labels;
                ev.vine = vine.margin_vine(col, &sub_labels);
                cover.emplace(suffix_orig, std::move(ev));
            }
        }
    };

    std::vector<int> full_labels(L);
    for (int v = 1; v <= L; ++v) full_labels[v - 1] = v;
    register_nested(set.full_vine, full_labels, SubsetEvaluator::Provenance::NestedMargin);

    // Remaining subsets, largest first; each sub-vine fit also covers its own
    // nested margins.
    auto subsets = all_subsets_geq2(L);
    std::sort(subsets.begin(), subsets.end(), [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return a.size() > b.size();
        return a < b;
    });
    for (const auto& t : subsets) {
        if (cover.count(t)) continue;
        Matrix cols(pseudo_obs.rows(), t.size());
        for (std::size_t r = 0; r < pseudo_obs.rows(); ++r)
            for (std::size_t c = 0; c < t.size(); ++c)
                cols(r, c) = pseudo_obs(r, t[c] - 1);
        FittedRVine sub = select_structure(cols, opt);
        SubsetEvaluator ev;
        ev.subset = t;
        ev.provenance = SubsetEvaluator::Provenance::SubVine;
        if (t.size() == 2) {
            ev.pair = column_pair_copula(sub, 1);
        } else {
            ev.vine = sub;
        }
        register_nested(sub, t, SubsetEvaluator::Provenance::SubVine);
        cover.insert_or_assign(t, std::move(ev));
    }

    for (auto& [key, ev] : cover) set.evaluators.push_back(std::move(ev));
    std::sort(set.evaluators.begin(), set.evaluators.end(),
              [](const SubsetEvaluator& a, const SubsetEvaluator& b) {
                  if (a.subset.size() != b.subset.size())
                      return a.subset.size() < b.subset.size();
                  return a.subset < b.subset;
              });
    return set;
}

SubsetCopulaSet independence_subset_set(int L) {
    if (L < 1) throw domain_error("independence_subset_set: L must be >= 1");
    SubsetCopulaSet set;
    set.L = L;
    for (const auto& t : all_subsets_geq2(L)) {
        SubsetEvaluator ev;
        ev.subset = t;
        ev.provenance = SubsetEvaluator::Provenance::SubVine;
        if (t.size() == 2) {
            ev.pair = BivariateCopula::independence();
        } else {
            const int k = static_cast<int>(t.size());
            // All-independence vine on k variables: any valid array works.
            VineTreeSequence trees(k - 1);
            // D-vine path 1-2-...-k.
            for (int s = 1; s <= k - 1; ++s) {
                for (int i = 1; i + s <= k; ++i) {
                    VineEdge e;
                    e.a = i;
                    e.b = i + s;
                    for (int m = i + 1; m < i + s; ++m) e.conditioning.push_back(m);
                    trees[s - 1].push_back(e);
                }
            }
            RVineArray arr = array_from_trees(trees);
            std::vector<std::vector<BivariateCopula>> cops(k - 1);
            for (int col = 1; col <= k - 1; ++col)
                cops[col - 1].assign(k - col, BivariateCopula::independence());
            ev.vine = FittedRVine(arr, std::move(cops));
        }
        set.evaluators.push_back(std::move(ev));
    }
    return set;
}

}  // namespace rvfuse
