#include "rvfuse/vine_select.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "rvfuse/math.hpp"

namespace rvfuse {

namespace {

// Candidate edge label used for deterministic tie-breaking: the sorted
// conditioned pair followed by the conditioning set.
using EdgeLabel = std::vector<int>;

struct Candidate {
    int n1 = 0, n2 = 0;  // node indices in the previous level
    double weight = 0.0;
    EdgeLabel label;
};

bool better(const Candidate& a, const Candidate& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return a.label < b.label;
}

// Generic Prim over an explicit candidate list on `n` nodes.
std::vector<int> prim_select(int n, const std::vector<Candidate>& cands) {
    std::vector<bool> in_tree(n, false);
    in_tree[0] = true;
    std::vector<int> chosen;
    for (int step = 0; step + 1 < n; ++step) {
        int best = -1;
        for (int c = 0; c < static_cast<int>(cands.size()); ++c) {
            const bool cross = in_tree[cands[c].n1] != in_tree[cands[c].n2];
            if (!cross) continue;
            if (best < 0 || better(cands[c], cands[best])) best = c;
        }
        if (best < 0) throw fit_error("spanning tree selection: graph not connected");
        chosen.push_back(best);
        in_tree[cands[best].n1] = true;
        in_tree[cands[best].n2] = true;
    }
    return chosen;
}

struct FittedEdge {
    int a = 0, b = 0;                 // conditioned pair, a < b
    std::vector<int> conditioning;    // sorted
    std::vector<int> complete_union;  // sorted
    int child1 = -1, child2 = -1;     // node ids in the previous level
    BivariateCopula copula;           // oriented (a, b)
    double loglik = 0.0;
    std::vector<double> data_a;       // F(a | union \ a)
    std::vector<double> data_b;       // F(b | union \ b)
};

void sort_level(std::vector<FittedEdge>& lv) {
    std::sort(lv.begin(), lv.end(), [](const FittedEdge& x, const FittedEdge& y) {
        if (x.a != y.a) return x.a < y.a;
        if (x.b != y.b) return x.b < y.b;
        return x.conditioning < y.conditioning;
    });
}

}  // namespace

std::vector<std::pair<int, int>> max_spanning_tree(const Matrix& weights) {
    const int n = static_cast<int>(weights.rows());
    std::vector<Candidate> cands;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            Candidate c;
            c.n1 = i;
            c.n2 = j;
            c.weight = weights(i, j);
            c.label = {i, j};
            cands.push_back(std::move(c));
        }
    }
    std::vector<std::pair<int, int>> out;
    for (int c : prim_select(n, cands)) out.emplace_back(cands[c].n1, cands[c].n2);
    std::sort(out.begin(), out.end());
    return out;
}

double mst_weight(const Matrix& weights) {
    double s = 0.0;
    for (const auto& [i, j] : max_spanning_tree(weights)) s += weights(i, j);
    return s;
}

double brute_force_max_spanning_weight(const Matrix& weights) {
    const int n = static_cast<int>(weights.rows());
    if (n == 2) return weights(0, 1);
    if (n > 7) throw domain_error("brute force spanning trees limited to d <= 7");
    // Enumerate all n^(n-2) Prufer sequences.
    std::vector<int> seq(n - 2, 0);
    double best = -1e300;
    for (;;) {
        std::vector<int> deg(n, 1);
        for (int x : seq) ++deg[x];
        std::vector<bool> used(n, false);
        double w = 0.0;
        for (int x : seq) {
            int leaf = -1;
            for (int i = 0; i < n; ++i) {
                if (deg[i] == 1 && !used[i]) {
                    leaf = i;
                    break;
                }
            }
            w += weights(leaf, x);
            used[leaf] = true;
            --deg[x];
        }
        int u = -1, v = -1;
        for (int i = 0; i < n; ++i) {
            if (!used[i] && deg[i] == 1) {
                if (u < 0) u = i;
                else v = i;
            }
        }
        w += weights(u, v);
        best = std::max(best, w);
        int pos = n - 3;
        while (pos >= 0 && seq[pos] == n - 1) seq[pos--] = 0;
        if (pos < 0) break;
        ++seq[pos];
    }
    return best;
}

FitResult fit_edge_copula(const std::vector<double>& u, const std::vector<double>& v,
                          const SelectOptions& opt) {
    if (opt.independence_shortcut) {
        const std::size_t n = u.size();
        const double tau = kendall_tau(u, v);
        const double sd = std::sqrt(2.0 * (2.0 * n + 5.0) / (9.0 * n * (n - 1.0)));
        if (std::fabs(tau) < 0.02 && std::fabs(tau) <= 1.959964 * sd) {
            FitResult r;
            r.copula = BivariateCopula::independence();
            r.loglik = 0.0;
            r.aic = 0.0;
            r.bic = 0.0;
            r.n = n;
            return r;
        }
    }
    return select_best(u, v, opt.library, opt.criterion);
}

FittedRVine select_structure(const Matrix& pseudo_obs, const SelectOptions& opt) {
    const int L = static_cast<int>(pseudo_obs.cols());
    const std::size_t n = pseudo_obs.rows();
    if (L < 2) throw fit_error("select_structure: need at least 2 variables");
    if (n < 30) throw fit_error("select_structure: need at least 30 observations");

    std::vector<std::vector<double>> cols(L);
    for (int c = 0; c < L; ++c) {
        cols[c] = pseudo_obs.column(c);
        for (auto& x : cols[c]) x = clamp_unit(x);
    }

    VineTreeSequence trees;
    // Every fitted edge keyed by (conditioned pair, conditioning).
    std::map<std::pair<std::pair<int, int>, std::vector<int>>,
             std::pair<BivariateCopula, double>>
        fitted;

    std::vector<FittedEdge> level;
    {
        Matrix taus = tau_matrix(pseudo_obs);
        Matrix w(L, L, 0.0);
        for (int i = 0; i < L; ++i)
            for (int j = 0; j < L; ++j) w(i, j) = std::fabs(taus(i, j));
        for (const auto& [i, j] : max_spanning_tree(w)) {
            FittedEdge e;
            e.a = i + 1;
            e.b = j + 1;
            e.child1 = e.a;  // variable ids double as level-0 node ids
            e.child2 = e.b;
            e.complete_union = {e.a, e.b};
            const auto fit = fit_edge_copula(cols[i], cols[j], opt);
            e.copula = fit.copula;
            e.loglik = fit.loglik;
            e.data_a.resize(n);
            e.data_b.resize(n);
            for (std::size_t r = 0; r < n; ++r) {
                e.data_a[r] = clamp_unit(e.copula.hfunc1(cols[i][r], cols[j][r]));
                e.data_b[r] = clamp_unit(e.copula.hfunc2(cols[i][r], cols[j][r]));
            }
            level.push_back(std::move(e));
        }
        sort_level(level);
    }

    auto record_level = [&](const std::vector<FittedEdge>& lv) {
        std::vector<VineEdge> t;
        for (const auto& e : lv) {
            t.push_back({e.a, e.b, e.conditioning});
            fitted[{{e.a, e.b}, e.conditioning}] = {e.copula, e.loglik};
        }
        trees.push_back(std::move(t));
    };
    record_level(level);

    for (int s = 2; s <= L - 1; ++s) {
        std::vector<FittedEdge> prev = std::move(level);
        level.clear();

        std::vector<Candidate> cands;
        struct CandData {
            int x1, x2;
            const std::vector<double>* d1;
            const std::vector<double>* d2;
            std::vector<int> conditioning;
        };
        std::vector<CandData> cdata;
        for (int i = 0; i < static_cast<int>(prev.size()); ++i) {
            for (int j = i + 1; j < static_cast<int>(prev.size()); ++j) {
                const auto& e1 = prev[i];
                const auto& e2 = prev[j];
                // Proximity: the two nodes (edges of the previous tree) must
                // share one of their own nodes.
                const bool share = e1.child1 == e2.child1 || e1.child1 == e2.child2 ||
                                   e1.child2 == e2.child1 || e1.child2 == e2.child2;
                if (!share) continue;
                std::vector<int> dset;
                std::set_intersection(e1.complete_union.begin(), e1.complete_union.end(),
                                      e2.complete_union.begin(), e2.complete_union.end(),
                                      std::back_inserter(dset));
                if (static_cast<int>(dset.size()) != s - 1) continue;
                std::vector<int> sym;
                std::set_symmetric_difference(
                    e1.complete_union.begin(), e1.complete_union.end(),
                    e2.complete_union.begin(), e2.complete_union.end(),
                    std::back_inserter(sym));
                if (sym.size() != 2) continue;
                const bool first_in_e1 = std::binary_search(
                    e1.complete_union.begin(), e1.complete_union.end(), sym[0]);
                const int x1 = first_in_e1 ? sym[0] : sym[1];
                const int x2 = first_in_e1 ? sym[1] : sym[0];
                CandData cd;
                cd.x1 = x1;
                cd.x2 = x2;
                cd.d1 = (x1 == e1.a) ? &e1.data_a : &e1.data_b;
                cd.d2 = (x2 == e2.a) ? &e2.data_a : &e2.data_b;
                cd.conditioning = dset;
                Candidate c;
                c.n1 = i;
                c.n2 = j;
                c.weight = std::fabs(kendall_tau(*cd.d1, *cd.d2));
                c.label = {std::min(x1, x2), std::max(x1, x2)};
                for (int v : dset) c.label.push_back(v);
                cands.push_back(std::move(c));
                cdata.push_back(std::move(cd));
            }
        }

        for (int ci : prim_select(static_cast<int>(prev.size()), cands)) {
            const auto& c = cands[ci];
            const auto& cd = cdata[ci];
            FittedEdge e;
            e.child1 = c.n1;
            e.child2 = c.n2;
            e.conditioning = cd.conditioning;
            const std::vector<double>* da = cd.d1;
            const std::vector<double>* db = cd.d2;
            e.a = cd.x1;
            e.b = cd.x2;
            if (e.a > e.b) {
                std::swap(e.a, e.b);
                std::swap(da, db);
            }
            e.complete_union = e.conditioning;
            e.complete_union.push_back(e.a);
            e.complete_union.push_back(e.b);
            std::sort(e.complete_union.begin(), e.complete_union.end());
            const auto fit = fit_edge_copula(*da, *db, opt);
            e.copula = fit.copula;
            e.loglik = fit.loglik;
            if (s < L - 1) {
                e.data_a.resize(n);
                e.data_b.resize(n);
                for (std::size_t r = 0; r < n; ++r) {
                    e.data_a[r] = clamp_unit(e.copula.hfunc1((*da)[r], (*db)[r]));
                    e.data_b[r] = clamp_unit(e.copula.hfunc2((*da)[r], (*db)[r]));
                }
            }
            level.push_back(std::move(e));
        }
        sort_level(level);
        record_level(level);
    }

    const RVineArray arr = array_from_trees(trees);
    const int d = arr.dim();
    std::vector<std::vector<BivariateCopula>> cops(d - 1);
    double total_ll = 0.0;
    for (int col = 1; col <= d - 1; ++col) {
        cops[col - 1].resize(d - col);
        for (int row = col + 1; row <= d; ++row) {
            const int va = arr.diag(col);
            const int vb = arr(row, col);
            std::vector<int> cond;
            for (int i = row + 1; i <= d; ++i) cond.push_back(arr(i, col));
            std::sort(cond.begin(), cond.end());
            const auto it = fitted.find({{std::min(va, vb), std::max(va, vb)}, cond});
            if (it == fitted.end())
                throw fit_error("select_structure: array edge missing from fits");
            // Stored orientation is ascending (a, b); the array wants the
            // diagonal variable first.
            BivariateCopula cop = it->second.first;
            if (va > vb) cop = cop.swapped();
            cops[col - 1][row - col - 1] = cop;
            total_ll += it->second.second;
        }
    }

    FittedRVine out(arr, std::move(cops));
    out.loglik = total_ll;
    out.fit_options = opt;
    return out;
}

}  // namespace rvfuse
