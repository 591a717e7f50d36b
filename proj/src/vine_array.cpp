#include "rvfuse/vine_array.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace rvfuse {

RVineArray::RVineArray(const std::vector<std::vector<int>>& rows) {
    d_ = static_cast<int>(rows.size());
    if (d_ < 1) throw domain_error("RVineArray: empty");
    m_.assign(static_cast<std::size_t>(d_) * d_, 0);
    for (int i = 1; i <= d_; ++i) {
        if (static_cast<int>(rows[i - 1].size()) != i)
            throw domain_error("RVineArray: row " + std::to_string(i) +
                               " must have " + std::to_string(i) + " entries");
        for (int j = 1; j <= i; ++j) at(i, j) = rows[i - 1][j - 1];
    }
}

RVineArray RVineArray::empty(int d) {
    RVineArray m;
    m.d_ = d;
    m.m_.assign(static_cast<std::size_t>(d) * d, 0);
    return m;
}

std::vector<std::vector<int>> RVineArray::rows() const {
    std::vector<std::vector<int>> out(d_);
    for (int i = 1; i <= d_; ++i) {
        out[i - 1].resize(i);
        for (int j = 1; j <= i; ++j) out[i - 1][j - 1] = (*this)(i, j);
    }
    return out;
}

RVineArray example_array_5() {
    return RVineArray({{5}, {4, 4}, {1, 1, 1}, {2, 3, 3, 3}, {3, 2, 2, 2, 2}});
}

namespace {

std::vector<int> column_suffix(const RVineArray& m, int col, int from_row) {
    std::vector<int> s;
    for (int i = from_row; i <= m.dim(); ++i) s.push_back(m(i, col));
    std::sort(s.begin(), s.end());
    return s;
}

}  // namespace

ArrayValidation validate_array(const RVineArray& m) {
    const int d = m.dim();
    auto fail = [](int col, const std::string& msg) {
        ArrayValidation v;
        v.ok = false;
        v.column = col;
        v.message = msg;
        return v;
    };

    // Entry ranges and per-column distinctness.
    for (int j = 1; j <= d; ++j) {
        std::set<int> seen;
        for (int i = j; i <= d; ++i) {
            const int e = m(i, j);
            if (e < 1 || e > d)
                return fail(j, "entry out of range in column " + std::to_string(j));
            if (!seen.insert(e).second)
                return fail(j, "repeated entry in column " + std::to_string(j));
        }
    }

    // Column nesting: entries of column i are contained in any column j < i.
    for (int i = 2; i <= d; ++i) {
        const auto si = column_suffix(m, i, i);
        for (int j = 1; j < i; ++j) {
            const auto sj = column_suffix(m, j, j);
            if (!std::includes(sj.begin(), sj.end(), si.begin(), si.end()))
                return fail(i, "column nesting violated by column " + std::to_string(i));
        }
    }

    // New diagonal entry: m(i,i) does not reappear in column i+1.
    for (int i = 1; i < d; ++i) {
        const auto nxt = column_suffix(m, i + 1, i + 1);
        if (std::binary_search(nxt.begin(), nxt.end(), m.diag(i)))
            return fail(i, "diagonal entry of column " + std::to_string(i) +
                               " reappears in column " + std::to_string(i + 1));
    }

    // Membership condition: each (m(k,i), {m(k+1,i)..m(d,i)}) appears in a
    // later column either against that column's diagonal or with it.
    for (int i = 1; i <= d - 1; ++i) {
        for (int k = i + 1; k <= d - 1; ++k) {
            const int var = m(k, i);
            const auto dset = column_suffix(m, i, k + 1);
            bool found = false;
            for (int j = i + 1; j <= d - 1 && !found; ++j) {
                if (m.diag(j) == var) {
                    for (int kp = j + 1; kp <= d && !found; ++kp)
                        found = (column_suffix(m, j, kp) == dset);
                } else {
                    for (int kp = j + 1; kp <= d && !found; ++kp) {
                        if (m(kp, j) != var) continue;
                        std::vector<int> dt = column_suffix(m, j, kp + 1);
                        dt.push_back(m.diag(j));
                        std::sort(dt.begin(), dt.end());
                        found = (dt == dset);
                    }
                }
            }
            if (!found)
                return fail(i, "membership condition violated at column " +
                                   std::to_string(i) + ", row " + std::to_string(k));
        }
    }
    return ArrayValidation{};
}

VineTreeSequence trees_from_array(const RVineArray& m) {
    const auto v = validate_array(m);
    if (!v.ok) throw domain_error("invalid R-vine array: " + v.message);
    const int d = m.dim();
    VineTreeSequence trees(d - 1);
    for (int col = 1; col <= d - 1; ++col) {
        for (int row = col + 1; row <= d; ++row) {
            VineEdge e;
            e.a = std::min(m.diag(col), m(row, col));
            e.b = std::max(m.diag(col), m(row, col));
            e.conditioning = column_suffix(m, col, row + 1);
            trees[d - row].push_back(e);  // tree level = d - row + 1
        }
    }
    for (auto& t : trees) std::sort(t.begin(), t.end());
    return trees;
}

bool same_edge_sets(const VineTreeSequence& a, const VineTreeSequence& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t s = 0; s < a.size(); ++s) {
        auto x = a[s];
        auto y = b[s];
        std::sort(x.begin(), x.end());
        std::sort(y.begin(), y.end());
        if (x != y) return false;
    }
    return true;
}

namespace {

struct EdgeNode {
    VineEdge edge;
    std::vector<int> complete_union;  // sorted
};

std::vector<int> edge_union(const VineEdge& e) {
    std::vector<int> u = e.conditioning;
    u.push_back(e.a);
    u.push_back(e.b);
    std::sort(u.begin(), u.end());
    return u;
}

bool subset_of(const std::vector<int>& small, const std::vector<int>& big) {
    return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

bool contains(const std::vector<int>& v, int x) {
    return std::binary_search(v.begin(), v.end(), x);
}

}  // namespace

RVineArray array_from_trees(const VineTreeSequence& trees) {
    const int d = static_cast<int>(trees.size()) + 1;
    if (d < 2) throw domain_error("array_from_trees: need at least one tree");
    for (int s = 0; s < d - 1; ++s) {
        if (static_cast<int>(trees[s].size()) != d - 1 - s)
            throw domain_error("array_from_trees: tree " + std::to_string(s + 1) +
                               " has the wrong edge count");
    }

    // Edge nodes with complete unions, per level.
    std::vector<std::vector<EdgeNode>> lev(d - 1);
    for (int s = 0; s < d - 1; ++s) {
        for (const auto& e : trees[s]) {
            EdgeNode n;
            n.edge = e;
            n.complete_union = edge_union(e);
            if (static_cast<int>(n.complete_union.size()) != s + 2)
                throw domain_error("array_from_trees: edge with wrong union size");
            lev[s].push_back(n);
        }
    }

    RVineArray m = RVineArray::empty(d);
    std::vector<int> removed;  // sorted retired diagonal variables

    for (int col = 1; col <= d; ++col) {
        const int dc = d - col + 1;  // remaining variable count
        if (dc == 1) {
            // Last remaining variable.
            std::vector<int> all(d);
            for (int i = 0; i < d; ++i) all[i] = i + 1;
            std::vector<int> left;
            std::set_difference(all.begin(), all.end(), removed.begin(), removed.end(),
                                std::back_inserter(left));
            m.at(d, d) = left.front();
            break;
        }
        // The one edge of the top remaining tree avoids all retired variables.
        const int top = dc - 2;  // level index (tree dc-1)
        const EdgeNode* top_edge = nullptr;
        for (const auto& n : lev[top]) {
            bool clean = true;
            for (int r : removed) clean = clean && !contains(n.complete_union, r);
            if (clean) {
                if (top_edge)
                    throw domain_error("array_from_trees: ambiguous top edge (not a vine)");
                top_edge = &n;
            }
        }
        if (!top_edge)
            throw domain_error("array_from_trees: no surviving top edge (not a vine)");

        const int x = std::max(top_edge->edge.a, top_edge->edge.b);
        m.at(col, col) = x;
        // Walk down through the trees, following the child that keeps x in
        // its conditioned pair.
        const EdgeNode* cur = top_edge;
        for (int level = top; level >= 0; --level) {
            const int partner = (cur->edge.a == x) ? cur->edge.b : cur->edge.a;
            if (cur->edge.a != x && cur->edge.b != x)
                throw domain_error("array_from_trees: chain variable left the conditioned set");
            const int row = d - (level + 1) + 1;  // tree level -> array row
            m.at(row, col) = partner;
            if (level == 0) break;
            const EdgeNode* next = nullptr;
            for (const auto& n : lev[level - 1]) {
                if (contains(n.complete_union, x) &&
                    subset_of(n.complete_union, cur->complete_union)) {
                    if (next)
                        throw domain_error("array_from_trees: ambiguous child edge");
                    next = &n;
                }
            }
            if (!next) throw domain_error("array_from_trees: missing child edge");
            cur = next;
        }
        removed.insert(std::upper_bound(removed.begin(), removed.end(), x), x);
    }

    const auto check = validate_array(m);
    if (!check.ok)
        throw numeric_error("array_from_trees produced an invalid array: " + check.message);
    return m;
}

}  // namespace rvfuse
