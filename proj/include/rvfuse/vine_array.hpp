#pragma once

#include <string>
#include <vector>

#include "rvfuse/common.hpp"

namespace rvfuse {

// Lower-triangular R-vine array. Entries are 1-based variable labels; column
// j encodes the edges (m(j,j), m(i,j) | m(i+1,j), ..., m(d,j)) for i > j.
class RVineArray {
public:
    RVineArray() = default;
    // rows[i] holds the i+1 leading entries of row i+1 (triangular layout).
    explicit RVineArray(const std::vector<std::vector<int>>& rows);

    int dim() const { return d_; }
    // 1-based access, requires i >= j.
    int operator()(int i, int j) const { return m_[(i - 1) * d_ + (j - 1)]; }
    int& at(int i, int j) { return m_[(i - 1) * d_ + (j - 1)]; }
    int diag(int j) const { return (*this)(j, j); }

    std::vector<std::vector<int>> rows() const;

    static RVineArray empty(int d);

private:
    int d_ = 0;
    std::vector<int> m_;
};

struct ArrayValidation {
    bool ok = true;
    int column = 0;  // first violated column (1-based) when !ok
    std::string message;
};

// Checks entry ranges, per-column distinctness, column nesting, the
// new-diagonal property, and the array membership condition.
ArrayValidation validate_array(const RVineArray& m);

struct VineEdge {
    int a = 0, b = 0;              // conditioned pair, a < b
    std::vector<int> conditioning; // sorted

    bool operator==(const VineEdge&) const = default;
    bool operator<(const VineEdge& o) const {
        if (a != o.a) return a < o.a;
        if (b != o.b) return b < o.b;
        return conditioning < o.conditioning;
    }
};

// trees[s-1] lists the edges of tree s; tree 1 has d-1 edges.
using VineTreeSequence = std::vector<std::vector<VineEdge>>;

// Decodes the array into its tree sequence (throws domain_error if invalid).
VineTreeSequence trees_from_array(const RVineArray& m);

// Builds an array encoding the given vine. The result passes validate_array
// and decodes to the same edge set (the matrix itself is not unique).
RVineArray array_from_trees(const VineTreeSequence& trees);

bool same_edge_sets(const VineTreeSequence& a, const VineTreeSequence& b);

// A worked five-variable example array used in tests and docs.
RVineArray example_array_5();

}  // namespace rvfuse
