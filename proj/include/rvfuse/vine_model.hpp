#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "rvfuse/bicop.hpp"
#include "rvfuse/common.hpp"
#include "rvfuse/margins.hpp"
#include "rvfuse/vine_array.hpp"

namespace rvfuse {

// Options shared by structure selection and bootstrap refits.
struct SelectOptions {
    std::vector<CopulaFamily> library = default_family_library();
    Criterion criterion = Criterion::AIC;
    // Assign the independence copula outright when the empirical tau of an
    // edge is tiny and an asymptotic tau test does not reject at 5%.
    bool independence_shortcut = true;
};

// A fitted R-vine copula: array plus one pair copula per array edge, each
// oriented with its first argument belonging to the column's diagonal
// variable. Immutable after construction and safe to share across threads.
class FittedRVine {
public:
    FittedRVine() = default;
    FittedRVine(RVineArray array, std::vector<std::vector<BivariateCopula>> pair_copulas);

    int dim() const { return array_.dim(); }
    const RVineArray& array() const { return array_; }

    // 1-based array position (row > col).
    const BivariateCopula& edge_copula(int row, int col) const {
        return pair_copulas_[col - 1][row - col - 1];
    }

    // Sum of log pair-copula densities at a point of the unit cube (marginal
    // log densities are the caller's business; inputs are clamped interior).
    // Overflow is guarded to a large finite sentinel; *overflowed reports it.
    double log_density(const std::vector<double>& u, bool* overflowed = nullptr) const;

    // Sum of log_density over the rows of a pseudo-observation matrix.
    double data_loglik(const Matrix& pseudo) const;

    // Rosenblatt transform to independent uniforms; w[j-1] belongs to array
    // column j. inverse_rosenblatt is its inverse and drives sampling.
    std::vector<double> rosenblatt(const std::vector<double>& u) const;
    std::vector<double> inverse_rosenblatt(const std::vector<double>& w) const;

    // n rows sampled from the model, deterministic in seed.
    Matrix sample(std::size_t n, std::uint64_t seed) const;

    // Monte Carlo estimate of P(U_j <= margins[j-1] for all j) with the last
    // sampled coordinate integrated out analytically (conditional MC).
    // Returns (estimate, standard error).
    std::pair<double, double> mc_cdf(const std::vector<double>& margins,
                                     std::size_t n, std::uint64_t seed) const;

    bool all_independence() const;

    // Margin of the model on the suffix variable set of array column `col`,
    // relabeled 1..k in ascending order of the original labels (returned in
    // `labels`).
    FittedRVine margin_vine(int col, std::vector<int>* labels) const;

    // Edges with their fitted copulas, tree by tree (for reports).
    struct EdgeReport {
        int tree;
        VineEdge edge;
        BivariateCopula copula;
    };
    std::vector<EdgeReport> edge_reports() const;

    double loglik = 0.0;                    // training loglik (pair copulas only)
    SelectOptions fit_options;              // used for bootstrap refits
    std::vector<MarginalModel> marginals;   // optional raw-space marginals

private:
    struct F2Source {
        // kind 0: raw u of variable `var`; 1: direct value of (row,col);
        // 2: indirect value of (row,col).
        int kind = 0;
        int var = 0;
        int row = 0, col = 0;
    };

    struct Workspace {
        // vdir[row][col]: F(m(col,col) | m(row,col), ..., m(d,col));
        // vind[row][col]: F(m(row,col) | m(col,col), m(row+1,col), ...).
        std::vector<double> vdir, vind;
    };

    double resolve_f2(const F2Source& s, const std::vector<double>& u,
                      const Workspace& ws) const;
    void forward_column(int col, const std::vector<double>& u, Workspace* ws,
                        double* logdens, double* chain_out) const;
    void build_plan();

    int idx(int row, int col) const { return (row - 1) * array_.dim() + (col - 1); }

    RVineArray array_;
    std::vector<std::vector<BivariateCopula>> pair_copulas_;
    std::vector<F2Source> plan_;  // indexed by idx(row, col)
};

}  // namespace rvfuse
