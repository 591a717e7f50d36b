#include "rvfuse/vine_model.hpp"

#include <algorithm>
#include <cmath>

#include "rvfuse/rng.hpp"

namespace rvfuse {

FittedRVine::FittedRVine(RVineArray array,
                         std::vector<std::vector<BivariateCopula>> pair_copulas)
    : array_(std::move(array)), pair_copulas_(std::move(pair_copulas)) {
    const auto v = validate_array(array_);
    if (!v.ok) throw domain_error("FittedRVine: invalid array: " + v.message);
    const int d = array_.dim();
    if (static_cast<int>(pair_copulas_.size()) != std::max(0, d - 1))
        throw domain_error("FittedRVine: pair copula columns mismatch");
    for (int col = 1; col <= d - 1; ++col) {
        if (static_cast<int>(pair_copulas_[col - 1].size()) != d - col)
            throw domain_error("FittedRVine: pair copula rows mismatch in column " +
                               std::to_string(col));
    }
    build_plan();
}

void FittedRVine::build_plan() {
    const int d = array_.dim();
    plan_.assign(static_cast<std::size_t>(d) * d, F2Source{});
    auto suffix = [&](int col, int from_row) {
        std::vector<int> s;
        for (int i = from_row; i <= d; ++i) s.push_back(array_(i, col));
        std::sort(s.begin(), s.end());
        return s;
    };
    for (int col = 1; col <= d - 1; ++col) {
        for (int row = col + 1; row <= d; ++row) {
            F2Source src;
            if (row == d) {
                src.kind = 0;
                src.var = array_(d, col);
            } else {
                const int var = array_(row, col);
                const auto dset = suffix(col, row + 1);
                bool found = false;
                for (int j = col + 1; j <= d - 1 && !found; ++j) {
                    if (array_.diag(j) == var) {
                        for (int kp = j + 1; kp <= d && !found; ++kp) {
                            if (suffix(j, kp) == dset) {
                                src.kind = 1;
                                src.row = kp;
                                src.col = j;
                                found = true;
                            }
                        }
                    } else {
                        for (int kp = j + 1; kp <= d && !found; ++kp) {
                            if (array_(kp, j) != var) continue;
                            auto dt = suffix(j, kp + 1);
                            dt.push_back(array_.diag(j));
                            std::sort(dt.begin(), dt.end());
                            if (dt == dset) {
                                src.kind = 2;
                                src.row = kp;
                                src.col = j;
                                found = true;
                            }
                        }
                    }
                }
                if (!found)
                    throw domain_error("FittedRVine: no h-source for edge (" +
                                       std::to_string(row) + "," + std::to_string(col) +
                                       ")");
            }
            plan_[idx(row, col)] = src;
        }
    }
}

double FittedRVine::resolve_f2(const F2Source& s, const std::vector<double>& u,
                               const Workspace& ws) const {
    switch (s.kind) {
        case 0: return u[s.var - 1];
        case 1: return ws.vdir[idx(s.row, s.col)];
        default: return ws.vind[idx(s.row, s.col)];
    }
}

// Processes one column bottom-up: accumulates log pair-copula densities and
// fills both h directions; chain_out receives F(m(col,col) | all below).
void FittedRVine::forward_column(int col, const std::vector<double>& u, Workspace* ws,
                                 double* logdens, double* chain_out) const {
    const int d = array_.dim();
    double chain = u[array_.diag(col) - 1];
    for (int row = d; row >= col + 1; --row) {
        const double f2 = resolve_f2(plan_[idx(row, col)], u, *ws);
        const BivariateCopula& c = edge_copula(row, col);
        if (logdens) *logdens += c.log_pdf(chain, f2);
        ws->vind[idx(row, col)] = c.hfunc2(chain, f2);
        chain = c.hfunc1(chain, f2);
        ws->vdir[idx(row, col)] = chain;
    }
    if (chain_out) *chain_out = chain;
}

double FittedRVine::log_density(const std::vector<double>& u, bool* overflowed) const {
    const int d = array_.dim();
    if (static_cast<int>(u.size()) != d)
        throw domain_error("log_density: dimension mismatch");
    std::vector<double> uc(u);
    for (auto& x : uc) x = clamp_unit(x);
    Workspace ws;
    ws.vdir.assign(static_cast<std::size_t>(d) * d, 0.0);
    ws.vind.assign(static_cast<std::size_t>(d) * d, 0.0);
    double logdens = 0.0;
    for (int col = d - 1; col >= 1; --col) forward_column(col, uc, &ws, &logdens, nullptr);
    // Guard against overflow from degenerate corners.
    if (overflowed) *overflowed = false;
    if (!std::isfinite(logdens)) {
        logdens = (logdens > 0.0) ? 1e300 : -1e300;
        if (overflowed) *overflowed = true;
    }
    return logdens;
}

double FittedRVine::data_loglik(const Matrix& pseudo) const {
    double total = 0.0;
    std::vector<double> u(pseudo.cols());
    for (std::size_t r = 0; r < pseudo.rows(); ++r) {
        for (std::size_t c = 0; c < pseudo.cols(); ++c) u[c] = pseudo(r, c);
        total += log_density(u);
    }
    return total;
}

std::vector<double> FittedRVine::rosenblatt(const std::vector<double>& u) const {
    const int d = array_.dim();
    if (static_cast<int>(u.size()) != d)
        throw domain_error("rosenblatt: dimension mismatch");
    std::vector<double> uc(u);
    for (auto& x : uc) x = clamp_unit(x);
    Workspace ws;
    ws.vdir.assign(static_cast<std::size_t>(d) * d, 0.0);
    ws.vind.assign(static_cast<std::size_t>(d) * d, 0.0);
    std::vector<double> w(d);
    w[d - 1] = uc[array_.diag(d) - 1];
    for (int col = d - 1; col >= 1; --col)
        forward_column(col, uc, &ws, nullptr, &w[col - 1]);
    return w;
}

std::vector<double> FittedRVine::inverse_rosenblatt(const std::vector<double>& w) const {
    const int d = array_.dim();
    if (static_cast<int>(w.size()) != d)
        throw domain_error("inverse_rosenblatt: dimension mismatch");
    Workspace ws;
    ws.vdir.assign(static_cast<std::size_t>(d) * d, 0.0);
    ws.vind.assign(static_cast<std::size_t>(d) * d, 0.0);
    std::vector<double> u(d, 0.0);
    u[array_.diag(d) - 1] = clamp_unit(w[d - 1]);
    for (int col = d - 1; col >= 1; --col) {
        // Invert the h chain of this column, top to bottom.
        double x = clamp_unit(w[col - 1]);
        for (int row = col + 1; row <= d; ++row) {
            const double f2 = resolve_f2(plan_[idx(row, col)], u, ws);
            x = edge_copula(row, col).hinv1(x, f2);
        }
        u[array_.diag(col) - 1] = x;
        // Fill this column's h values for columns further left.
        forward_column(col, u, &ws, nullptr, nullptr);
    }
    return u;
}

Matrix FittedRVine::sample(std::size_t n, std::uint64_t seed) const {
    const int d = array_.dim();
    Rng rng(seed);
    Matrix out(n, d);
    std::vector<double> w(d);
    for (std::size_t r = 0; r < n; ++r) {
        for (int j = 0; j < d; ++j) w[j] = rng.uniform();
        const auto u = inverse_rosenblatt(w);
        for (int j = 0; j < d; ++j) out(r, j) = u[j];
    }
    return out;
}

bool FittedRVine::all_independence() const {
    for (const auto& colv : pair_copulas_) {
        for (const auto& c : colv) {
            if (c.family().kind != FamilyKind::Independence) return false;
        }
    }
    return true;
}

std::pair<double, double> FittedRVine::mc_cdf(const std::vector<double>& margins,
                                              std::size_t n, std::uint64_t seed) const {
    const int d = array_.dim();
    if (static_cast<int>(margins.size()) != d)
        throw domain_error("mc_cdf: dimension mismatch");
    for (double m : margins) {
        if (m <= 0.0) return {0.0, 0.0};
    }
    bool all_one = true;
    for (double m : margins) all_one = all_one && m >= 1.0;
    if (all_one) return {1.0, 0.0};

    const int v1 = array_.diag(1);  // integrated out analytically
    Rng rng(seed);
    Workspace ws;
    std::vector<double> w(d), u(d);
    double s = 0.0, s2 = 0.0;
    for (std::size_t rep = 0; rep < n; ++rep) {
        for (int j = 0; j < d; ++j) w[j] = rng.uniform();
        // Sample all coordinates except the column-1 diagonal.
        ws.vdir.assign(static_cast<std::size_t>(d) * d, 0.0);
        ws.vind.assign(static_cast<std::size_t>(d) * d, 0.0);
        u.assign(d, 0.0);
        u[array_.diag(d) - 1] = clamp_unit(w[d - 1]);
        for (int col = d - 1; col >= 2; --col) {
            double x = clamp_unit(w[col - 1]);
            for (int row = col + 1; row <= d; ++row) {
                const double f2 = resolve_f2(plan_[idx(row, col)], u, ws);
                x = edge_copula(row, col).hinv1(x, f2);
            }
            u[array_.diag(col) - 1] = x;
            forward_column(col, u, &ws, nullptr, nullptr);
        }
        bool inside = true;
        for (int j = 1; j <= d && inside; ++j) {
            if (j == v1) continue;
            inside = (u[j - 1] <= margins[j - 1]);
        }
        double val = 0.0;
        if (inside) {
            if (margins[v1 - 1] >= 1.0) {
                val = 1.0;
            } else {
                // F(margin_{v1} | sampled others) via the column-1 h chain.
                double chain = margins[v1 - 1];
                for (int row = d; row >= 2; --row) {
                    const double f2 = resolve_f2(plan_[idx(row, 1)], u, ws);
                    chain = edge_copula(row, 1).hfunc1(chain, f2);
                }
                val = chain;
            }
        }
        s += val;
        s2 += val * val;
    }
    const double mean = s / static_cast<double>(n);
    double var = s2 / static_cast<double>(n) - mean * mean;
    if (var < 0.0) var = 0.0;
    return {mean, std::sqrt(var / static_cast<double>(n))};
}

FittedRVine FittedRVine::margin_vine(int col, std::vector<int>* labels) const {
    const int d = array_.dim();
    if (col < 1 || col > d - 1) throw domain_error("margin_vine: bad column");
    const int k = d - col + 1;
    std::vector<int> orig;
    for (int i = col; i <= d; ++i) orig.push_back(array_(i, col));
    std::sort(orig.begin(), orig.end());
    if (labels) *labels = orig;
    auto relabel = [&](int v) {
        return static_cast<int>(std::lower_bound(orig.begin(), orig.end(), v) -
                                orig.begin()) + 1;
    };
    RVineArray sub = RVineArray::empty(k);
    for (int i = col; i <= d; ++i)
        for (int j = col; j <= i; ++j)
            sub.at(i - col + 1, j - col + 1) = relabel(array_(i, j));
    std::vector<std::vector<BivariateCopula>> cops(std::max(0, k - 1));
    for (int j = col; j <= d - 1; ++j)
        for (int i = j + 1; i <= d; ++i)
            cops[j - col].push_back(edge_copula(i, j));
    FittedRVine out(std::move(sub), std::move(cops));
    out.fit_options = fit_options;
    return out;
}

std::vector<FittedRVine::EdgeReport> FittedRVine::edge_reports() const {
    const int d = array_.dim();
    std::vector<EdgeReport> out;
    for (int col = 1; col <= d - 1; ++col) {
        for (int row = d; row >= col + 1; --row) {
            EdgeReport r;
            r.tree = d - row + 1;
            r.edge.a = std::min(array_.diag(col), array_(row, col));
            r.edge.b = std::max(array_.diag(col), array_(row, col));
            for (int i = row + 1; i <= d; ++i) r.edge.conditioning.push_back(array_(i, col));
            std::sort(r.edge.conditioning.begin(), r.edge.conditioning.end());
            r.copula = edge_copula(row, col);
            out.push_back(std::move(r));
        }
    }
    std::sort(out.begin(), out.end(), [](const EdgeReport& a, const EdgeReport& b) {
        if (a.tree != b.tree) return a.tree < b.tree;
        return a.edge < b.edge;
    });
    return out;
}

}  // namespace rvfuse
