#include "rbeim/eim.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <Eigen/LU>
#include <Eigen/SVD>

namespace rbeim {

std::string eim_variant_name(EimVariant v) {
    switch (v) {
        case EimVariant::Classical: return "classical";
        case EimVariant::UniqueChoice: return "unique-choice";
        case EimVariant::Stabilized: return "stabilized";
        case EimVariant::Hybrid: return "hybrid";
    }
    throw std::logic_error("unknown eim variant");
}

EimVariant parse_eim_variant(const std::string& s) {
    if (s == "classical") return EimVariant::Classical;
    if (s == "unique-choice" || s == "unique_choice") return EimVariant::UniqueChoice;
    if (s == "stabilized") return EimVariant::Stabilized;
    if (s == "hybrid") return EimVariant::Hybrid;
    throw std::invalid_argument("unknown eim variant '" + s + "'");
}

namespace {

struct Pick {
    int p = -1;
    int m = -1;
    double val = -1.0;
};

// Row first: the component with the largest sup over the grid, then the
// first argmax within that row. skip_used restricts the column pick only.
Pick select_pair(const Eigen::MatrixXcd& r, const std::vector<char>& used, bool skip_used) {
    Pick pk;
    int bp = 0;
    double bv = -1.0;
    for (int p = 0; p < r.rows(); ++p) {
        double rv = 0.0;
        for (int m = 0; m < r.cols(); ++m) rv = std::max(rv, std::abs(r(p, m)));
        if (rv > bv) {
            bv = rv;
            bp = p;
        }
    }
    pk.p = bp;
    for (int m = 0; m < r.cols(); ++m) {
        if (skip_used && used[static_cast<std::size_t>(m)]) continue;
        const double a = std::abs(r(bp, m));
        if (a > pk.val) {
            pk.val = a;
            pk.m = m;
        }
    }
    return pk;
}

int grid_lookup(const std::vector<double>& grid, double mu) {
    for (std::size_t m = 0; m < grid.size(); ++m)
        if (std::abs(grid[m] - mu) <= 1e-12 * std::max(1.0, std::abs(mu))) return static_cast<int>(m);
    return -1;
}

// rcur minus I^k applied to it, using rcur's own columns at the selected
// parameters as interpolation snapshots. Per-column triangular solves: the
// cancellations at the selected parameters telescope exactly, so those
// columns stay at zero. Used by the stabilized cascade.
Eigen::MatrixXcd annihilate(const EimState& st, int k, const Eigen::MatrixXcd& rcur) {
    Eigen::MatrixXcd lam = st.q_table.leftCols(k).transpose();
    st.B.topLeftCorner(k, k).triangularView<Eigen::Upper>().solveInPlace(lam);
    Eigen::MatrixXcd rsel(rcur.rows(), k);
    for (int r = 0; r < k; ++r) rsel.col(r) = rcur.col(st.mu_indices[static_cast<std::size_t>(r)]);
    return rcur - rsel * lam;
}

// Same operator applied through the materialized cardinal-function matrix
// W = S B^{-1} (one small inverse, then a single sweep over the table). The
// extra rounding of W no longer cancels exactly at the selected parameters,
// so round-off accumulates with cond(B) as interpolation points pile up.
// Used for the single-shot (classical-style) residual refresh.
Eigen::MatrixXcd annihilate_direct(const EimState& st, int k, const Eigen::MatrixXcd& rcur) {
    const Eigen::MatrixXcd binv = st.B.topLeftCorner(k, k).inverse();
    Eigen::MatrixXcd rsel(rcur.rows(), k);
    for (int r = 0; r < k; ++r) rsel.col(r) = rcur.col(st.mu_indices[static_cast<std::size_t>(r)]);
    const Eigen::MatrixXcd w = rsel * binv;
    return rcur - w * st.q_table.leftCols(k).transpose();
}

double min_lu_pivot(const Eigen::PartialPivLU<Eigen::MatrixXcd>& lu) {
    double p = std::numeric_limits<double>::infinity();
    const auto& u = lu.matrixLU();
    for (int i = 0; i < u.rows(); ++i) p = std::min(p, std::abs(u(i, i)));
    return p;
}

double spectral_cond(const Eigen::MatrixXcd& b) {
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(b);
    const auto& sv = svd.singularValues();
    const double smin = sv[sv.size() - 1];
    if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
    return sv[0] / smin;
}

} // namespace

EimState eim_offline(const Eigen::MatrixXcd& table, const std::vector<double>& grid,
                     const EimOptions& options) {
    const int sigma = static_cast<int>(table.rows());
    const int m_count = static_cast<int>(table.cols());
    if (m_count != static_cast<int>(grid.size()))
        throw std::invalid_argument("eim_offline: table/grid size mismatch");
    if (sigma == 0 || m_count == 0) throw std::invalid_argument("eim_offline: empty table");
    if (options.sigma_hat < 1 || options.sigma_hat > std::min(sigma, m_count))
        throw std::invalid_argument("eim_offline: sigma_hat out of range");
    if (!table.allFinite()) throw std::domain_error("eim_offline: non-finite table entries");

    EimState st;
    st.variant = options.variant;
    st.grid = grid;
    st.table = table;
    st.q_table.resize(m_count, 0);
    st.B.resize(0, 0);
    st.snap_cols.resize(sigma, 0);

    Eigen::MatrixXcd r = table;
    std::vector<char> used(static_cast<std::size_t>(m_count), 0);
    const bool skip_used = options.variant == EimVariant::UniqueChoice;

    for (int step = 1; step <= options.sigma_hat; ++step) {
        const int k = step - 1; // accepted pairs so far
        Pick pk;
        Eigen::VectorXcd qcol;
        Eigen::MatrixXcd btent;
        int pass = 0;
        for (;;) {
            pk = select_pair(r, used, skip_used);
            bool retry = false;
            if (pk.m < 0 || !(pk.val > 0.0)) {
                st.breakdown_step = step;
                return st;
            }
            if (used[static_cast<std::size_t>(pk.m)]) {
                if (options.variant == EimVariant::Hybrid && pass < options.hybrid_max_passes) {
                    retry = true;
                } else {
                    st.breakdown_step = step;
                    return st;
                }
            }
            if (!retry) {
                qcol = r.row(pk.p).transpose() / r(pk.p, pk.m);
                btent.resize(step, step);
                if (k > 0) btent.topLeftCorner(k, k) = st.B;
                for (int i = 0; i < k; ++i) btent(i, k) = st.q_table(pk.m, i);
                btent(k, k) = qcol[pk.m];
                for (int j = 0; j < k; ++j) btent(k, j) = qcol[st.mu_indices[static_cast<std::size_t>(j)]];

                Eigen::PartialPivLU<Eigen::MatrixXcd> lu(btent);
                const double pivot = min_lu_pivot(lu);
                const std::complex<double> det = lu.determinant();
                if (options.variant == EimVariant::Classical && pivot < options.pivot_tol) {
                    st.breakdown_step = step;
                    return st;
                }
                if (options.variant == EimVariant::Hybrid && k > 0 &&
                    std::abs(det - std::complex<double>(1.0)) > options.hybrid_det_tol &&
                    pass < options.hybrid_max_passes) {
                    retry = true;
                } else {
                    st.p_indices.push_back(pk.p);
                    st.mu_indices.push_back(pk.m);
                    st.mus.push_back(grid[static_cast<std::size_t>(pk.m)]);
                    used[static_cast<std::size_t>(pk.m)] = 1;
                    st.q_table.conservativeResize(Eigen::NoChange, step);
                    st.q_table.col(k) = qcol;
                    st.B = btent;
                    st.snap_cols.conservativeResize(Eigen::NoChange, step);
                    st.snap_cols.col(k) = table.col(pk.m);
                    st.history.push_back({step, det, spectral_cond(btent), pk.val});
                    break;
                }
            }
            r = annihilate(st, k, r);
            ++pass;
        }

        if (step == options.sigma_hat) break;
        if (options.residual_tol > 0.0 && pk.val <= options.residual_tol) break;
        if (options.variant == EimVariant::Stabilized)
            r = annihilate(st, step, r);
        else
            r = annihilate_direct(st, step, table);
    }
    return st;
}

EimState eim_offline(const std::function<std::complex<double>(int, double)>& xfun, int sigma,
                     const std::vector<double>& grid, const EimOptions& options) {
    Eigen::MatrixXcd table(sigma, static_cast<int>(grid.size()));
    for (int p = 0; p < sigma; ++p)
        for (std::size_t m = 0; m < grid.size(); ++m)
            table(p, static_cast<int>(m)) = xfun(p, grid[m]);
    return eim_offline(table, grid, options);
}

Eigen::VectorXcd eim_lambda(const EimState& state, int k, double mu) {
    if (k < 1 || k > state.khat()) throw std::invalid_argument("eim_lambda: k out of range");
    const int m = grid_lookup(state.grid, mu);
    if (m < 0) throw std::domain_error("eim_lambda: mu is not a grid point");
    Eigen::VectorXcd q = state.q_table.row(m).head(k).transpose();
    state.B.topLeftCorner(k, k).triangularView<Eigen::Upper>().solveInPlace(q);
    return q;
}

Eigen::VectorXcd eim_online(const EimState& state, double mu) {
    return eim_lambda(state, state.khat(), mu);
}

Eigen::VectorXcd eim_interpolant(const EimState& state, int k, double mu) {
    return state.snap_cols.leftCols(k) * eim_lambda(state, k, mu);
}

Eigen::VectorXcd stabilized_residual(const EimState& state, int k, double mu) {
    if (k < 1 || k > state.khat()) throw std::invalid_argument("stabilized_residual: k out of range");
    if (state.table.size() == 0) throw std::logic_error("stabilized_residual: sample table not stored");
    const int m0 = grid_lookup(state.grid, mu);
    if (m0 < 0) throw std::domain_error("stabilized_residual: mu is not a grid point");

    Eigen::MatrixXcd mini(state.table.rows(), k + 1);
    std::vector<int> rows(static_cast<std::size_t>(k + 1));
    mini.col(0) = state.table.col(m0);
    rows[0] = m0;
    for (int rcol = 1; rcol <= k; ++rcol) {
        const int mi = state.mu_indices[static_cast<std::size_t>(rcol - 1)];
        mini.col(rcol) = state.table.col(mi);
        rows[static_cast<std::size_t>(rcol)] = mi;
    }
    for (int stage = 1; stage <= k; ++stage) {
        Eigen::MatrixXcd lam(stage, k + 1);
        for (int c = 0; c <= k; ++c)
            lam.col(c) = state.q_table.row(rows[static_cast<std::size_t>(c)]).head(stage).transpose();
        state.B.topLeftCorner(stage, stage).triangularView<Eigen::Upper>().solveInPlace(lam);
        mini -= mini.middleCols(1, stage) * lam;
    }
    return mini.col(0);
}

void write_diagnostics_csv(const std::string& path, const EimState& state) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "k,det,cond,residual\n";
    char buf[256];
    for (const auto& h : state.history) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", h.k, h.det.real(), h.cond, h.residual);
        out << buf;
    }
}

} // namespace rbeim
