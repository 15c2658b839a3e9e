#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rbeim/linalg.hpp"

namespace rbeim {

enum class EimVariant { Classical, UniqueChoice, Stabilized, Hybrid };

std::string eim_variant_name(EimVariant v);
EimVariant parse_eim_variant(const std::string& s);

struct EimStepDiag {
    int k = 0;                          // number of interpolation pairs after the step
    std::complex<double> det{};         // det of the k x k interpolation matrix
    double cond = 0.0;                  // spectral condition number of the same
    double residual = 0.0;              // sup norm of the residual driving the step
};

struct EimOptions {
    int sigma_hat = 0;                  // target number of interpolation pairs
    EimVariant variant = EimVariant::Classical;
    double residual_tol = 0.0;          // stop early once the sup residual drops below; 0 disables
    double pivot_tol = 1e-14;           // classical breakdown threshold on the LU pivot
    int hybrid_max_passes = 4;
    double hybrid_det_tol = 1e-6;       // |det - 1| accepted without re-annihilation
};

// Interpolation data for a sigma x M sample table. Column m of q_table holds
// q_m sampled over the parameter grid; B is stored in full, with entries below
// the diagonal kept as computed (zero in exact arithmetic). Online solves read
// only the upper triangle.
struct EimState {
    EimVariant variant = EimVariant::Classical;
    std::vector<double> grid;           // parameter grid the table was sampled on
    std::vector<int> p_indices;         // component row chosen at each step
    std::vector<int> mu_indices;        // grid column chosen at each step
    std::vector<double> mus;            // grid[mu_indices]
    Eigen::MatrixXcd q_table;           // M x khat
    Eigen::MatrixXcd B;                 // khat x khat, B(i,j) = q_i(mu_j)
    Eigen::MatrixXcd snap_cols;         // sigma x khat, original table columns at mus
    std::vector<EimStepDiag> history;
    int breakdown_step = 0;             // 0 when all requested steps completed
    Eigen::MatrixXcd table;             // the sampled table itself (sigma x M)

    int sigma() const { return static_cast<int>(snap_cols.rows()); }
    int khat() const { return static_cast<int>(mus.size()); }
};

// Greedy interpolation of the columns of `table` (component index x grid).
// Classical, unique-choice and hybrid refresh the residual in a single shot
// through a materialized cardinal-function matrix, so round-off accumulates
// with the conditioning of B; stabilized cascades per-stage triangular solves
// whose cancellations at the selected parameters are exact.
EimState eim_offline(const Eigen::MatrixXcd& table, const std::vector<double>& grid,
                     const EimOptions& options);

// Convenience overload sampling xfun(p, mu) into a sigma x M table first.
EimState eim_offline(const std::function<std::complex<double>(int, double)>& xfun, int sigma,
                     const std::vector<double>& grid, const EimOptions& options);

// Interpolation weights lambda(mu) from the leading k x k upper triangle;
// mu must be a grid point (throws std::domain_error otherwise).
Eigen::VectorXcd eim_lambda(const EimState& state, int k, double mu);
Eigen::VectorXcd eim_online(const EimState& state, double mu); // k = khat

// I^k applied to the tabulated function at mu: snap_cols.leftCols(k) * lambda.
Eigen::VectorXcd eim_interpolant(const EimState& state, int k, double mu);

// Cascaded residual delta^{k,k} X(mu) evaluated through k elimination stages,
// each re-annihilating rows p_1..p_i; needs the stored table.
Eigen::VectorXcd stabilized_residual(const EimState& state, int k, double mu);

void write_diagnostics_csv(const std::string& path, const EimState& state);

} // namespace rbeim
