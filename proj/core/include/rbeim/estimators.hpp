#pragma once

#include <complex>
#include <cstdint>
#include <string>

#include <Eigen/LU>
#include <Eigen/QR>

#include "rbeim/eim.hpp"
#include "rbeim/rb.hpp"

namespace rbeim {

enum class Method { E1, E2, E3, E4, E1go, E2go };

std::string method_name(Method m);

struct BoundReport {
    double mu = 0.0;
    double value = 0.0;        // beta_lb(mu)^{-1} sqrt(max(raw_radicand, 0))
    double raw_radicand = 0.0; // signed, pre-clamp
    Method method = Method::E1;
    Precision precision = Precision::Double;
};

// x_I = alpha_k(mu) gamma_i(mu), flattened I = i + nhat*k.
Vec xhat_from_gamma(const ReducedBasisState& state, const TruthProblem& problem, double mu,
                    const Vec& gamma);
Vec xhat_coefficients(const ReducedBasisState& state, const TruthProblem& problem, double mu);

// (1, x, conj x, conj(x_I) x_J row-major): dimension (1 + m)^2 for m = d*nhat.
Vec build_xvector(const ReducedBasisState& state, const TruthProblem& problem, double mu);

// Pairs with build_xvector under the plain dot product to give the radicand.
Vec t_vector(const ReducedBasisState& state);

// Assembled residual route, O(N d nhat) per call.
BoundReport e1(const ReducedBasisState& state, const TruthProblem& problem, double mu);

// Developed quadratic form on double data held in the state.
BoundReport e2_double(const ReducedBasisState& state, const TruthProblem& problem, double mu);

// Developed quadratic form accumulated and evaluated in the data's precision.
BoundReport e2(const ReducedBasisState& state, const TruthProblem& problem, double mu,
               const BoundDataVariant& data);

// Interpolation of the radicand through sigma random grid nodes. The node
// matrix is heavily rank-deficient in floating point (the sample vectors
// trace a low dimensional manifold), and the square system is solved as is
// through the cached pivoted LU: the weights stay sharp where the system is
// consistent, while the near-null directions surface as noise spikes near
// the greedy selections. Rank-truncating solves trade that locality for a
// uniform error several times larger, so the square solve is kept.
struct E3State {
    std::vector<int> node_indices;
    std::vector<double> nodes;
    Eigen::PartialPivLU<Mat> factor;
    Mat t_matrix;              // column r = xvector at node r
    Eigen::VectorXd v;         // radicand at node r
    double cond_estimate = 0.0;
    bool enabled = true;
    std::uint64_t seed = 0;
};

E3State build_e3(const ReducedBasisState& state, const TruthProblem& problem,
                 const ParameterGrid& grid, std::uint64_t seed);
BoundReport e3(const E3State& e3state, const ReducedBasisState& state, const TruthProblem& problem,
               double mu);

// Interpolation of the radicand through the EIM pairs.
struct E4State {
    Eigen::VectorXd v; // radicand at the interpolation parameters
};

E4State build_e4(const EimState& eim, const ReducedBasisState& state, const TruthProblem& problem);
// k = 0 uses all pairs; 1 <= k <= khat restricts to the leading prefix.
BoundReport e4(const EimState& eim, const E4State& e4state, const ReducedBasisState& state,
               const TruthProblem& problem, double mu, int k = 0);

struct GoReport {
    double mu = 0.0;
    double value = 0.0;                     // beta_dual^{-1} ||r_primal|| ||r_dual||
    std::complex<double> output_reduced{};  // Q(uhat)
    std::complex<double> output_corrected{}; // Q(uhat) - (r_primal, vhat)_V
    Method method = Method::E1go;
    Precision precision = Precision::Double;
};

GoReport e1_go(const ReducedBasisState& primal, const ReducedBasisState& dual,
               const TruthProblem& problem, const TruthProblem& dual_problem, double mu);
GoReport e2_go(const ReducedBasisState& primal, const ReducedBasisState& dual,
               const TruthProblem& problem, const TruthProblem& dual_problem, double mu,
               const BoundDataVariant& primal_data, const BoundDataVariant& dual_data);

} // namespace rbeim
