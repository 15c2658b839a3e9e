#pragma once

#include <array>
#include <cstdint>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "rbeim/affine.hpp"

namespace rbeim {

// -u'' + mu u = 1 on ]0,1[, u(0) = u(1) = 0, P1 elements on a uniform mesh,
// H1 inner product (stiffness + mass), coercivity lower bound 1 for mu >= 1.
struct Diffusion1DSpec {
    double h = 0.005;
    std::array<double, 2> param_box{1.0, 100.0};
    int trial_count = 1000;
};

TruthProblem build_diffusion1d(const Diffusion1DSpec& spec);
ParameterGrid diffusion_grid(const Diffusion1DSpec& spec);

// Closed form for the mu-parametrized two-point boundary value problem above.
double analytic_solution(double mu, double x);

// Dense complex problem with Euclidean inner product (gram = I), coefficient
// pattern (1, 1/mu, mu), and a rank-1-planted smallest singular value at the
// trial grid's midpoint parameter.
struct SyntheticComplexSpec {
    int n = 200;
    int d = 3;
    double planted_beta = 1e-6;
    std::uint64_t seed = 1;
    std::array<double, 2> param_box{0.9, 1.1};
    int trial_count = 201;
    bool check_grid = true;
};

TruthProblem build_synthetic(const SyntheticComplexSpec& spec);
ParameterGrid synthetic_grid(const SyntheticComplexSpec& spec);

// Direct dense solve of A_mu U = B with residual verification.
Vec solve_truth(const TruthProblem& problem, double mu);

// (x, u(x)) rows for the 1D problem, 17 significant digits.
void write_solution_csv(const std::string& path, const Diffusion1DSpec& spec, const Vec& u);

// Problem-spec JSON: {"problem": "diffusion1d"|"synthetic", ...}.
struct LoadedProblem {
    TruthProblem problem;
    ParameterGrid grid;
    std::string kind;
};
LoadedProblem load_problem(const nlohmann::json& j);

} // namespace rbeim
