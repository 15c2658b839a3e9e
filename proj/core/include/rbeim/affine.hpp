#pragma once

#include <array>
#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "rbeim/linalg.hpp"

namespace rbeim {

// A_mu = sum_k alpha_k(mu) A_k with parameter-independent dense terms.
struct AffineOperator {
    std::vector<std::function<std::complex<double>(double)>> alpha;
    std::vector<Mat> terms;

    int d() const { return static_cast<int>(terms.size()); }
    int n() const { return terms.empty() ? 0 : static_cast<int>(terms[0].rows()); }
};

// Term-by-term assembly of A_mu; throws on dimension mismatch.
Mat assemble(const AffineOperator& op, double mu);

struct ParameterGrid {
    std::vector<double> points;
    std::array<double, 2> box{0.0, 1.0};

    static ParameterGrid uniform(double lo, double hi, int count);
    // First grid point within |mu - p| <= 1e-12 * max(1,|mu|); -1 if none.
    int index_of(double mu) const;
};

struct TruthProblem {
    Mat gram;                            // Hermitian positive definite
    AffineOperator op;
    Vec rhs;                             // coefficients of b
    std::optional<Vec> output;           // linear form Q, when present
    std::function<double(double)> beta_lb;
    std::function<double(double)> beta_lb_dual;
    double output_norm = 0.0;            // ||Q||_V' when output present

    int n() const { return static_cast<int>(gram.rows()); }
    const Eigen::LLT<Mat>& gram_factor() const;

private:
    mutable std::shared_ptr<Eigen::LLT<Mat>> llt_;
};

// Solves gram * w = f (the Riesz isomorphism V' -> V).
Vec riesz(const TruthProblem& problem, const Vec& functional);

// sqrt(u^H gram u); rejects imaginary residue above 1e-12 relative and
// negative radicands beyond round-off tolerance.
double v_norm(const TruthProblem& problem, const Vec& u);

// ||f||_V' = ||riesz(f)||_V without forming the norm twice.
double dual_norm(const TruthProblem& problem, const Vec& functional);

// Smallest singular value of G^{-1/2} A_mu G^{-1/2} (dense; offline oracle).
double beta_direct(const TruthProblem& problem, double mu);

} // namespace rbeim
