#include "rbeim/affine.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/SVD>

namespace rbeim {

Mat assemble(const AffineOperator& op, double mu) {
    if (op.terms.empty()) throw std::invalid_argument("assemble: no terms");
    const Eigen::Index n = op.terms[0].rows();
    for (const Mat& t : op.terms) {
        if (t.rows() != n || t.cols() != n)
            throw std::invalid_argument("assemble: term dimension mismatch");
    }
    if (op.alpha.size() != op.terms.size())
        throw std::invalid_argument("assemble: coefficient/term count mismatch");
    Mat a = Mat::Zero(n, n);
    for (std::size_t k = 0; k < op.terms.size(); ++k) a += op.alpha[k](mu) * op.terms[k];
    if (!a.allFinite()) throw std::domain_error("assemble: non-finite entries");
    return a;
}

ParameterGrid ParameterGrid::uniform(double lo, double hi, int count) {
    if (count < 1 || !(lo < hi)) throw std::invalid_argument("ParameterGrid: bad range");
    ParameterGrid g;
    g.box = {lo, hi};
    g.points.resize(static_cast<std::size_t>(count));
    if (count == 1) {
        g.points[0] = lo;
        return g;
    }
    for (int i = 0; i < count; ++i)
        g.points[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / (count - 1);
    return g;
}

int ParameterGrid::index_of(double mu) const {
    const double tol = 1e-12 * std::max(1.0, std::abs(mu));
    for (std::size_t i = 0; i < points.size(); ++i)
        if (std::abs(points[i] - mu) <= tol) return static_cast<int>(i);
    return -1;
}

const Eigen::LLT<Mat>& TruthProblem::gram_factor() const {
    if (!llt_) {
        auto f = std::make_shared<Eigen::LLT<Mat>>(gram);
        if (f->info() != Eigen::Success)
            throw std::runtime_error("gram factorization failed (not positive definite?)");
        llt_ = std::move(f);
    }
    return *llt_;
}

Vec riesz(const TruthProblem& problem, const Vec& functional) {
    if (functional.size() != problem.gram.rows())
        throw std::invalid_argument("riesz: size mismatch");
    return problem.gram_factor().solve(functional);
}

double v_norm(const TruthProblem& problem, const Vec& u) {
    const std::complex<double> q = u.dot(problem.gram * u); // u^H G u
    const double re = q.real(), im = q.imag();
    if (std::abs(im) > 1e-12 * std::max(std::abs(re), 1e-300))
        throw std::runtime_error("v_norm: imaginary residue beyond tolerance");
    if (re < 0.0) {
        if (re < -1e-10 * u.squaredNorm() * problem.gram.norm() - 1e-300)
            throw std::runtime_error("v_norm: negative radicand, broken gram");
        return 0.0;
    }
    return std::sqrt(re);
}

double dual_norm(const TruthProblem& problem, const Vec& functional) {
    const Vec w = riesz(problem, functional);
    // ||w||_V^2 = w^H G w = w^H f for w = G^{-1} f.
    const std::complex<double> q = w.dot(functional);
    return std::sqrt(std::max(q.real(), 0.0));
}

double beta_direct(const TruthProblem& problem, double mu) {
    const Mat a = assemble(problem.op, mu);
    const auto& llt = problem.gram_factor();
    // L^{-1} A L^{-H} shares singular values with G^{-1/2} A G^{-1/2}.
    Mat m = llt.matrixL().solve(a);
    m = llt.matrixL().solve(m.adjoint()).adjoint();
    Eigen::BDCSVD<Mat> svd(m);
    return svd.singularValues().tail(1)(0);
}

} // namespace rbeim
