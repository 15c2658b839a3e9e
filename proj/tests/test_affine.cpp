#include <doctest.h>

#include <cmath>
#include <complex>
#include <stdexcept>

#include "rbeim/affine.hpp"

using namespace rbeim;

namespace {

TruthProblem diag_problem() {
    TruthProblem p;
    p.gram = Mat::Zero(2, 2);
    p.gram(0, 0) = 2.0;
    p.gram(1, 1) = 1.0;
    Mat id = Mat::Identity(2, 2);
    Mat flip = Mat::Zero(2, 2);
    flip(0, 1) = 1.0;
    flip(1, 0) = 1.0;
    p.op.terms = {id, flip};
    p.op.alpha = {[](double) { return std::complex<double>(1.0, 0.0); },
                  [](double mu) { return std::complex<double>(mu, 0.0); }};
    p.rhs = Vec::Zero(2);
    p.rhs << 2.0, 3.0;
    p.beta_lb = [](double) { return 1.0; };
    p.beta_lb_dual = [](double) { return 1.0; };
    return p;
}

} // namespace

TEST_SUITE("affine") {

TEST_CASE("assemble combines terms with evaluated coefficients") {
    TruthProblem p = diag_problem();
    const Mat a = assemble(p.op, 2.0);
    CHECK(a(0, 0) == std::complex<double>(1.0));
    CHECK(a(0, 1) == std::complex<double>(2.0));
    CHECK(a(1, 0) == std::complex<double>(2.0));
    CHECK(a(1, 1) == std::complex<double>(1.0));
}

TEST_CASE("assemble rejects malformed operators") {
    AffineOperator op;
    CHECK_THROWS_AS(assemble(op, 1.0), std::invalid_argument);
    op.terms = {Mat::Identity(2, 2), Mat::Identity(3, 3)};
    op.alpha = {[](double) { return std::complex<double>(1.0); },
                [](double) { return std::complex<double>(1.0); }};
    CHECK_THROWS_AS(assemble(op, 1.0), std::invalid_argument);
    op.terms = {Mat::Identity(2, 2)};
    CHECK_THROWS_AS(assemble(op, 1.0), std::invalid_argument); // 2 alphas, 1 term
    op.alpha = {[](double mu) { return std::complex<double>(1.0 / mu); }};
    CHECK_THROWS_AS(assemble(op, 0.0), std::domain_error); // non-finite coefficient
}

TEST_CASE("uniform grid covers the box inclusively") {
    const ParameterGrid g = ParameterGrid::uniform(1.0, 100.0, 1000);
    CHECK(g.points.size() == 1000);
    CHECK(g.points.front() == 1.0);
    CHECK(g.points.back() == 100.0);
    CHECK(g.box[0] == 1.0);
    CHECK(g.box[1] == 100.0);
    // spacing is uniform
    const double h0 = g.points[1] - g.points[0];
    const double h500 = g.points[501] - g.points[500];
    CHECK(h0 == doctest::Approx(h500).epsilon(1e-12));
    CHECK_THROWS_AS(ParameterGrid::uniform(1.0, 1.0, 5), std::invalid_argument);
    CHECK_THROWS_AS(ParameterGrid::uniform(0.0, 1.0, 0), std::invalid_argument);
}

TEST_CASE("index_of finds grid points and rejects off-grid values") {
    const ParameterGrid g = ParameterGrid::uniform(0.9, 1.1, 201);
    for (int i : {0, 100, 200})
        CHECK(g.index_of(g.points[static_cast<std::size_t>(i)]) == i);
    CHECK(g.index_of(g.points[5] + 1e-15) == 5); // within relative tolerance
    CHECK(g.index_of(1.0005) == -1);
    CHECK(g.index_of(2.0) == -1);
}

TEST_CASE("riesz and norms against hand values") {
    TruthProblem p = diag_problem();
    Vec u(2);
    u << std::complex<double>(1.0, 0.0), std::complex<double>(0.0, 2.0);
    CHECK(v_norm(p, u) == doctest::Approx(std::sqrt(6.0)).epsilon(1e-14)); // 2*1 + 1*4
    const Vec w = riesz(p, p.rhs);
    CHECK(std::abs(w[0] - std::complex<double>(1.0)) <= 1e-15); // two sqrt(2) divides
    CHECK(w[1] == std::complex<double>(3.0));
    CHECK(dual_norm(p, p.rhs) == doctest::Approx(std::sqrt(11.0)).epsilon(1e-14)); // 2 + 9
    Vec bad = Vec::Zero(3);
    CHECK_THROWS_AS(riesz(p, bad), std::invalid_argument);
    CHECK(v_norm(p, Vec::Zero(2)) == 0.0);
}

TEST_CASE("v_norm flags a broken gram") {
    TruthProblem p;
    p.gram = Mat::Zero(2, 2);
    p.gram(0, 0) = 1.0;
    p.gram(0, 1) = 1.0; // deliberately non-Hermitian
    p.gram(1, 1) = 1.0;
    Vec u(2);
    u << std::complex<double>(1.0, 0.0), std::complex<double>(0.0, 1.0);
    CHECK_THROWS_AS(v_norm(p, u), std::runtime_error);

    TruthProblem neg;
    neg.gram = Mat::Constant(1, 1, std::complex<double>(-1.0, 0.0));
    CHECK_THROWS_AS(v_norm(neg, Vec::Ones(1)), std::runtime_error);
    CHECK_THROWS_AS(neg.gram_factor(), std::runtime_error);
}

TEST_CASE("beta_direct reproduces the generalized smallest singular value") {
    TruthProblem p = diag_problem();
    // G = diag(2,1); A(0) = I: G^{-1/2} A G^{-1/2} = diag(1/2, 1).
    CHECK(beta_direct(p, 0.0) == doctest::Approx(0.5).epsilon(1e-12));

    TruthProblem q;
    q.gram = Mat::Identity(2, 2);
    Mat a = Mat::Zero(2, 2);
    a(0, 1) = 2.0; // singular values {2, 0}
    q.op.terms = {a};
    q.op.alpha = {[](double) { return std::complex<double>(1.0); }};
    CHECK(beta_direct(q, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
}

} // TEST_SUITE
