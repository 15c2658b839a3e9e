#include "rbeim/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <Eigen/SVD>

namespace rbeim {

std::string method_name(Method m) {
    switch (m) {
        case Method::E1: return "E1";
        case Method::E2: return "E2";
        case Method::E3: return "E3";
        case Method::E4: return "E4";
        case Method::E1go: return "E1go";
        case Method::E2go: return "E2go";
    }
    throw std::logic_error("unknown method");
}

Vec xhat_from_gamma(const ReducedBasisState& state, const TruthProblem& problem, double mu,
                    const Vec& gamma) {
    const int nh = state.nhat(), d = state.d();
    if (gamma.size() != nh) throw std::invalid_argument("xhat_from_gamma: size mismatch");
    Vec x(nh * d);
    for (int k = 0; k < d; ++k) {
        const std::complex<double> a = problem.op.alpha[static_cast<std::size_t>(k)](mu);
        for (int i = 0; i < nh; ++i) x[i + nh * k] = a * gamma[i];
    }
    return x;
}

Vec xhat_coefficients(const ReducedBasisState& state, const TruthProblem& problem, double mu) {
    return xhat_from_gamma(state, problem, mu, reduced_solve(state, problem, mu));
}

Vec build_xvector(const ReducedBasisState& state, const TruthProblem& problem, double mu) {
    const Vec x = xhat_coefficients(state, problem, mu);
    const int m = static_cast<int>(x.size());
    Vec out((1 + m) * (1 + m));
    out[0] = 1.0;
    for (int i = 0; i < m; ++i) {
        out[1 + i] = x[i];
        out[1 + m + i] = std::conj(x[i]);
        for (int j = 0; j < m; ++j) out[1 + 2 * m + i * m + j] = std::conj(x[i]) * x[j];
    }
    return out;
}

Vec t_vector(const ReducedBasisState& state) {
    const int m = state.flat_size();
    if (state.s_vec.size() != m) throw std::logic_error("t_vector: bound data not precomputed");
    Vec out((1 + m) * (1 + m));
    out[0] = state.delta * state.delta;
    for (int i = 0; i < m; ++i) {
        out[1 + i] = state.s_vec[i];
        out[1 + m + i] = std::conj(state.s_vec[i]);
        for (int j = 0; j < m; ++j) out[1 + 2 * m + i * m + j] = state.S_mat(i, j);
    }
    return out;
}

namespace {

double beta_inv(const TruthProblem& problem, double mu) {
    const double b = problem.beta_lb(mu);
    if (!(b > 0.0)) throw std::domain_error("beta_lb must be positive");
    return 1.0 / b;
}

double clamp_sqrt(double raw) { return std::sqrt(std::max(raw, 0.0)); }

// Residual Riesz vector and its gram image, both from precomputed pieces.
double e1_radicand(const ReducedBasisState& state, const TruthProblem& problem, const Vec& x) {
    const int nh = state.nhat(), d = state.d();
    Vec r = state.g00;
    Vec gr = -problem.rhs;
    for (int k = 0; k < d; ++k)
        for (int i = 0; i < nh; ++i) {
            const std::complex<double> xi = x[i + nh * k];
            r += xi * state.w[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
            gr += xi * state.f[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
        }
    return r.dot(gr).real();
}

} // namespace

BoundReport e1(const ReducedBasisState& state, const TruthProblem& problem, double mu) {
    const Vec x = xhat_coefficients(state, problem, mu);
    const double raw = e1_radicand(state, problem, x);
    return {mu, beta_inv(problem, mu) * clamp_sqrt(raw), raw, Method::E1, Precision::Double};
}

BoundReport e2_double(const ReducedBasisState& state, const TruthProblem& problem, double mu) {
    const Vec x = xhat_coefficients(state, problem, mu);
    const std::complex<double> lin = state.s_vec.cwiseProduct(x).sum();
    const std::complex<double> quad = x.dot(state.S_mat * x);
    const double raw = state.delta * state.delta + 2.0 * lin.real() + quad.real();
    return {mu, beta_inv(problem, mu) * clamp_sqrt(raw), raw, Method::E2, Precision::Double};
}

BoundReport e2(const ReducedBasisState& state, const TruthProblem& problem, double mu,
               const BoundDataVariant& data) {
    const Vec gamma = reduced_solve(state, problem, mu);
    BoundReport rep;
    rep.mu = mu;
    rep.method = Method::E2;
    std::visit(
        [&](const auto& bd) {
            using T = std::decay_t<decltype(bd.delta2)>;
            const int nh = state.nhat(), d = state.d();
            std::vector<Cplx<T>> x(static_cast<std::size_t>(nh * d));
            for (int k = 0; k < d; ++k) {
                const Cplx<T> a = to_cplx<T>(problem.op.alpha[static_cast<std::size_t>(k)](mu));
                for (int i = 0; i < nh; ++i)
                    x[static_cast<std::size_t>(i + nh * k)] = a * to_cplx<T>(gamma[i]);
            }
            rep.raw_radicand = to_double<T>(quad_form(bd, x));
            if constexpr (std::is_same_v<T, float>)
                rep.precision = Precision::Single;
            else if constexpr (std::is_same_v<T, DDouble>)
                rep.precision = Precision::Extended;
            else
                rep.precision = Precision::Double;
        },
        data);
    rep.value = beta_inv(problem, mu) * clamp_sqrt(rep.raw_radicand);
    return rep;
}

E3State build_e3(const ReducedBasisState& state, const TruthProblem& problem,
                 const ParameterGrid& grid, std::uint64_t seed) {
    const int m = state.flat_size();
    const int sigma = (1 + m) * (1 + m);
    const int count = static_cast<int>(grid.points.size());
    if (sigma > count)
        throw std::invalid_argument("build_e3: grid too small for the interpolation dimension");

    E3State out;
    out.seed = seed;
    std::vector<int> idx(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) idx[static_cast<std::size_t>(i)] = i;
    std::mt19937_64 rng(seed);
    for (int r = 0; r < sigma; ++r) {
        const std::uint64_t j = r + rng() % static_cast<std::uint64_t>(count - r);
        std::swap(idx[static_cast<std::size_t>(r)], idx[static_cast<std::size_t>(j)]);
    }
    idx.resize(static_cast<std::size_t>(sigma));
    out.node_indices = idx;

    out.t_matrix.resize(sigma, sigma);
    out.v.resize(sigma);
    out.nodes.resize(static_cast<std::size_t>(sigma));
    for (int r = 0; r < sigma; ++r) {
        const double mu = grid.points[static_cast<std::size_t>(idx[static_cast<std::size_t>(r)])];
        out.nodes[static_cast<std::size_t>(r)] = mu;
        const Vec gamma = reduced_solve(state, problem, mu);
        const Vec x = xhat_from_gamma(state, problem, mu, gamma);
        out.t_matrix.col(r) = build_xvector(state, problem, mu);
        out.v[r] = std::max(e1_radicand(state, problem, x), 0.0);
    }
    out.factor.compute(out.t_matrix);
    // Degenerate only when no pivot rises above round-off scale: the trailing
    // pivots underflow on any realistic node set (the sample manifold is low
    // dimensional), and the solver settles those rows consistently, so small
    // trailing pivots are expected rather than fatal.
    const double scale = out.t_matrix.cwiseAbs().maxCoeff();
    const double pivot = out.factor.matrixLU().diagonal().cwiseAbs().maxCoeff();
    out.enabled = out.t_matrix.allFinite() && pivot >= 1e-30 * scale;

    Eigen::BDCSVD<Mat> svd(out.t_matrix);
    const auto& sv = svd.singularValues();
    out.cond_estimate = sv[sv.size() - 1] > 0.0
                            ? sv[0] / sv[sv.size() - 1]
                            : std::numeric_limits<double>::infinity();
    return out;
}

BoundReport e3(const E3State& e3state, const ReducedBasisState& state, const TruthProblem& problem,
               double mu) {
    if (!e3state.enabled) throw std::runtime_error("e3: disabled by a degenerate node matrix");
    const Vec x = build_xvector(state, problem, mu);
    const Mat& lu = e3state.factor.matrixLU();
    Vec lambda = e3state.factor.permutationP() * x;
    lu.triangularView<Eigen::UnitLower>().solveInPlace(lambda);
    // Back-substitution with one extra rule: a pivot that underflowed to zero
    // heads a row that carries no equation, so its weight is set to zero. The
    // remaining pivots, however small, sit over consistently scaled rows and
    // are divided through as usual.
    for (Eigen::Index j = lu.cols() - 1; j >= 0; --j) {
        const std::complex<double> d = lu(j, j);
        if (d == std::complex<double>(0.0)) {
            lambda[j] = 0.0;
            continue;
        }
        lambda[j] /= d;
        lambda.head(j) -= lambda[j] * lu.col(j).head(j);
    }
    if (!lambda.allFinite()) {
        // Overflow on some unforeseen row pattern: no usable weights, so
        // report the trivial (infinite) bound rather than noise.
        const double inf = std::numeric_limits<double>::infinity();
        return {mu, inf, inf, Method::E3, Precision::Double};
    }
    std::complex<double> acc = 0.0;
    for (Eigen::Index r = 0; r < lambda.size(); ++r) acc += lambda[r] * e3state.v[r];
    const double raw = acc.real();
    return {mu, beta_inv(problem, mu) * clamp_sqrt(raw), raw, Method::E3, Precision::Double};
}

E4State build_e4(const EimState& eim, const ReducedBasisState& state, const TruthProblem& problem) {
    E4State out;
    out.v.resize(eim.khat());
    for (int r = 0; r < eim.khat(); ++r) {
        const double mu = eim.mus[static_cast<std::size_t>(r)];
        const Vec x = xhat_coefficients(state, problem, mu);
        out.v[r] = std::max(e1_radicand(state, problem, x), 0.0);
    }
    return out;
}

BoundReport e4(const EimState& eim, const E4State& e4state, const ReducedBasisState& state,
               const TruthProblem& problem, double mu, int k) {
    const int kk = k == 0 ? eim.khat() : k;
    if (kk < 1 || kk > eim.khat() || kk > e4state.v.size())
        throw std::invalid_argument("e4: k out of range");
    const Eigen::VectorXcd lambda = eim_lambda(eim, kk, mu);
    std::complex<double> acc = 0.0;
    for (int r = 0; r < kk; ++r) acc += lambda[r] * e4state.v[r];
    const double raw = acc.real();
    return {mu, beta_inv(problem, mu) * clamp_sqrt(raw), raw, Method::E4, Precision::Double};
}

namespace {

double beta_dual_inv(const TruthProblem& dual_problem, double mu) {
    const double b = dual_problem.beta_lb(mu);
    if (!(b > 0.0)) throw std::domain_error("beta_lb must be positive");
    return 1.0 / b;
}

struct GoPieces {
    Vec uhat;
    Vec vhat;
    std::complex<double> q_reduced;
    std::complex<double> correction; // (r_primal, vhat)_V
};

GoPieces go_pieces(const ReducedBasisState& primal, const ReducedBasisState& dual,
                   const TruthProblem& problem, const TruthProblem& dual_problem, double mu) {
    if (!problem.output) throw std::invalid_argument("goal-oriented bound needs an output functional");
    GoPieces gp;
    const Vec gp_gamma = reduced_solve(primal, problem, mu);
    const Vec gd_gamma = reduced_solve(dual, dual_problem, mu);
    gp.uhat = lift(primal, gp_gamma);
    gp.vhat = lift(dual, gd_gamma);
    gp.q_reduced = problem.output->dot(gp.uhat);

    const Vec x = xhat_from_gamma(primal, problem, mu, gp_gamma);
    Vec gr = -problem.rhs;
    for (int k = 0; k < primal.d(); ++k)
        for (int i = 0; i < primal.nhat(); ++i)
            gr += x[i + primal.nhat() * k] *
                  primal.f[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
    gp.correction = gp.vhat.dot(gr);
    return gp;
}

} // namespace

GoReport e1_go(const ReducedBasisState& primal, const ReducedBasisState& dual,
               const TruthProblem& problem, const TruthProblem& dual_problem, double mu) {
    GoPieces gp = go_pieces(primal, dual, problem, dual_problem, mu);
    const Vec xp = xhat_coefficients(primal, problem, mu);
    const Vec xd = xhat_coefficients(dual, dual_problem, mu);
    const double np = clamp_sqrt(e1_radicand(primal, problem, xp));
    const double nd = clamp_sqrt(e1_radicand(dual, dual_problem, xd));
    GoReport rep;
    rep.mu = mu;
    rep.value = beta_dual_inv(dual_problem, mu) * np * nd;
    rep.output_reduced = gp.q_reduced;
    rep.output_corrected = gp.q_reduced - gp.correction;
    rep.method = Method::E1go;
    rep.precision = Precision::Double;
    return rep;
}

GoReport e2_go(const ReducedBasisState& primal, const ReducedBasisState& dual,
               const TruthProblem& problem, const TruthProblem& dual_problem, double mu,
               const BoundDataVariant& primal_data, const BoundDataVariant& dual_data) {
    if (primal_data.index() != dual_data.index())
        throw std::invalid_argument("e2_go: mixed precisions");
    GoPieces gp = go_pieces(primal, dual, problem, dual_problem, mu);
    const BoundReport rp = e2(primal, problem, mu, primal_data);
    const BoundReport rd = e2(dual, dual_problem, mu, dual_data);
    GoReport rep;
    rep.mu = mu;
    rep.value = beta_dual_inv(dual_problem, mu) * clamp_sqrt(rp.raw_radicand) *
                clamp_sqrt(rd.raw_radicand);
    rep.output_reduced = gp.q_reduced;
    rep.output_corrected = gp.q_reduced - gp.correction;
    rep.method = Method::E2go;
    rep.precision = rp.precision;
    return rep;
}

} // namespace rbeim
