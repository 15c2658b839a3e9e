#include "rbeim/rb.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include <Eigen/LU>

#include "rbeim/estimators.hpp"
#include "rbeim/problems.hpp"

namespace rbeim {

std::string estimator_name(Estimator e) {
    switch (e) {
        case Estimator::E1: return "E1";
        case Estimator::E2: return "E2";
        case Estimator::E3: return "E3";
        case Estimator::E4: return "E4";
    }
    throw std::logic_error("unknown estimator");
}

Estimator parse_estimator(const std::string& s) {
    if (s == "E1" || s == "e1") return Estimator::E1;
    if (s == "E2" || s == "e2") return Estimator::E2;
    if (s == "E3" || s == "e3") return Estimator::E3;
    if (s == "E4" || s == "e4") return Estimator::E4;
    throw std::invalid_argument("unknown estimator '" + s + "'");
}

ReducedBasisState init_state(const TruthProblem& problem) {
    if (problem.n() == 0) throw std::invalid_argument("init_state: empty problem");
    ReducedBasisState st;
    const int d = problem.op.d();
    st.reduced_terms.assign(static_cast<std::size_t>(d), Mat());
    st.f.assign(static_cast<std::size_t>(d), {});
    st.w.assign(static_cast<std::size_t>(d), {});
    st.g00 = riesz(problem, -problem.rhs);
    st.delta = std::sqrt(std::max(0.0, st.g00.dot(-problem.rhs).real()));
    st.reduced_rhs = Vec();
    return st;
}

namespace {

// Modified Gram-Schmidt in the V inner product, two passes.
Vec v_orthogonalize(const ReducedBasisState& st, const TruthProblem& problem, const Vec& u) {
    Vec v = u;
    const int nh = st.nhat();
    if (nh == 0) return v;
    std::vector<Vec> gb(static_cast<std::size_t>(nh));
    for (int j = 0; j < nh; ++j) gb[static_cast<std::size_t>(j)] = problem.gram * st.basis[static_cast<std::size_t>(j)];
    for (int pass = 0; pass < 2; ++pass)
        for (int j = 0; j < nh; ++j) {
            // (v, b_j)_V = b_j^H G v = (G b_j)^H v
            std::complex<double> c = gb[static_cast<std::size_t>(j)].dot(v);
            v -= c * st.basis[static_cast<std::size_t>(j)];
        }
    return v;
}

void refresh_small_data(ReducedBasisState& st) {
    const int nh = st.nhat(), d = st.d(), m = nh * d;
    st.s_vec.resize(m);
    st.S_mat.resize(m, m);
    for (int k = 0; k < d; ++k)
        for (int i = 0; i < nh; ++i) {
            const int I = i + nh * k;
            st.s_vec[I] = st.g00.dot(st.f[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)]);
            for (int l = 0; l < d; ++l)
                for (int j = 0; j < nh; ++j) {
                    const int J = j + nh * l;
                    st.S_mat(I, J) = st.w[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)]
                                         .dot(st.f[static_cast<std::size_t>(l)][static_cast<std::size_t>(j)]);
                }
        }
}

} // namespace

bool append_snapshot(ReducedBasisState& state, const TruthProblem& problem, double mu, const Vec& u) {
    if (u.size() != problem.n()) throw std::invalid_argument("append_snapshot: size mismatch");
    const double orig = v_norm(problem, u);
    Vec v = v_orthogonalize(state, problem, u);
    const double nrm = v_norm(problem, v);
    if (!(nrm > 1e-12 * orig)) {
        std::ostringstream os;
        os << "linearly dependent snapshot at mu=" << mu << "; not appended";
        state.warning = os.str();
        return false;
    }
    v /= nrm;

    const int d = state.d();
    const int nh = state.nhat();
    state.selected.push_back(mu);
    state.raw_snapshots.push_back(u);
    state.basis.push_back(v);

    for (int k = 0; k < d; ++k) {
        Vec fk = problem.op.terms[static_cast<std::size_t>(k)] * v;
        state.f[static_cast<std::size_t>(k)].push_back(fk);
        state.w[static_cast<std::size_t>(k)].push_back(riesz(problem, fk));
    }

    for (int k = 0; k < d; ++k) {
        Mat& ak = state.reduced_terms[static_cast<std::size_t>(k)];
        ak.conservativeResize(nh + 1, nh + 1);
        for (int j = 0; j <= nh; ++j)
            ak(j, nh) = state.basis[static_cast<std::size_t>(j)].dot(
                state.f[static_cast<std::size_t>(k)][static_cast<std::size_t>(nh)]);
        for (int j = 0; j < nh; ++j)
            ak(nh, j) = v.dot(state.f[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)]);
    }
    state.reduced_rhs.conservativeResize(nh + 1);
    state.reduced_rhs[nh] = v.dot(problem.rhs);

    refresh_small_data(state);
    return true;
}

ReducedBasisState greedy_build(const TruthProblem& problem, const ParameterGrid& grid,
                               const GreedyConfig& config) {
    if (grid.points.empty()) throw std::invalid_argument("greedy_build: empty grid");
    if (config.nmax < 1) throw std::invalid_argument("greedy_build: nmax must be positive");
    if (!(config.tol_rb >= 0.0)) throw std::invalid_argument("greedy_build: tol_rb must be nonnegative");
    if (config.driver != Estimator::E1 && config.driver != Estimator::E2)
        throw std::invalid_argument("greedy_build: driver must be E1 or E2");

    ReducedBasisState st = init_state(problem);
    double mu = config.start_mu ? *config.start_mu
                                : grid.points[(grid.points.size() - 1) / 2];
    for (;;) {
        Vec u = solve_truth(problem, mu);
        if (!append_snapshot(st, problem, mu, u)) break;

        double best_val = -1.0;
        std::size_t best_idx = 0;
        for (std::size_t m = 0; m < grid.points.size(); ++m) {
            const double p = grid.points[m];
            const double val = (config.driver == Estimator::E1)
                                   ? e1(st, problem, p).value
                                   : e2_double(st, problem, p).value;
            if (val > best_val) {
                best_val = val;
                best_idx = m;
            }
        }
        st.greedy_history.push_back(best_val);

        if (best_val <= config.tol_rb) break;
        if (st.nhat() >= config.nmax) break;
        const double next = grid.points[best_idx];
        if (std::find(st.selected.begin(), st.selected.end(), next) != st.selected.end()) {
            std::ostringstream os;
            os << "estimator argmax mu=" << next << " already selected; stopping";
            st.warning = os.str();
            break;
        }
        mu = next;
    }
    return st;
}

Vec reduced_solve(const ReducedBasisState& state, const TruthProblem& problem, double mu) {
    const int nh = state.nhat();
    if (nh == 0) throw std::logic_error("reduced_solve: empty basis");
    Mat a = Mat::Zero(nh, nh);
    for (int k = 0; k < state.d(); ++k)
        a += problem.op.alpha[static_cast<std::size_t>(k)](mu) * state.reduced_terms[static_cast<std::size_t>(k)];
    Eigen::PartialPivLU<Mat> lu(a);
    return lu.solve(state.reduced_rhs);
}

Vec lift(const ReducedBasisState& state, const Vec& gamma) {
    if (gamma.size() != state.nhat()) throw std::invalid_argument("lift: size mismatch");
    Vec u = Vec::Zero(state.basis.empty() ? 0 : state.basis[0].size());
    for (int i = 0; i < state.nhat(); ++i) u += gamma[i] * state.basis[static_cast<std::size_t>(i)];
    return u;
}

void precompute_bound_data(ReducedBasisState& state, const TruthProblem& problem) {
    const int d = problem.op.d();
    state.g00 = riesz(problem, -problem.rhs);
    state.delta = std::sqrt(std::max(0.0, state.g00.dot(-problem.rhs).real()));
    state.f.assign(static_cast<std::size_t>(d), {});
    state.w.assign(static_cast<std::size_t>(d), {});
    for (int k = 0; k < d; ++k)
        for (int i = 0; i < state.nhat(); ++i) {
            Vec fk = problem.op.terms[static_cast<std::size_t>(k)] * state.basis[static_cast<std::size_t>(i)];
            state.f[static_cast<std::size_t>(k)].push_back(fk);
            state.w[static_cast<std::size_t>(k)].push_back(riesz(problem, fk));
        }
    refresh_small_data(state);
}

namespace {

// z = G x accumulated in double-word arithmetic; the entry products are exact.
std::vector<Cplx<DDouble>> gram_apply_dd(const Mat& gram, const Vec& x) {
    const Eigen::Index n = x.size();
    std::vector<Cplx<DDouble>> z(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        Cplx<DDouble> acc{};
        for (Eigen::Index j = 0; j < n; ++j)
            acc += to_cplx<DDouble>(gram(i, j)) * to_cplx<DDouble>(x[j]);
        z[static_cast<std::size_t>(i)] = acc;
    }
    return z;
}

} // namespace

BoundData<DDouble> make_bound_data_master(const ReducedBasisState& state,
                                          const TruthProblem& problem) {
    const int nh = state.nhat(), d = state.d(), m = nh * d;
    const auto g00 = to_cvec<DDouble>(state.g00);
    const auto gg00 = gram_apply_dd(problem.gram, state.g00);
    std::vector<std::vector<Cplx<DDouble>>> wt(static_cast<std::size_t>(m)), gw(static_cast<std::size_t>(m));
    for (int k = 0; k < d; ++k)
        for (int i = 0; i < nh; ++i) {
            const std::size_t idx = static_cast<std::size_t>(i + nh * k);
            const Vec& wi = state.w[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
            wt[idx] = to_cvec<DDouble>(wi);
            gw[idx] = gram_apply_dd(problem.gram, wi);
        }
    BoundData<DDouble> bd;
    bd.delta2 = cdot(g00, gg00).re;
    bd.s.resize(static_cast<std::size_t>(m));
    bd.S.assign(static_cast<std::size_t>(m), std::vector<Cplx<DDouble>>(static_cast<std::size_t>(m)));
    for (int i = 0; i < m; ++i) {
        bd.s[static_cast<std::size_t>(i)] = cdot(g00, gw[static_cast<std::size_t>(i)]);
        for (int j = 0; j < m; ++j)
            bd.S[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                cdot(wt[static_cast<std::size_t>(i)], gw[static_cast<std::size_t>(j)]);
    }
    return bd;
}

BoundDataVariant make_bound_data(const ReducedBasisState& state, const TruthProblem& problem,
                                 Precision precision) {
    switch (precision) {
        case Precision::Single: return make_bound_data_t<float>(state, problem);
        case Precision::Double: return make_bound_data_t<double>(state, problem);
        case Precision::Extended: return make_bound_data_t<DDouble>(state, problem);
    }
    throw std::logic_error("unknown precision");
}

ReducedBasisState perturb_snapshots(const ReducedBasisState& state, const TruthProblem& problem,
                                    double xi, std::uint64_t seed) {
    if (!(xi >= 0.0 && xi < 1.0)) throw std::invalid_argument("perturb_snapshots: xi must lie in [0,1)");
    if (xi == 0.0) return state;
    const int nh = state.nhat();
    if (nh == 0) throw std::logic_error("perturb_snapshots: empty basis");
    const Eigen::Index n = problem.n();

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<Vec> perturbed(static_cast<std::size_t>(nh));
    for (int i = 0; i < nh; ++i) {
        const double mu = state.selected[static_cast<std::size_t>(i)];
        Mat a = assemble(problem.op, mu);
        Vec dir(n);
        for (Eigen::Index r = 0; r < n; ++r) dir[r] = std::complex<double>(gauss(rng), gauss(rng));

        // Remove the component of dir seen by the reduced test space at mu.
        Mat ab(n, nh);
        for (int j = 0; j < nh; ++j) ab.col(j) = a * state.basis[static_cast<std::size_t>(j)];
        Mat m(nh, nh);
        Vec rhs(nh);
        for (int j = 0; j < nh; ++j) {
            rhs[j] = state.basis[static_cast<std::size_t>(j)].dot(a * dir);
            for (int k = 0; k < nh; ++k)
                m(j, k) = state.basis[static_cast<std::size_t>(j)].dot(ab.col(k));
        }
        Vec c = m.partialPivLu().solve(rhs);
        Vec e = dir;
        for (int k = 0; k < nh; ++k) e -= c[k] * state.basis[static_cast<std::size_t>(k)];

        const double nd = dual_norm(problem, a * e);
        if (!(nd > 0.0)) throw std::runtime_error("perturb_snapshots: degenerate direction");
        const double tau = xi * state.delta / nd;
        perturbed[static_cast<std::size_t>(i)] = state.raw_snapshots[static_cast<std::size_t>(i)] + tau * e;
    }

    ReducedBasisState out = init_state(problem);
    for (int i = 0; i < nh; ++i) {
        if (!append_snapshot(out, problem, state.selected[static_cast<std::size_t>(i)],
                             perturbed[static_cast<std::size_t>(i)]))
            throw std::runtime_error("perturb_snapshots: perturbed snapshots became dependent");
    }
    out.greedy_history = state.greedy_history;

    for (int i = 0; i < nh; ++i) {
        const double mu = out.selected[static_cast<std::size_t>(i)];
        Mat a = assemble(problem.op, mu);
        const double achieved =
            dual_norm(problem, a * out.raw_snapshots[static_cast<std::size_t>(i)] - problem.rhs) / out.delta;
        if (std::abs(achieved - xi) > 0.05 * xi)
            throw std::runtime_error("perturb_snapshots: target residual ratio missed");
    }
    return out;
}

TruthProblem make_dual(const TruthProblem& problem) {
    if (!problem.output) throw std::invalid_argument("make_dual: problem has no output functional");
    TruthProblem dual;
    dual.gram = problem.gram;
    dual.op.terms.reserve(problem.op.terms.size());
    for (const Mat& t : problem.op.terms) dual.op.terms.push_back(t.adjoint());
    dual.op.alpha.reserve(problem.op.alpha.size());
    for (const auto& a : problem.op.alpha)
        dual.op.alpha.push_back([a](double mu) { return std::conj(a(mu)); });
    dual.rhs = *problem.output;
    dual.output = problem.rhs;
    dual.beta_lb = problem.beta_lb_dual;
    dual.beta_lb_dual = problem.beta_lb;
    dual.output_norm = dual_norm(dual, *dual.output);
    return dual;
}

ReducedBasisState dual_greedy_build(const TruthProblem& problem, const ParameterGrid& grid,
                                    const GreedyConfig& config) {
    TruthProblem dual = make_dual(problem);
    return greedy_build(dual, grid, config);
}

} // namespace rbeim
