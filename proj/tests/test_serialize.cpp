#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "rbeim/estimators.hpp"
#include "rbeim/problems.hpp"
#include "rbeim/rb.hpp"
#include "rbeim/serialize.hpp"

using namespace rbeim;
using Cx = std::complex<double>;

namespace {

ReducedBasisState small_rb_state(TruthProblem& problem, ParameterGrid& grid) {
    Diffusion1DSpec spec;
    spec.h = 0.1;
    spec.trial_count = 9;
    problem = build_diffusion1d(spec);
    grid = diffusion_grid(spec);
    GreedyConfig cfg;
    cfg.nmax = 2;
    return greedy_build(problem, grid, cfg);
}

EimState small_eim_state() {
    std::vector<double> grid = {0.5, 1.0, 1.5, 2.0, 2.5};
    Eigen::MatrixXcd table(3, 5);
    for (int p = 0; p < 3; ++p)
        for (int m = 0; m < 5; ++m) table(p, m) = Cx(std::pow(grid[static_cast<std::size_t>(m)], p), 0.1 * p);
    EimOptions o;
    o.sigma_hat = 3;
    o.variant = EimVariant::Stabilized;
    return eim_offline(table, grid, o);
}

bool same_vec(const Vec& a, const Vec& b) { return a.size() == b.size() && (a - b).norm() == 0.0; }
bool same_mat(const Mat& a, const Mat& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a - b).norm() == 0.0;
}

} // namespace

TEST_SUITE("serialize") {

TEST_CASE("rb state round-trips bit exactly") {
    TruthProblem problem;
    ParameterGrid grid;
    const ReducedBasisState st = small_rb_state(problem, grid);

    const auto j = rb_state_to_json(st);
    const ReducedBasisState back = rb_state_from_json(j);

    CHECK(back.selected == st.selected);
    CHECK(back.greedy_history == st.greedy_history);
    CHECK(back.warning == st.warning);
    CHECK(back.delta == st.delta);
    REQUIRE(back.basis.size() == st.basis.size());
    for (std::size_t i = 0; i < st.basis.size(); ++i) {
        CHECK(same_vec(back.basis[i], st.basis[i]));
        CHECK(same_vec(back.raw_snapshots[i], st.raw_snapshots[i]));
    }
    REQUIRE(back.reduced_terms.size() == st.reduced_terms.size());
    for (std::size_t k = 0; k < st.reduced_terms.size(); ++k)
        CHECK(same_mat(back.reduced_terms[k], st.reduced_terms[k]));
    CHECK(same_vec(back.reduced_rhs, st.reduced_rhs));
    CHECK(same_vec(back.g00, st.g00));
    REQUIRE(back.f.size() == st.f.size());
    REQUIRE(back.w.size() == st.w.size());
    for (std::size_t k = 0; k < st.f.size(); ++k) {
        REQUIRE(back.f[k].size() == st.f[k].size());
        for (std::size_t i = 0; i < st.f[k].size(); ++i) {
            CHECK(same_vec(back.f[k][i], st.f[k][i]));
            CHECK(same_vec(back.w[k][i], st.w[k][i]));
        }
    }
    CHECK(same_vec(back.s_vec, st.s_vec));
    CHECK(same_mat(back.S_mat, st.S_mat));

    // Restored data drives the estimators to identical values.
    const double mu = grid.points[7];
    CHECK(e1(back, problem, mu).value == e1(st, problem, mu).value);
}

TEST_CASE("rb state survives the file format") {
    TruthProblem problem;
    ParameterGrid grid;
    const ReducedBasisState st = small_rb_state(problem, grid);
    const std::string path = "rb_state_test.json";
    save_json(path, rb_state_to_json(st));
    const ReducedBasisState back = rb_state_from_json(load_json(path));
    std::remove(path.c_str());

    CHECK(back.selected == st.selected);
    CHECK(back.delta == st.delta);
    for (std::size_t i = 0; i < st.basis.size(); ++i) CHECK(same_vec(back.basis[i], st.basis[i]));
    CHECK(same_vec(back.s_vec, st.s_vec));
    CHECK(same_mat(back.S_mat, st.S_mat));
}

TEST_CASE("eim state round-trips including the diagnostics") {
    const EimState st = small_eim_state();
    const std::string path = "eim_state_test.json";
    save_json(path, eim_state_to_json(st));
    const EimState back = eim_state_from_json(load_json(path));
    std::remove(path.c_str());

    CHECK(back.variant == st.variant);
    CHECK(back.grid == st.grid);
    CHECK(back.p_indices == st.p_indices);
    CHECK(back.mu_indices == st.mu_indices);
    CHECK(back.mus == st.mus);
    CHECK(back.breakdown_step == st.breakdown_step);
    CHECK(same_mat(back.q_table, st.q_table));
    CHECK(same_mat(back.B, st.B));
    CHECK(same_mat(back.snap_cols, st.snap_cols));
    CHECK(same_mat(back.table, st.table));
    REQUIRE(back.history.size() == st.history.size());
    for (std::size_t k = 0; k < st.history.size(); ++k) {
        CHECK(back.history[k].k == st.history[k].k);
        CHECK(back.history[k].det == st.history[k].det);
        CHECK(back.history[k].cond == st.history[k].cond);
        CHECK(back.history[k].residual == st.history[k].residual);
    }
}

TEST_CASE("infinite condition numbers pass through as null") {
    EimState st = small_eim_state();
    st.history[0].cond = std::numeric_limits<double>::infinity();
    const auto j = eim_state_to_json(st);
    CHECK(j.at("history")[0].at("cond").is_null());
    const EimState back = eim_state_from_json(j);
    CHECK(std::isinf(back.history[0].cond));
}

TEST_CASE("loaders reject foreign and damaged bundles") {
    TruthProblem problem;
    ParameterGrid grid;
    const ReducedBasisState rb = small_rb_state(problem, grid);
    const EimState eim = small_eim_state();

    auto j = rb_state_to_json(rb);
    j["format"] = "other";
    CHECK_THROWS_AS(rb_state_from_json(j), std::runtime_error);

    j = rb_state_to_json(rb);
    j["version"] = 99;
    CHECK_THROWS_AS(rb_state_from_json(j), std::runtime_error);

    CHECK_THROWS_AS(rb_state_from_json(eim_state_to_json(eim)), std::runtime_error);
    CHECK_THROWS_AS(eim_state_from_json(rb_state_to_json(rb)), std::runtime_error);

    j = eim_state_to_json(eim);
    j["B"]["data"].erase(0);
    CHECK_THROWS_AS(eim_state_from_json(j), std::runtime_error);

    j = eim_state_to_json(eim);
    j["mus"].erase(0);
    CHECK_THROWS_AS(eim_state_from_json(j), std::runtime_error);
}

TEST_CASE("file helpers report unusable paths") {
    CHECK_THROWS_AS(load_json("does_not_exist_test.json"), std::runtime_error);
    CHECK_THROWS_AS(save_json("no_such_dir_test/x.json", nlohmann::json::object()),
                    std::runtime_error);
}

} // TEST_SUITE
