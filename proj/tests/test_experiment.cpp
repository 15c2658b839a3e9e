#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rbeim/experiment.hpp"
#include "rbeim/serialize.hpp"

using namespace rbeim;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json tiny_diffusion_config() {
    return json{{"problem", {{"problem", "diffusion1d"},
                             {"mesh_h", 0.1},
                             {"param_box", {1.0, 100.0}},
                             {"trial_points", 30}}},
                {"greedy", {{"nmax", 2}}},
                {"sigma_hat", 5}};
}

json tiny_synthetic_config() {
    return json{{"problem", {{"problem", "synthetic"},
                             {"n", 40},
                             {"d", 2},
                             {"planted_beta", 0.5},
                             {"seed", 3},
                             {"param_box", {0.9, 1.1}},
                             {"trial_points", 15}}},
                {"greedy", {{"nmax", 2}}},
                {"estimators", {"e1", "e2", "e4"}},
                {"sigma_hat", 4}};
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream ss(text);
    std::string line;
    while (std::getline(ss, line))
        if (!line.empty()) out.push_back(line);
    return out;
}

std::vector<double> parse_csv_row(const std::string& line) {
    std::vector<double> out;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell == "nan" ? std::nan("") : std::stod(cell));
    return out;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(name) { fs::remove_all(path); }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

} // namespace

TEST_SUITE("experiment") {

TEST_CASE("config defaults") {
    const auto cfg = config_from_json(json{{"problem", {{"problem", "diffusion1d"}}}});
    CHECK(cfg.precision == Precision::Double);
    CHECK(cfg.estimators ==
          std::vector<Estimator>{Estimator::E1, Estimator::E2, Estimator::E3, Estimator::E4});
    CHECK(cfg.sigma_hat == 0);
    CHECK(cfg.eim_variant == EimVariant::Stabilized);
    CHECK(cfg.eim_residual_tol == 0.0);
    CHECK(cfg.seed == 1);
    CHECK(cfg.e3_seed == 0);
    CHECK_FALSE(cfg.xi.has_value());
    CHECK_FALSE(cfg.goal_oriented);
    CHECK_FALSE(cfg.true_error.has_value());
    CHECK_FALSE(cfg.save_state);
    CHECK(cfg.out_dir == "out");
}

TEST_CASE("config parsing") {
    json j = tiny_diffusion_config();
    j["precision"] = "extended";
    j["estimators"] = {"E1", "e4"};
    j["eim_variant"] = "unique_choice";
    j["eim_residual_tol"] = 1e-12;
    j["seed"] = 42;
    j["e3_seed"] = 7;
    j["xi"] = 1e-3;
    j["goal_oriented"] = true;
    j["true_error"] = false;
    j["save_state"] = true;
    j["out_dir"] = "elsewhere";
    j["greedy"]["tol_rb"] = 1e-10;
    j["greedy"]["estimator"] = "e2";
    j["greedy"]["start_mu"] = 5.0;

    const auto cfg = config_from_json(j);
    CHECK(cfg.precision == Precision::Extended);
    CHECK(cfg.estimators == std::vector<Estimator>{Estimator::E1, Estimator::E4});
    CHECK(cfg.eim_variant == EimVariant::UniqueChoice);
    CHECK(cfg.eim_residual_tol == 1e-12);
    CHECK(cfg.seed == 42);
    CHECK(cfg.e3_seed == 7);
    REQUIRE(cfg.xi.has_value());
    CHECK(*cfg.xi == 1e-3);
    CHECK(cfg.goal_oriented);
    REQUIRE(cfg.true_error.has_value());
    CHECK_FALSE(*cfg.true_error);
    CHECK(cfg.save_state);
    CHECK(cfg.out_dir == "elsewhere");
    CHECK(cfg.greedy.nmax == 2);
    CHECK(cfg.greedy.tol_rb == 1e-10);
    CHECK(cfg.greedy.driver == Estimator::E2);
    REQUIRE(cfg.greedy.start_mu.has_value());
    CHECK(*cfg.greedy.start_mu == 5.0);
}

TEST_CASE("config rejection") {
    CHECK_THROWS_AS(config_from_json(json{{"precision", "double"}}), std::invalid_argument);
    json j = tiny_diffusion_config();
    j["estimators"] = json::array();
    CHECK_THROWS_AS(config_from_json(j), std::invalid_argument);
    j = tiny_diffusion_config();
    j["estimators"] = {"e5"};
    CHECK_THROWS_AS(config_from_json(j), std::invalid_argument);
    j = tiny_diffusion_config();
    j["precision"] = "quad";
    CHECK_THROWS_AS(config_from_json(j), std::invalid_argument);
    j = tiny_diffusion_config();
    j["eim_variant"] = "fast";
    CHECK_THROWS_AS(config_from_json(j), std::invalid_argument);
    CHECK_THROWS_AS(load_config("missing_config_test.json"), std::runtime_error);
}

TEST_CASE("config file round-trip") {
    const std::string path = "config_roundtrip_test.json";
    save_json(path, tiny_diffusion_config());
    const auto cfg = load_config(path);
    std::remove(path.c_str());
    CHECK(cfg.sigma_hat == 5);
    CHECK(cfg.greedy.nmax == 2);
    CHECK(cfg.problem.at("problem") == "diffusion1d");
}

TEST_CASE("sweep writes the full artifact set") {
    TempDir dir("exp_sweep_test");
    const auto cfg = config_from_json(tiny_diffusion_config());
    const SweepOutput out = run_sweep(cfg, dir.str());

    CHECK(out.nhat == 2);
    CHECK(out.sigma == 25);
    CHECK(out.sigma_hat == 5);
    CHECK(out.eim_khat == 5);
    CHECK(out.eim_breakdown == 0);
    CHECK(out.delta > 0.0);
    CHECK(out.beta_min == 1.0);
    CHECK(out.e3_enabled);
    CHECK(out.rows.size() == 30);
    CHECK(out.selected.size() == 2);
    CHECK(out.selected_rows.size() == 2);
    for (int r : out.selected_rows) CHECK(r >= 0);

    REQUIRE(fs::exists(dir.path / "sweep.csv"));
    REQUIRE(fs::exists(dir.path / "meta.json"));
    REQUIRE(fs::exists(dir.path / "eim_diag.csv"));

    const auto lines = lines_of(read_file(dir.path / "sweep.csv"));
    REQUIRE(lines.size() == 31);
    CHECK(lines[0] == "mu,e1,e2,e3,e4,true_error,raw_radicand_e2");
    double prev_mu = -1.0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto row = parse_csv_row(lines[i]);
        REQUIRE(row.size() == 7);
        CHECK(row[0] > prev_mu);
        prev_mu = row[0];
        CHECK(row[1] >= 0.0);          // e1
        CHECK(row[2] >= 0.0);          // e2
        CHECK(std::isfinite(row[3]));  // e3
        CHECK(row[4] >= 0.0);          // e4
        CHECK(row[5] >= 0.0);          // true error
        CHECK(std::isfinite(row[6]));  // signed radicand
        CHECK(row[5] <= row[1] * (1.0 + 1e-8) + 1e-13);
        if (row[1] >= 1e-4) {
            CHECK(std::abs(row[2] - row[1]) <= 1e-6 * row[1]);
            CHECK(std::abs(row[3] - row[1]) <= 1e-4 * row[1]);
        }
    }

    const json meta = load_json((dir.path / "meta.json").string());
    CHECK(meta.at("format") == "rbeim-meta");
    CHECK(meta.at("version") == 1);
    CHECK(meta.at("command") == "run");
    CHECK(meta.at("precision") == "double");
    CHECK(meta.at("nhat") == 2);
    CHECK(meta.at("sigma") == 25);
    CHECK(meta.at("sigma_hat") == 5);
    CHECK(meta.at("delta").get<double>() == out.delta);
    CHECK(meta.at("beta_min").get<double>() == 1.0);
    CHECK(meta.at("selected").size() == 2);
    CHECK(meta.at("seeds").at("global") == 1);
    CHECK(meta.at("seeds").at("e3") == 0);
    CHECK(meta.at("true_error") == true);
    CHECK(meta.at("eim").at("khat") == 5);
    CHECK(meta.at("eim").at("breakdown_step") == 0);
    CHECK(meta.at("eim").at("variant") == "stabilized");
    CHECK(meta.at("e3").at("enabled") == true);
    CHECK(meta.at("estimators").size() == 4);
}

TEST_CASE("sweep outputs are deterministic") {
    TempDir a("exp_det_test_a"), b("exp_det_test_b");
    const auto cfg = config_from_json(tiny_diffusion_config());
    run_sweep(cfg, a.str());
    run_sweep(cfg, b.str());
    CHECK(read_file(a.path / "sweep.csv") == read_file(b.path / "sweep.csv"));
    CHECK(read_file(a.path / "eim_diag.csv") == read_file(b.path / "eim_diag.csv"));
    CHECK(read_file(a.path / "meta.json") == read_file(b.path / "meta.json"));
}

TEST_CASE("goal oriented sweep adds output bound columns") {
    TempDir dir("exp_go_test");
    json j = tiny_diffusion_config();
    j["goal_oriented"] = true;
    j["estimators"] = {"e1", "e2"};
    const SweepOutput out = run_sweep(config_from_json(j), dir.str());
    CHECK(out.varsigma > 0.0);

    const auto lines = lines_of(read_file(dir.path / "sweep.csv"));
    CHECK(lines[0] == "mu,e1,e2,e3,e4,true_error,raw_radicand_e2,e1go,e2go");
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto row = parse_csv_row(lines[i]);
        REQUIRE(row.size() == 9);
        CHECK(row[7] >= 0.0);
        CHECK(row[8] >= 0.0);
        CHECK(std::isnan(row[3]));
        CHECK(std::isnan(row[4]));
    }
    const json meta = load_json((dir.path / "meta.json").string());
    CHECK(meta.at("varsigma").get<double>() == out.varsigma);
}

TEST_CASE("state bundles are written on request and reload") {
    TempDir dir("exp_state_test");
    json j = tiny_diffusion_config();
    j["save_state"] = true;
    const SweepOutput out = run_sweep(config_from_json(j), dir.str());
    REQUIRE(fs::exists(dir.path / "rb_state.json"));
    REQUIRE(fs::exists(dir.path / "eim_state.json"));
    const auto rb = rb_state_from_json(load_json((dir.path / "rb_state.json").string()));
    CHECK(rb.nhat() == out.nhat);
    const auto eim = eim_state_from_json(load_json((dir.path / "eim_state.json").string()));
    CHECK(eim.khat() == out.eim_khat);
}

TEST_CASE("early eim stop propagates into the sweep") {
    TempDir dir("exp_eimstop_test");
    json j = tiny_diffusion_config();
    j["eim_residual_tol"] = 1e10;
    const SweepOutput out = run_sweep(config_from_json(j), dir.str());
    CHECK(out.eim_khat == 1);
    CHECK(out.eim_breakdown == 0);
    const json meta = load_json((dir.path / "meta.json").string());
    CHECK(meta.at("eim").at("khat") == 1);
}

TEST_CASE("sweep validates the eim request") {
    TempDir dir("exp_bade4_test");
    json j = tiny_diffusion_config();
    j.erase("sigma_hat");
    CHECK_THROWS_AS(run_sweep(config_from_json(j), dir.str()), std::invalid_argument);
}

TEST_CASE("perturb run reports the selected parameters") {
    TempDir dir("exp_perturb_test");
    json j = tiny_diffusion_config();
    j["estimators"] = {"e1", "e2"};
    j["xi"] = 1e-4;
    const PerturbOutput out = run_perturb(config_from_json(j), dir.str());
    CHECK(out.xi == 1e-4);
    CHECK(out.target == out.sweep.delta * 1e-4 / out.sweep.beta_min);
    REQUIRE(out.e1_at_selected.size() == 2);
    for (double v : out.e1_at_selected) {
        CHECK(v > 0.0);
        CHECK(v / out.target > 1e-3);
        CHECK(v / out.target < 1e3);
    }
    REQUIRE(fs::exists(dir.path / "perturb.csv"));
    const auto lines = lines_of(read_file(dir.path / "perturb.csv"));
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] == "mu,e1,target,ratio");

    json no_xi = tiny_diffusion_config();
    CHECK_THROWS_AS(run_perturb(config_from_json(no_xi), dir.str()), std::invalid_argument);
}

TEST_CASE("eim diagnostic run stands alone") {
    TempDir dir("exp_eimdiag_test");
    json j = tiny_diffusion_config();
    j["estimators"] = {"e1"};
    const EimState st = run_eim_diag(config_from_json(j), dir.str());
    CHECK(st.khat() == 5);
    REQUIRE(fs::exists(dir.path / "eim_diag.csv"));
    const auto lines = lines_of(read_file(dir.path / "eim_diag.csv"));
    REQUIRE(lines.size() == 6);
    CHECK(lines[0] == "k,det,cond,residual");
    const json meta = load_json((dir.path / "meta.json").string());
    CHECK(meta.at("command") == "eim-diag");

    json bad = j;
    bad.erase("sigma_hat");
    CHECK_THROWS_AS(run_eim_diag(config_from_json(bad), dir.str()), std::invalid_argument);
}

TEST_CASE("online benchmark scales across truth sizes") {
    TempDir dir("exp_bench_test");
    const auto cfg = config_from_json(tiny_synthetic_config());
    const auto rows = bench_online(cfg, {40, 80}, dir.str(), 40);
    REQUIRE(rows.size() == 6);
    int e1_rows = 0;
    for (const auto& r : rows) {
        CHECK((r.n == 40 || r.n == 80));
        CHECK(r.calls == 40);
        CHECK(r.median_ns >= 0.0);
        if (r.estimator == "E1") {
            CHECK(r.median_ns > 0.0);
            ++e1_rows;
        }
    }
    CHECK(e1_rows == 2);
    REQUIRE(fs::exists(dir.path / "timing.csv"));
    const auto lines = lines_of(read_file(dir.path / "timing.csv"));
    REQUIRE(lines.size() == 7);
    CHECK(lines[0] == "n,estimator,median_ns,calls");

    CHECK_THROWS_AS(bench_online(cfg, {40}, dir.str(), 40), std::invalid_argument);
    CHECK_THROWS_AS(bench_online(cfg, {40, 80}, dir.str(), 0), std::invalid_argument);
}

} // TEST_SUITE
