#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rbeim/eim.hpp"
#include "rbeim/estimators.hpp"
#include "rbeim/precision.hpp"
#include "rbeim/problems.hpp"
#include "rbeim/rb.hpp"

namespace rbeim {

struct ExperimentConfig {
    nlohmann::json problem;                 // forwarded to load_problem
    Precision precision = Precision::Double;
    GreedyConfig greedy;
    std::vector<Estimator> estimators{Estimator::E1, Estimator::E2, Estimator::E3, Estimator::E4};
    int sigma_hat = 0;                      // required when E4 is requested
    EimVariant eim_variant = EimVariant::Stabilized;
    double eim_residual_tol = 0.0;
    std::uint64_t e3_seed = 0;
    std::uint64_t seed = 1;
    std::optional<double> xi;               // snapshot perturbation, applied when set
    bool goal_oriented = false;
    std::optional<bool> true_error;         // default: truth dimension <= 500
    bool save_state = false;
    std::string out_dir = "out";
};

ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

struct SweepRow {
    static constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    double mu = 0.0;
    double e1 = nan, e2 = nan, e3 = nan, e4 = nan; // NaN when not requested
    double true_error = nan;                       // NaN when disabled
    double raw_radicand_e2 = nan;                  // signed radicand behind the e2 column
    double e1go = nan, e2go = nan;                 // NaN unless goal-oriented
};

struct SweepOutput {
    std::vector<SweepRow> rows;
    std::vector<double> selected;
    std::vector<int> selected_rows;  // grid indices of the selected parameters
    int nhat = 0;
    int sigma = 0;
    int sigma_hat = 0;
    int eim_khat = 0;
    int eim_breakdown = 0;
    double delta = 0.0;
    double beta_min = 0.0;
    double varsigma = 0.0;           // ||Q||_V' when goal-oriented
    bool e3_enabled = false;
    double e3_cond = 0.0;
    Precision precision = Precision::Double;
    std::string greedy_warning;
};

// Greedy + estimator sweep; writes sweep.csv, meta.json, eim_diag.csv (when
// E4 runs) and optional state bundles into out_dir.
SweepOutput run_sweep(const ExperimentConfig& config, const std::string& out_dir);

struct PerturbOutput {
    SweepOutput sweep;
    std::vector<double> e1_at_selected;
    double target = 0.0;             // beta_min^{-1} delta xi
    double xi = 0.0;
};

// Like run_sweep but requires xi and additionally writes perturb.csv.
PerturbOutput run_perturb(const ExperimentConfig& config, const std::string& out_dir);

// EIM offline pass only: writes eim_diag.csv and meta.json.
EimState run_eim_diag(const ExperimentConfig& config, const std::string& out_dir);

struct BenchRow {
    int n = 0;
    std::string estimator;
    double median_ns = 0.0;
    int calls = 0;
};

// Online-cost benchmark across truth dimensions; writes timing.csv.
std::vector<BenchRow> bench_online(const ExperimentConfig& config, const std::vector<int>& n_values,
                                   const std::string& out_dir, int calls = 2000);

} // namespace rbeim
