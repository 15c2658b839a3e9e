#include "rbeim/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "rbeim/serialize.hpp"

namespace rbeim {

namespace {

using nlohmann::json;

bool wants(const ExperimentConfig& cfg, Estimator e) {
    return std::find(cfg.estimators.begin(), cfg.estimators.end(), e) != cfg.estimators.end();
}

std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot open " + p.string());
    return out;
}

struct Pipeline {
    LoadedProblem lp;
    ReducedBasisState rb;
    BoundDataVariant bd;
    std::optional<E3State> e3s;
    std::optional<EimState> eim;
    std::optional<E4State> e4s;
    std::optional<TruthProblem> dual_problem;
    std::optional<ReducedBasisState> dual_rb;
    std::optional<BoundDataVariant> dual_bd;
};

Mat xvector_table(const ReducedBasisState& rb, const TruthProblem& problem,
                  const ParameterGrid& grid) {
    const int m = rb.flat_size();
    const int sigma = (1 + m) * (1 + m);
    Mat table(sigma, static_cast<int>(grid.points.size()));
    for (std::size_t c = 0; c < grid.points.size(); ++c)
        table.col(static_cast<Eigen::Index>(c)) = build_xvector(rb, problem, grid.points[c]);
    return table;
}

Pipeline build_pipeline(const ExperimentConfig& cfg) {
    Pipeline p{load_problem(cfg.problem)};
    p.rb = greedy_build(p.lp.problem, p.lp.grid, cfg.greedy);
    if (cfg.xi) p.rb = perturb_snapshots(p.rb, p.lp.problem, *cfg.xi, cfg.seed);
    p.bd = make_bound_data(p.rb, p.lp.problem, cfg.precision);

    if (wants(cfg, Estimator::E3))
        p.e3s = build_e3(p.rb, p.lp.problem, p.lp.grid, cfg.e3_seed);

    if (wants(cfg, Estimator::E4)) {
        if (cfg.sigma_hat < 1) throw std::invalid_argument("config: E4 requested without sigma_hat");
        EimOptions opt;
        opt.sigma_hat = cfg.sigma_hat;
        opt.variant = cfg.eim_variant;
        opt.residual_tol = cfg.eim_residual_tol;
        p.eim = eim_offline(xvector_table(p.rb, p.lp.problem, p.lp.grid), p.lp.grid.points, opt);
        if (p.eim->khat() == 0)
            throw std::runtime_error("eim: no interpolation pairs before breakdown");
        p.e4s = build_e4(*p.eim, p.rb, p.lp.problem);
    }

    if (cfg.goal_oriented) {
        if (!p.lp.problem.output)
            throw std::invalid_argument("config: goal_oriented needs a problem with an output");
        p.dual_problem = make_dual(p.lp.problem);
        p.dual_rb = greedy_build(*p.dual_problem, p.lp.grid, cfg.greedy);
        if (cfg.xi) p.dual_rb = perturb_snapshots(*p.dual_rb, *p.dual_problem, *cfg.xi, cfg.seed + 1);
        p.dual_bd = make_bound_data(*p.dual_rb, *p.dual_problem, cfg.precision);
    }
    return p;
}

json meta_json(const ExperimentConfig& cfg, const Pipeline& p, const SweepOutput& out,
               const char* command) {
    json seeds;
    seeds["e3"] = cfg.e3_seed;
    seeds["global"] = cfg.seed;
    if (cfg.problem.contains("seed")) seeds["problem"] = cfg.problem.at("seed");

    json meta;
    meta["format"] = "rbeim-meta";
    meta["version"] = 1;
    meta["command"] = command;
    meta["problem"] = cfg.problem;
    meta["precision"] = precision_name(cfg.precision);
    meta["estimators"] = json::array();
    for (Estimator e : cfg.estimators) meta["estimators"].push_back(estimator_name(e));
    meta["nhat"] = out.nhat;
    meta["sigma"] = out.sigma;
    meta["sigma_hat"] = out.sigma_hat;
    meta["delta"] = out.delta;
    meta["beta_min"] = out.beta_min;
    meta["selected"] = out.selected;
    meta["greedy_history"] = p.rb.greedy_history;
    meta["greedy_warning"] = out.greedy_warning;
    meta["seeds"] = seeds;
    meta["true_error"] = !out.rows.empty() && !std::isnan(out.rows.front().true_error);
    if (cfg.xi) meta["xi"] = *cfg.xi;
    if (p.eim) {
        json e;
        e["variant"] = eim_variant_name(p.eim->variant);
        e["khat"] = p.eim->khat();
        e["breakdown_step"] = p.eim->breakdown_step;
        if (!p.eim->history.empty()) {
            e["final_det_re"] = p.eim->history.back().det.real();
            e["final_det_im"] = p.eim->history.back().det.imag();
            e["final_cond"] = p.eim->history.back().cond;
        }
        meta["eim"] = e;
    }
    if (p.e3s) {
        json e;
        e["enabled"] = p.e3s->enabled;
        e["cond_estimate"] = p.e3s->cond_estimate;
        e["seed"] = p.e3s->seed;
        meta["e3"] = e;
    }
    if (cfg.goal_oriented) meta["varsigma"] = out.varsigma;
    return meta;
}

void write_sweep_csv(const std::filesystem::path& path, const SweepOutput& out, bool go) {
    std::ofstream f = open_out(path);
    f << "mu,e1,e2,e3,e4,true_error,raw_radicand_e2";
    if (go) f << ",e1go,e2go";
    f << "\n";
    for (const SweepRow& r : out.rows) {
        f << fmt(r.mu) << ',' << fmt(r.e1) << ',' << fmt(r.e2) << ',' << fmt(r.e3) << ','
          << fmt(r.e4) << ',' << fmt(r.true_error) << ',' << fmt(r.raw_radicand_e2);
        if (go) f << ',' << fmt(r.e1go) << ',' << fmt(r.e2go);
        f << "\n";
    }
}

SweepOutput sweep_impl(const ExperimentConfig& cfg, Pipeline& p, const std::string& out_dir,
                       const char* command) {
    const TruthProblem& problem = p.lp.problem;
    const ParameterGrid& grid = p.lp.grid;

    SweepOutput out;
    out.precision = cfg.precision;
    out.nhat = p.rb.nhat();
    const int m = p.rb.flat_size();
    out.sigma = (1 + m) * (1 + m);
    out.sigma_hat = cfg.sigma_hat;
    out.delta = p.rb.delta;
    out.greedy_warning = p.rb.warning;
    out.selected = p.rb.selected;
    for (double mu : p.rb.selected) out.selected_rows.push_back(grid.index_of(mu));
    if (p.eim) {
        out.eim_khat = p.eim->khat();
        out.eim_breakdown = p.eim->breakdown_step;
    }
    if (p.e3s) {
        out.e3_enabled = p.e3s->enabled;
        out.e3_cond = p.e3s->cond_estimate;
    }
    out.beta_min = std::numeric_limits<double>::infinity();
    for (double mu : grid.points) out.beta_min = std::min(out.beta_min, problem.beta_lb(mu));
    if (cfg.goal_oriented) out.varsigma = p.dual_rb->delta;

    const bool with_truth = cfg.true_error.value_or(problem.n() <= 500);
    out.rows.resize(grid.points.size());
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
        const double mu = grid.points[i];
        SweepRow& row = out.rows[i];
        row.mu = mu;
        if (wants(cfg, Estimator::E1)) row.e1 = e1(p.rb, problem, mu).value;
        if (wants(cfg, Estimator::E2)) {
            const BoundReport rep = e2(p.rb, problem, mu, p.bd);
            row.e2 = rep.value;
            row.raw_radicand_e2 = rep.raw_radicand;
        }
        if (p.e3s && p.e3s->enabled) row.e3 = e3(*p.e3s, p.rb, problem, mu).value;
        if (p.eim) row.e4 = e4(*p.eim, *p.e4s, p.rb, problem, mu).value;
        if (with_truth) {
            const Vec u = solve_truth(problem, mu);
            const Vec uhat = lift(p.rb, reduced_solve(p.rb, problem, mu));
            row.true_error = v_norm(problem, u - uhat);
        }
        if (cfg.goal_oriented) {
            row.e1go = e1_go(p.rb, *p.dual_rb, problem, *p.dual_problem, mu).value;
            row.e2go = e2_go(p.rb, *p.dual_rb, problem, *p.dual_problem, mu, p.bd, *p.dual_bd).value;
        }
    }

    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    write_sweep_csv(dir / "sweep.csv", out, cfg.goal_oriented);
    if (p.eim) write_diagnostics_csv((dir / "eim_diag.csv").string(), *p.eim);
    save_json((dir / "meta.json").string(), meta_json(cfg, p, out, command));
    if (cfg.save_state) {
        save_json((dir / "rb_state.json").string(), rb_state_to_json(p.rb));
        if (p.eim) save_json((dir / "eim_state.json").string(), eim_state_to_json(*p.eim));
        if (p.dual_rb) save_json((dir / "dual_rb_state.json").string(), rb_state_to_json(*p.dual_rb));
    }
    return out;
}

} // namespace

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    if (!j.contains("problem")) throw std::invalid_argument("config: missing 'problem'");
    cfg.problem = j.at("problem");
    cfg.precision = parse_precision(j.value("precision", "double"));
    if (j.contains("greedy")) {
        const json& g = j.at("greedy");
        cfg.greedy.tol_rb = g.value("tol_rb", cfg.greedy.tol_rb);
        cfg.greedy.nmax = g.value("nmax", cfg.greedy.nmax);
        if (g.contains("estimator")) cfg.greedy.driver = parse_estimator(g.at("estimator").get<std::string>());
        if (g.contains("start_mu") && !g.at("start_mu").is_null())
            cfg.greedy.start_mu = g.at("start_mu").get<double>();
    }
    if (j.contains("estimators")) {
        cfg.estimators.clear();
        for (const auto& e : j.at("estimators")) cfg.estimators.push_back(parse_estimator(e.get<std::string>()));
        if (cfg.estimators.empty()) throw std::invalid_argument("config: empty estimator list");
    }
    cfg.sigma_hat = j.value("sigma_hat", cfg.sigma_hat);
    if (j.contains("eim_variant")) cfg.eim_variant = parse_eim_variant(j.at("eim_variant").get<std::string>());
    cfg.eim_residual_tol = j.value("eim_residual_tol", cfg.eim_residual_tol);
    cfg.e3_seed = j.value("e3_seed", cfg.e3_seed);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("xi") && !j.at("xi").is_null()) cfg.xi = j.at("xi").get<double>();
    cfg.goal_oriented = j.value("goal_oriented", cfg.goal_oriented);
    if (j.contains("true_error") && !j.at("true_error").is_null())
        cfg.true_error = j.at("true_error").get<bool>();
    cfg.save_state = j.value("save_state", cfg.save_state);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) { return config_from_json(load_json(path)); }

SweepOutput run_sweep(const ExperimentConfig& cfg, const std::string& out_dir) {
    Pipeline p = build_pipeline(cfg);
    return sweep_impl(cfg, p, out_dir, "run");
}

PerturbOutput run_perturb(const ExperimentConfig& cfg, const std::string& out_dir) {
    if (!cfg.xi) throw std::invalid_argument("perturb: config must set xi");
    Pipeline p = build_pipeline(cfg);
    PerturbOutput out;
    out.xi = *cfg.xi;
    out.sweep = sweep_impl(cfg, p, out_dir, "perturb");
    out.target = out.sweep.delta * out.xi / out.sweep.beta_min;

    std::ofstream f = open_out(std::filesystem::path(out_dir) / "perturb.csv");
    f << "mu,e1,target,ratio\n";
    for (double mu : p.rb.selected) {
        const double v = e1(p.rb, p.lp.problem, mu).value;
        out.e1_at_selected.push_back(v);
        f << fmt(mu) << ',' << fmt(v) << ',' << fmt(out.target) << ',' << fmt(v / out.target) << "\n";
    }
    return out;
}

EimState run_eim_diag(const ExperimentConfig& cfg, const std::string& out_dir) {
    ExperimentConfig local = cfg;
    if (!wants(local, Estimator::E4)) local.estimators.push_back(Estimator::E4);
    Pipeline p = build_pipeline(local);

    SweepOutput out;
    out.precision = local.precision;
    out.nhat = p.rb.nhat();
    const int m = p.rb.flat_size();
    out.sigma = (1 + m) * (1 + m);
    out.sigma_hat = local.sigma_hat;
    out.delta = p.rb.delta;
    out.selected = p.rb.selected;
    out.greedy_warning = p.rb.warning;
    out.beta_min = std::numeric_limits<double>::infinity();
    for (double mu : p.lp.grid.points) out.beta_min = std::min(out.beta_min, p.lp.problem.beta_lb(mu));

    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    write_diagnostics_csv((dir / "eim_diag.csv").string(), *p.eim);
    save_json((dir / "meta.json").string(), meta_json(local, p, out, "eim-diag"));
    if (local.save_state) save_json((dir / "eim_state.json").string(), eim_state_to_json(*p.eim));
    return *p.eim;
}

std::vector<BenchRow> bench_online(const ExperimentConfig& cfg, const std::vector<int>& n_values,
                                   const std::string& out_dir, int calls) {
    if (n_values.size() < 2) throw std::invalid_argument("bench: need at least two truth sizes");
    if (calls < 1) throw std::invalid_argument("bench: need at least one call");
    std::vector<BenchRow> rows;

    for (int n : n_values) {
        ExperimentConfig local = cfg;
        if (local.problem.value("problem", "") == "diffusion1d")
            local.problem["mesh_h"] = 1.0 / (n + 1);
        else
            local.problem["n"] = n;
        local.problem["check_grid"] = false;
        local.true_error = false;
        Pipeline p = build_pipeline(local);
        const TruthProblem& problem = p.lp.problem;
        const auto& pts = p.lp.grid.points;

        auto time_estimator = [&](const std::string& name, auto&& call) {
            std::vector<double> ns(static_cast<std::size_t>(calls));
            volatile double sink = 0.0;
            for (int warm = 0; warm < 16; ++warm) sink = sink + call(pts[static_cast<std::size_t>(warm) % pts.size()]);
            for (int c = 0; c < calls; ++c) {
                const double mu = pts[static_cast<std::size_t>(c) % pts.size()];
                const auto t0 = std::chrono::steady_clock::now();
                sink = sink + call(mu);
                const auto t1 = std::chrono::steady_clock::now();
                ns[static_cast<std::size_t>(c)] =
                    std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
            }
            std::nth_element(ns.begin(), ns.begin() + calls / 2, ns.end());
            rows.push_back({n, name, ns[static_cast<std::size_t>(calls / 2)], calls});
            (void)sink;
        };

        if (wants(local, Estimator::E1))
            time_estimator("E1", [&](double mu) { return e1(p.rb, problem, mu).value; });
        if (wants(local, Estimator::E2))
            time_estimator("E2", [&](double mu) { return e2(p.rb, problem, mu, p.bd).value; });
        if (p.e3s && p.e3s->enabled)
            time_estimator("E3", [&](double mu) { return e3(*p.e3s, p.rb, problem, mu).value; });
        if (p.eim)
            time_estimator("E4", [&](double mu) { return e4(*p.eim, *p.e4s, p.rb, problem, mu).value; });
    }

    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    std::ofstream f = open_out(dir / "timing.csv");
    f << "n,estimator,median_ns,calls\n";
    for (const BenchRow& r : rows)
        f << r.n << ',' << r.estimator << ',' << fmt(r.median_ns) << ',' << r.calls << "\n";
    return rows;
}

} // namespace rbeim
