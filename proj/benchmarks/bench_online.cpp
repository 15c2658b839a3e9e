#include <benchmark/benchmark.h>

#include <map>
#include <optional>

#include "rbeim/eim.hpp"
#include "rbeim/estimators.hpp"
#include "rbeim/precision.hpp"
#include "rbeim/problems.hpp"
#include "rbeim/rb.hpp"

namespace {

using namespace rbeim;

// One offline pipeline per truth dimension, built lazily and reused by every
// benchmark in the process. The online work under test never touches it.
struct Pipe {
    TruthProblem problem;
    ParameterGrid grid;
    ReducedBasisState rb;
    BoundDataVariant bd_single;
    BoundDataVariant bd_double;
    BoundDataVariant bd_extended;
    std::optional<E3State> e3s;
    std::optional<EimState> eim;
    std::optional<E4State> e4s;
};

const Pipe& pipeline(int n) {
    static std::map<int, Pipe> cache;
    auto [it, fresh] = cache.try_emplace(n);
    Pipe& p = it->second;
    if (fresh) {
        Diffusion1DSpec spec;
        spec.h = 1.0 / (n + 1);
        spec.trial_count = 240;
        p.problem = build_diffusion1d(spec);
        p.grid = diffusion_grid(spec);

        GreedyConfig cfg;
        cfg.nmax = 7;
        p.rb = greedy_build(p.problem, p.grid, cfg);
        p.bd_single = make_bound_data(p.rb, p.problem, Precision::Single);
        p.bd_double = make_bound_data(p.rb, p.problem, Precision::Double);
        p.bd_extended = make_bound_data(p.rb, p.problem, Precision::Extended);
        p.e3s = build_e3(p.rb, p.problem, p.grid, 0);

        const int m = p.rb.flat_size();
        const int sigma = (1 + m) * (1 + m);
        Mat table(sigma, static_cast<Eigen::Index>(p.grid.points.size()));
        for (std::size_t c = 0; c < p.grid.points.size(); ++c)
            table.col(static_cast<Eigen::Index>(c)) = build_xvector(p.rb, p.problem, p.grid.points[c]);
        EimOptions opt;
        opt.sigma_hat = 23;
        opt.variant = EimVariant::Stabilized;
        p.eim = eim_offline(table, p.grid.points, opt);
        p.e4s = build_e4(*p.eim, p.rb, p.problem);
    }
    return p;
}

double next_mu(const Pipe& p, std::size_t& i) {
    return p.grid.points[i++ % p.grid.points.size()];
}

void bm_e1(benchmark::State& state) {
    const Pipe& p = pipeline(static_cast<int>(state.range(0)));
    std::size_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(e1(p.rb, p.problem, next_mu(p, i)).value);
}

void bm_e2(benchmark::State& state, const BoundDataVariant Pipe::* bd) {
    const Pipe& p = pipeline(static_cast<int>(state.range(0)));
    std::size_t i = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(e2(p.rb, p.problem, next_mu(p, i), p.*bd).value);
}

void bm_e2_single(benchmark::State& state) { bm_e2(state, &Pipe::bd_single); }
void bm_e2_double(benchmark::State& state) { bm_e2(state, &Pipe::bd_double); }
void bm_e2_extended(benchmark::State& state) { bm_e2(state, &Pipe::bd_extended); }

void bm_e3(benchmark::State& state) {
    const Pipe& p = pipeline(static_cast<int>(state.range(0)));
    std::size_t i = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(e3(*p.e3s, p.rb, p.problem, next_mu(p, i)).value);
}

void bm_e4(benchmark::State& state) {
    const Pipe& p = pipeline(static_cast<int>(state.range(0)));
    std::size_t i = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(e4(*p.eim, *p.e4s, p.rb, p.problem, next_mu(p, i)).value);
}

} // namespace

BENCHMARK(bm_e1)->Arg(200)->Arg(2000)->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_e2_double)->Arg(200)->Arg(2000)->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_e3)->Arg(200)->Arg(2000)->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_e4)->Arg(200)->Arg(2000)->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_e2_single)->Arg(200)->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_e2_extended)->Arg(200)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
