// Serial reference vs OpenMP kernels.
#include <benchmark/benchmark.h>

#include "brdf/datasets.hpp"
#include "brdf/forest.hpp"
#include "brdf/kde.hpp"
#include "brdf/kernels.hpp"
#include "brdf/volume.hpp"

using namespace brdf;
using kernels::Exec;

namespace {

Exec exec_of(const benchmark::State& s) { return s.range(0) == 0 ? Exec::serial : Exec::parallel; }

struct Fixture {
    Matrix train, queries;
    Partition axis, oblique;
    Forest forest;
    KdeModel kde;

    static Fixture make() {
        Rng rng(1);
        Matrix train = sample_synthetic({SyntheticFamily::type1, 3}, 4000, rng);
        Matrix queries = sample_synthetic({SyntheticFamily::type1, 3}, 100000, rng);
        BoundingBox box = bounding_box_of(train);
        Partition axis = adaptive_partition(box, 256, 30, train, rng);
        Partition oblique = adaptive_oblique_partition(box, 256, 30, train, rng);
        ForestConfig cfg;
        cfg.splits = 64;
        Forest forest = fit_forest(train, cfg);
        std::vector<std::size_t> first(1000);
        for (std::size_t i = 0; i < first.size(); ++i) first[i] = i;
        KdeModel kde = fit_kde(train.select_rows(first));
        return Fixture{std::move(train), std::move(queries), std::move(axis), std::move(oblique), std::move(forest),
                       std::move(kde)};
    }
};

const Fixture& fx() {
    static const Fixture f = Fixture::make();
    return f;
}

void BM_LocateAxis(benchmark::State& s) {
    std::vector<LeafId> out(fx().queries.rows());
    for (auto _ : s) {
        kernels::locate_rows(fx().axis, fx().queries, out, exec_of(s));
        benchmark::DoNotOptimize(out.data());
    }
    s.SetItemsProcessed(static_cast<std::int64_t>(s.iterations() * fx().queries.rows()));
}

void BM_LocateOblique(benchmark::State& s) {
    std::vector<LeafId> out(fx().queries.rows());
    for (auto _ : s) {
        kernels::locate_rows(fx().oblique, fx().queries, out, exec_of(s));
        benchmark::DoNotOptimize(out.data());
    }
    s.SetItemsProcessed(static_cast<std::int64_t>(s.iterations() * fx().queries.rows()));
}

void BM_CountLeaves(benchmark::State& s) {
    for (auto _ : s) benchmark::DoNotOptimize(kernels::count_leaves(fx().axis, fx().queries, exec_of(s)));
    s.SetItemsProcessed(static_cast<std::int64_t>(s.iterations() * fx().queries.rows()));
}

void BM_MonteCarloVolumes(benchmark::State& s) {
    Rng rng(2);
    for (auto _ : s) benchmark::DoNotOptimize(monte_carlo_volumes(fx().oblique, 20000, rng, exec_of(s)));
}

void BM_ForestEval(benchmark::State& s) {
    for (auto _ : s) benchmark::DoNotOptimize(fx().forest.eval_batch(fx().queries, exec_of(s)));
    s.SetItemsProcessed(static_cast<std::int64_t>(s.iterations() * fx().queries.rows()));
}

void BM_KdeEval(benchmark::State& s) {
    Matrix q = fx().queries.select_rows([] {
        std::vector<std::size_t> r(2000);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = i;
        return r;
    }());
    for (auto _ : s) benchmark::DoNotOptimize(fx().kde.eval_batch(q, exec_of(s)));
    s.SetItemsProcessed(static_cast<std::int64_t>(s.iterations() * q.rows()));
}

}  // namespace

// Arg 0: serial reference, 1: OpenMP.
BENCHMARK(BM_LocateAxis)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LocateOblique)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CountLeaves)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarloVolumes)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForestEval)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KdeEval)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
