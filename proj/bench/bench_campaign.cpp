#include <benchmark/benchmark.h>

#include "mrw/simulate.hpp"
#include "mrw/zoo.hpp"

using namespace mrw;

namespace {

const Model& petal() {
    static const Model m = build_model(zoo_from_string("petal-flower"));
    return m;
}

CampaignConfig campaign(const benchmark::State& st) {
    CampaignConfig c;
    c.trials = st.range(0);
    c.horizon = 1024;
    c.seed = 1;
    c.x_grid = {0.0, 1.0, 4.0};
    return c;
}

CycleSampleConfig cycles(const benchmark::State& st) {
    CycleSampleConfig c;
    c.cycles = st.range(0);
    c.seed = 1;
    return c;
}

void BM_campaign_openmp(benchmark::State& st) {
    const auto c = campaign(st);
    const Model& m = petal();
    for (auto _ : st) benchmark::DoNotOptimize(run_campaign(m, c));
    st.SetItemsProcessed(st.iterations() * c.trials * c.horizon);
}

void BM_campaign_serial(benchmark::State& st) {
    const auto c = campaign(st);
    const Model& m = petal();
    for (auto _ : st) benchmark::DoNotOptimize(run_campaign_serial(m, c));
    st.SetItemsProcessed(st.iterations() * c.trials * c.horizon);
}

void BM_cycles_openmp(benchmark::State& st) {
    const auto c = cycles(st);
    const Model& m = petal();
    for (auto _ : st) benchmark::DoNotOptimize(sample_cycles(m, c));
    st.SetItemsProcessed(st.iterations() * c.cycles);
}

void BM_cycles_serial(benchmark::State& st) {
    const auto c = cycles(st);
    const Model& m = petal();
    for (auto _ : st) benchmark::DoNotOptimize(sample_cycles_serial(m, c));
    st.SetItemsProcessed(st.iterations() * c.cycles);
}

}  // namespace

BENCHMARK(BM_campaign_openmp)->Arg(256)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_campaign_serial)->Arg(256)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_cycles_openmp)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_cycles_serial)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
