// Serial reference vs OpenMP kernels. Thread count follows MMS_HEATLAB_THREADS.

#include "heatlab/kernels.hpp"
#include "heatlab/operator.hpp"

#include <benchmark/benchmark.h>

#include <map>
#include <memory>
#include <numeric>

using namespace heatlab;

namespace {

const SpectralData& spectral(int n) {
    static std::map<int, SpectralData> cache;
    auto it = cache.find(n);
    if (it == cache.end()) {
        auto space = std::make_shared<const WeightedSpace>(SpaceSpec::interval(-10, 10, n, PotentialSpec::linear(1.0)));
        it = cache.emplace(n, decompose(assemble(space))).first;
    }
    return it->second;
}

std::vector<std::size_t> every(std::size_t n, std::size_t stride) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n; i += stride) out.push_back(i);
    return out;
}

template <auto Fn>
void kernel_matrix(benchmark::State& state) {
    const auto& spec = spectral(static_cast<int>(state.range(0)));
    const auto rows = every(spec.size(), 4);
    for (auto _ : state) benchmark::DoNotOptimize(Fn(spec, rows, rows, 0.5));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows.size() * rows.size()));
}

template <auto Fn>
void semigroup(benchmark::State& state) {
    const auto& spec = spectral(static_cast<int>(state.range(0)));
    std::vector<double> u(spec.size());
    std::iota(u.begin(), u.end(), 0.0);
    for (auto _ : state) benchmark::DoNotOptimize(Fn(spec, u, 0.5));
}

template <auto Fn>
void ball_profile(benchmark::State& state) {
    const auto& spec = spectral(static_cast<int>(state.range(0)));
    std::vector<double> radii;
    for (int k = 1; k <= 256; ++k) radii.push_back(0.03 * k);
    for (auto _ : state) benchmark::DoNotOptimize(Fn(spec.space(), spec.size() / 2, radii));
}

template <auto Fn>
void chapman_kolmogorov(benchmark::State& state) {
    const auto& spec = spectral(static_cast<int>(state.range(0)));
    const std::size_t mid = spec.size() / 2;
    for (auto _ : state) benchmark::DoNotOptimize(Fn(spec, mid, mid + 3, 0.3, 0.4));
}

} // namespace

BENCHMARK(kernel_matrix<serial::kernel_matrix>)->Name("kernel_matrix/serial")->Arg(512)->Arg(1024);
BENCHMARK(kernel_matrix<parallel::kernel_matrix>)->Name("kernel_matrix/omp")->Arg(512)->Arg(1024);
BENCHMARK(semigroup<serial::semigroup_apply>)->Name("semigroup_apply/serial")->Arg(512)->Arg(1024);
BENCHMARK(semigroup<parallel::semigroup_apply>)->Name("semigroup_apply/omp")->Arg(512)->Arg(1024);
BENCHMARK(ball_profile<serial::ball_volume_profile>)->Name("ball_volume_profile/serial")->Arg(1024);
BENCHMARK(ball_profile<parallel::ball_volume_profile>)->Name("ball_volume_profile/omp")->Arg(1024);
BENCHMARK(chapman_kolmogorov<serial::chapman_kolmogorov_sum>)->Name("chapman_kolmogorov/serial")->Arg(1024);
BENCHMARK(chapman_kolmogorov<parallel::chapman_kolmogorov_sum>)->Name("chapman_kolmogorov/omp")->Arg(1024);

int main(int argc, char** argv) {
    configure_threads();
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
