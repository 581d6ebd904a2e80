#include <benchmark/benchmark.h>

#include <numbers>

#include "phos/fock.hpp"
#include "phos/metrology.hpp"
#include "phos/spectral.hpp"

using namespace phos;

namespace {

constexpr double kPi = std::numbers::pi;

void bm_basis_enumeration(benchmark::State& state) {
    const int cap = static_cast<int>(state.range(0));
    for (auto _ : state) {
        auto basis = FockBasis::enumerate(2, cap);
        benchmark::DoNotOptimize(basis->size());
    }
}
BENCHMARK(bm_basis_enumeration)->Arg(4)->Arg(10)->Arg(20);

void bm_beam_splitter_apply(benchmark::State& state) {
    const int cap = static_cast<int>(state.range(0));
    auto basis = FockBasis::enumerate(2, cap);
    std::vector<int> occ = {cap / 2, cap - cap / 2};
    const DensityOperator rho = DensityOperator::from_pure(PureState::fock(basis, occ));
    Circuit c;
    c.bs(0, 1, kPi / 4.0);
    for (auto _ : state) {
        const DensityOperator out = apply_circuit(rho, c);
        benchmark::DoNotOptimize(out.trace());
    }
}
BENCHMARK(bm_beam_splitter_apply)->Arg(4)->Arg(8)->Arg(14);

void bm_lossy_hb_qfi(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(hb_network_qfi(n, 0.9, 0.5, 0.95, 0.8));
    }
}
BENCHMARK(bm_lossy_hb_qfi)->Arg(1)->Arg(2)->Arg(4);

void bm_schmidt_purity(benchmark::State& state) {
    JsaModel m = correlated_preset();
    m.grid_points = static_cast<int>(state.range(0));
    const JointSpectralAmplitude jsa = build_jsa(m);
    for (auto _ : state) {
        const Eigen::VectorXd lambda = schmidt_decompose(jsa);
        benchmark::DoNotOptimize(lambda.array().square().sum());
    }
}
BENCHMARK(bm_schmidt_purity)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
