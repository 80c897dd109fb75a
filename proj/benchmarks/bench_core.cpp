#include "mmsvc/microgrid.hpp"
#include "mmsvc/neural_network.hpp"
#include "mmsvc/parameter_estimator.hpp"
#include "mmsvc/poly_matrix.hpp"
#include "mmsvc/surrogate.hpp"

#include <benchmark/benchmark.h>

using namespace mmsvc;

// One RK4 step of the full 4-DER model.
static void BM_FullPlantStep(benchmark::State& st) {
    const auto p = MicrogridParams::reference_system();
    MicrogridModel model(p);
    MicrogridState s = MicrogridState::zero(p);
    const Vector e = Vector::Constant(4, 300.0);
    for (auto _ : st) {
        s = step_primary(model, s, e, 1e-6);
        benchmark::DoNotOptimize(s.x.data());
    }
}
BENCHMARK(BM_FullPlantStep);

// One secondary sample (5 ms) of the surrogate at the CI step.
static void BM_SurrogateSample(benchmark::State& st) {
    SurrogatePlant plant(SurrogateParams::reference_system(), 1e-5, 500);
    const Vector e = Vector::Constant(4, 300.0);
    for (auto _ : st) {
        plant.advance(e);
        benchmark::DoNotOptimize(plant.output());
    }
}
BENCHMARK(BM_SurrogateSample);

static void BM_EstimatorUpdate(benchmark::State& st) {
    const auto m = static_cast<Index>(st.range(0));
    const int n = 2, d = 1;
    EstimatorSettings es;
    es.rho = 1e-3;
    ParameterEstimator est(m, n, d, es);
    Rng rng(1);
    const Vector x = rng.uniform_vector(m * (2 * n + d - 1), 290, 310);
    const Vector e = rng.uniform_vector(m, -1, 1);
    for (auto _ : st) {
        auto rep = est.update(e, x);
        benchmark::DoNotOptimize(rep);
    }
}
BENCHMARK(BM_EstimatorUpdate)->Arg(1)->Arg(4)->Arg(8);

static void BM_NetworkTrainStep(benchmark::State& st) {
    Rng rng(2);
    NeuralSettings s;
    s.hidden = static_cast<int>(st.range(0));
    NeuralNetwork net(12, 4, s, rng);
    const Vector x = rng.uniform_vector(12, 290, 310);
    const Vector y = rng.uniform_vector(4, -1, 1);
    for (auto _ : st) {
        auto rep = net.train_step(x, y);
        benchmark::DoNotOptimize(rep);
    }
}
BENCHMARK(BM_NetworkTrainStep)->Arg(20)->Arg(80);

static void BM_Diophantine(benchmark::State& st) {
    Rng rng(3);
    std::vector<Matrix> a{Matrix::Identity(3, 3)};
    for (int i = 0; i < 4; ++i) a.push_back(rng.uniform_matrix(3, 3, -0.2, 0.2));
    const std::vector<double> fc{1.0, -0.2};
    const PolyMatrix A(a), F = PolyMatrix::scalar(fc, 3);
    for (auto _ : st) {
        auto sol = solve_diophantine(A, F, 2);
        benchmark::DoNotOptimize(sol);
    }
}
BENCHMARK(BM_Diophantine);
BENCHMARK_MAIN();
