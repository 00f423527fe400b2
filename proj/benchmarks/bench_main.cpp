#include <benchmark/benchmark.h>

#include <random>

#include "qoc/trainer.hpp"
#include "qoc/vqc.hpp"

using namespace qoc;

namespace {

void BM_RotationGate(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    auto s = qsim::StateVector::ground(n);
    int q = 0;
    for (auto _ : state) {
        s.apply(qsim::GateOp::ry(q, 0.3));
        q = (q + 1) % n;
    }
    benchmark::DoNotOptimize(s.amplitudes().data());
}
BENCHMARK(BM_RotationGate)->DenseRange(2, 12, 2);

void BM_Cnot(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    auto s = qsim::StateVector::ground(n);
    s.apply(qsim::GateOp::rx(0, 1.1));
    for (auto _ : state) s.apply(qsim::GateOp::cnot(0, n - 1));
    benchmark::DoNotOptimize(s.amplitudes().data());
}
BENCHMARK(BM_Cnot)->DenseRange(2, 12, 2);

struct VqcFixture {
    vqc::Architecture arch;
    vqc::Params params;
    std::vector<double> x;

    VqcFixture(int n, int layers) : arch{n, layers, true, n, true}, params(vqc::Params::zeros(arch)) {
        std::mt19937_64 rng(1);
        vqc::init_params(params, rng);
        std::uniform_real_distribution<double> ang(-3.0, 3.0);
        for (int i = 0; i < n; ++i) x.push_back(ang(rng));
    }
};

void BM_VqcForward(benchmark::State& state) {
    VqcFixture f(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
    for (auto _ : state) benchmark::DoNotOptimize(vqc::forward(f.arch, f.params, f.x).outputs.data());
}
BENCHMARK(BM_VqcForward)->Args({4, 1})->Args({6, 1})->Args({6, 3})->Args({6, 5});

void BM_VqcForwardBackward(benchmark::State& state) {
    VqcFixture f(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
    const std::vector<double> up(static_cast<std::size_t>(f.arch.out_dim), 1.0);
    for (auto _ : state) {
        const auto fw = vqc::forward(f.arch, f.params, f.x);
        benchmark::DoNotOptimize(vqc::backward(fw.trace, up).theta_ry.data());
    }
}
BENCHMARK(BM_VqcForwardBackward)->Args({4, 1})->Args({6, 1})->Args({6, 3})->Args({6, 5});

void BM_TrainStep(benchmark::State& state, envs::EnvId env, const char* variant) {
    trainer::TrainConfig c;
    c.total_steps = 1000000;
    trainer::Trainer tr(env, agent::parse_variant(variant), {}, c, 3);
    // Fill the buffer so critic updates are part of the measured loop.
    for (int i = 0; i < 64; ++i) tr.train_step();
    for (auto _ : state) benchmark::DoNotOptimize(tr.train_step().actor_loss);
}
BENCHMARK_CAPTURE(BM_TrainStep, cartpole_classical, envs::EnvId::CartPole, "classical");
BENCHMARK_CAPTURE(BM_TrainStep, cartpole_hybrid_f, envs::EnvId::CartPole, "hybrid_f");
BENCHMARK_CAPTURE(BM_TrainStep, cartpole_hybrid_fotp, envs::EnvId::CartPole, "hybrid_fotp");
BENCHMARK_CAPTURE(BM_TrainStep, acrobot_classical, envs::EnvId::Acrobot, "classical");
BENCHMARK_CAPTURE(BM_TrainStep, acrobot_hybrid_f, envs::EnvId::Acrobot, "hybrid_f");

}  // namespace

BENCHMARK_MAIN();
