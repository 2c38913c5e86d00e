#include <benchmark/benchmark.h>

#include <vector>

#include "sne/encoder.hpp"
#include "sne/metrics.hpp"
#include "sne/ops.hpp"
#include "sne/rng.hpp"
#include "sne/tensor.hpp"
#include "sne/zoo.hpp"

namespace {

sne::Tensor random_matrix(std::int64_t rows, std::int64_t cols, sne::Rng& rng) {
    std::vector<double> data(static_cast<std::size_t>(rows * cols));
    for (auto& v : data) v = rng.normal();
    return sne::Tensor({rows, cols}, std::move(data));
}

void BM_MatMul(benchmark::State& state) {
    const std::int64_t n = state.range(0);
    sne::Rng rng(1);
    const sne::Tensor a = random_matrix(n, n, rng);
    const sne::Tensor b = random_matrix(n, n, rng);
    sne::NoGradGuard guard;
    for (auto _ : state) {
        sne::Tensor c = sne::matmul(a, b);
        benchmark::DoNotOptimize(c.data().data());
    }
    state.SetItemsProcessed(state.iterations() * 2 * n * n * n);
}
BENCHMARK(BM_MatMul)->Arg(64)->Arg(128)->Arg(256);

sne::CheckpointModel sample_arch1() {
    sne::CheckpointModel model = sne::build_arch("arch1", 1);
    sne::Rng rng(7);
    sne::TraineeHyper hyper;
    sne::init_weights(model, hyper, rng);
    return model;
}

sne::SneParams desk_params() {
    sne::SneConfig config;
    config.h = 8;
    config.H = 8;
    config.heads = 4;
    config.chunksize = 16;
    sne::Rng rng(3);
    return sne::SneParams::init(config, rng);
}

void BM_EncodeNetwork(benchmark::State& state) {
    const sne::CheckpointModel model = sample_arch1();
    const sne::SneParams params = desk_params();
    const sne::PreparedModel prepared = sne::prepare_model(model, params.config.chunksize);
    sne::NoGradGuard guard;
    for (auto _ : state) {
        sne::Tensor z = sne::encode_prepared(prepared, params);
        benchmark::DoNotOptimize(z.data().data());
    }
}
BENCHMARK(BM_EncodeNetwork)->Unit(benchmark::kMillisecond);

void BM_EncodeNetworkBackward(benchmark::State& state) {
    const sne::CheckpointModel model = sample_arch1();
    sne::SneParams params = desk_params();
    const sne::PreparedModel prepared = sne::prepare_model(model, params.config.chunksize);
    std::vector<sne::Tensor> tensors = params.parameters();
    for (auto _ : state) {
        for (auto& t : tensors) t.zero_grad();
        sne::Tensor z = sne::encode_prepared(prepared, params);
        sne::backward(sne::reduce_sum(z));
        benchmark::DoNotOptimize(tensors.front().grad().data());
    }
}
BENCHMARK(BM_EncodeNetworkBackward)->Unit(benchmark::kMillisecond);

void BM_KendallTau(benchmark::State& state) {
    const std::int64_t n = state.range(0);
    sne::Rng rng(11);
    std::vector<double> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
    for (auto& v : a) v = rng.uniform();
    for (auto& v : b) v = rng.uniform();
    for (auto _ : state) {
        const double tau = sne::kendall_tau(a, b);
        benchmark::DoNotOptimize(tau);
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_KendallTau)->Arg(100)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
