#include "hebb/hebbnet.hpp"
#include "hebb/numerics.hpp"

#include <benchmark/benchmark.h>

using namespace hebb;

namespace {

vec random_vec(random_source& rng, int n)
{
    vec v(n);
    for (double& x : v)
        x = rng.next_unit();
    return v;
}

void BM_matvec_784(benchmark::State& state)
{
    random_source rng(1);
    const matrix w = numerics::he_init(784, 784, rng);
    const vec x = random_vec(rng, 784);
    for (auto _ : state) {
        vec y = numerics::matvec(w, x);
        benchmark::DoNotOptimize(y.data());
    }
}
BENCHMARK(BM_matvec_784);

void BM_forward(benchmark::State& state)
{
    net::network_config cfg;
    cfg.hidden_layers = int(state.range(0));
    cfg.seed = 1;
    const net::network n = net::init_network(cfg);
    random_source rng(2);
    const vec x = random_vec(rng, 784);
    for (auto _ : state) {
        auto t = net::forward(n, x);
        benchmark::DoNotOptimize(t.activations.data());
    }
}
BENCHMARK(BM_forward)->Arg(3)->Arg(14);

void BM_train_sample(benchmark::State& state)
{
    net::network_config cfg;
    cfg.hidden_layers = int(state.range(0));
    cfg.seed = 1;
    net::network n = net::init_network(cfg);
    random_source rng(3);
    const vec x = random_vec(rng, 784);
    for (auto _ : state) {
        const auto trace = net::forward(n, x);
        net::hebbian_update(n, trace, 1e-7);
    }
}
BENCHMARK(BM_train_sample)->Arg(3)->Arg(14);

void BM_he_init_784(benchmark::State& state)
{
    random_source rng(4);
    for (auto _ : state) {
        matrix m = numerics::he_init(784, 784, rng);
        benchmark::DoNotOptimize(m.data());
    }
}
BENCHMARK(BM_he_init_784);

} // namespace

BENCHMARK_MAIN();
