// OpenMP kernels against their serial references.

#include <benchmark/benchmark.h>

#include <random>

#include "smoke/field_ops.hpp"
#include "smoke/nso.hpp"

using namespace smoke;

namespace {

void randomize(std::span<double> x, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& v : x) v = u(rng);
}

GridSpec grid(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  return GridSpec::square(n, 1.0 / n, Boundary::Neumann);
}

void BM_divergence_omp(benchmark::State& st) {
  FaceField v(grid(st));
  randomize(v.values(), 1);
  ScalarField out(v.spec());
  for (auto _ : st) {
    divergence_into(v, out);
    benchmark::DoNotOptimize(out.values().data());
  }
}

void BM_divergence_serial(benchmark::State& st) {
  FaceField v(grid(st));
  randomize(v.values(), 1);
  for (auto _ : st) benchmark::DoNotOptimize(serial::divergence(v));
}

void BM_gradient_omp(benchmark::State& st) {
  ScalarField p(grid(st));
  randomize(p.values(), 2);
  FaceField out(p.spec());
  for (auto _ : st) {
    gradient_into(p, out);
    benchmark::DoNotOptimize(out.values().data());
  }
}

void BM_gradient_serial(benchmark::State& st) {
  ScalarField p(grid(st));
  randomize(p.values(), 2);
  for (auto _ : st) benchmark::DoNotOptimize(serial::gradient(p));
}

void BM_dot_omp(benchmark::State& st) {
  FaceField a(grid(st)), b(a.spec());
  randomize(a.values(), 3);
  randomize(b.values(), 4);
  for (auto _ : st) benchmark::DoNotOptimize(dot(a, b));
}

void BM_dot_serial(benchmark::State& st) {
  FaceField a(grid(st)), b(a.spec());
  randomize(a.values(), 3);
  randomize(b.values(), 4);
  for (auto _ : st) benchmark::DoNotOptimize(serial::dot(a.values(), b.values()));
}

// one SCGS sweep over an 8-step window; arg 1 toggles the coloured parallel loop
void BM_scgs_sweep(benchmark::State& st) {
  const auto s = grid(st);
  const int N = 8;
  std::vector<FaceField> vstar;
  for (int i = 0; i < N; ++i) {
    vstar.emplace_back(s);
    randomize(vstar.back().values(), 10 + i);
    scale(vstar.back().values(), 0.01);
  }
  auto x = SpacetimeFields::zeros(s, N);
  auto work = SpacetimeFields::zeros(s, N);
  SmootherOptions opt;
  opt.parallel = st.range(1) != 0;
  const NsoParams prm;
  for (auto _ : st) {
    scgs_smooth(x, vstar, nullptr, prm, work, opt);
    benchmark::ClobberMemory();
  }
}

}  // namespace

BENCHMARK(BM_divergence_omp)->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(BM_divergence_serial)->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(BM_gradient_omp)->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(BM_gradient_serial)->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(BM_dot_omp)->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(BM_dot_serial)->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(BM_scgs_sweep)->Args({32, 0})->Args({32, 1})->Args({64, 0})->Args({64, 1})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
