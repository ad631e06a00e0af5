// Serial reference vs OpenMP kernels. The second argument is the thread
// count for the parallel variant (the serial ones ignore it).

#include <benchmark/benchmark.h>
#include <omp.h>

#include <map>

#include "gsync/instance.hpp"
#include "gsync/kernels.hpp"
#include "gsync/stiefel.hpp"

using namespace gsync;

namespace {

constexpr Index kR = 3, kP = 5;

struct Fixture {
  BlockSymmetricMatrix<double> l;
  Mat<double> y, w;
};

const Fixture& fixture(Index n) {
  static std::map<Index, Fixture> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  const Graph g = erdos_renyi_graph(n, 20.0 / double(n - 1), 1);
  const auto inst = make_instance(g, sample_ground_truth<double>(n, kR, 2), NoiseModel::gaussian(0.3), 3);
  Rng rng(4);
  Fixture f{connection_laplacian(inst.measurements), random_point<double>(n, kR, kP, 5).matrix(), {}};
  f.w = gaussian_matrix<double>(n * kR, kP, rng);
  return cache.emplace(n, std::move(f)).first->second;
}

template <bool Parallel>
void BM_block_apply(benchmark::State& st) {
  const auto& f = fixture(st.range(0));
  omp_set_num_threads(int(st.range(1)));
  Mat<double> out;
  for (auto _ : st) {
    if constexpr (Parallel) kernels::block_apply(f.l, f.y, out);
    else kernels::block_apply_serial(f.l, f.y, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_diag_products(benchmark::State& st) {
  const auto& f = fixture(st.range(0));
  omp_set_num_threads(int(st.range(1)));
  for (auto _ : st) {
    auto d = Parallel ? kernels::diag_products(f.w, f.y, kR) : kernels::diag_products_serial(f.w, f.y, kR);
    benchmark::DoNotOptimize(d.data());
  }
}

template <bool Parallel>
void BM_project_tangent(benchmark::State& st) {
  const auto& f = fixture(st.range(0));
  omp_set_num_threads(int(st.range(1)));
  for (auto _ : st) {
    Mat<double> v = Parallel ? kernels::project_tangent(f.y, f.w, kR) : kernels::project_tangent_serial(f.y, f.w, kR);
    benchmark::DoNotOptimize(v.data());
  }
}

template <bool Parallel>
void BM_polar(benchmark::State& st) {
  const auto& f = fixture(st.range(0));
  omp_set_num_threads(int(st.range(1)));
  const Mat<double> m = f.y + 0.3 * f.w;
  for (auto _ : st) {
    Mat<double> q = Parallel ? kernels::blockwise_polar(m, kR) : kernels::blockwise_polar_serial(m, kR);
    benchmark::DoNotOptimize(q.data());
  }
}

void sizes(benchmark::internal::Benchmark* b) {
  const int max_threads = omp_get_max_threads();
  for (long n : {1000, 10000})
    for (int t = 1; t <= max_threads; t *= 2) b->Args({n, t});
}

}  // namespace

BENCHMARK(BM_block_apply<false>)->Apply(sizes);
BENCHMARK(BM_block_apply<true>)->Apply(sizes);
BENCHMARK(BM_diag_products<false>)->Apply(sizes);
BENCHMARK(BM_diag_products<true>)->Apply(sizes);
BENCHMARK(BM_project_tangent<false>)->Apply(sizes);
BENCHMARK(BM_project_tangent<true>)->Apply(sizes);
BENCHMARK(BM_polar<false>)->Apply(sizes);
BENCHMARK(BM_polar<true>)->Apply(sizes);

BENCHMARK_MAIN();
