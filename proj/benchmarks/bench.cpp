#include <benchmark/benchmark.h>

#include <random>

#include "echotensor/factorization.hpp"
#include "echotensor/graph.hpp"
#include "echotensor/synthetic.hpp"
#include "helpers.hpp"

namespace echotensor {
namespace {

// Sparse tensor shaped like a news x users x communities share tensor.
void BM_Mttkrp(benchmark::State& state) {
  const auto users = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  const SparseTensor3 t = testing::random_sparse_tensor({200, users, 8}, 0.01, rng);
  const Matrix u = testing::random_matrix(200, 45, rng);
  const Matrix v = testing::random_matrix(static_cast<Eigen::Index>(users), 45, rng);
  const Matrix w = testing::random_matrix(8, 45, rng);
  for (auto _ : state) {
    for (int mode = 1; mode <= 3; ++mode) benchmark::DoNotOptimize(mttkrp(t, u, v, w, mode));
  }
  state.counters["nnz"] = static_cast<double>(t.nnz());
}
BENCHMARK(BM_Mttkrp)->Arg(400)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_EdgeBetweenness(benchmark::State& state) {
  SyntheticOptions o;
  o.num_users = static_cast<std::size_t>(state.range(0));
  o.num_news = 10;
  const SyntheticData d = gen_synthetic(o);
  const UndirectedGraph g(d.user_ids.size(), d.edges);
  for (auto _ : state) benchmark::DoNotOptimize(edge_betweenness(g));
  state.counters["edges"] = static_cast<double>(g.num_edges());
}
BENCHMARK(BM_EdgeBetweenness)->Arg(200)->Arg(400)->Arg(800)->Unit(benchmark::kMillisecond);

void BM_CmtfGradient(benchmark::State& state) {
  const auto rank = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(2);
  const SparseTensor3 t = testing::random_sparse_tensor({200, 400, 2}, 0.04, rng);
  const Matrix m = testing::random_matrix(200, 300, rng).cwiseAbs();
  const CmtfFactors f = cmtf_random_init(t, m, rank, 3);
  for (auto _ : state) benchmark::DoNotOptimize(cmtf_gradient(t, m, f));
}
BENCHMARK(BM_CmtfGradient)->Arg(10)->Arg(45)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace echotensor

BENCHMARK_MAIN();
