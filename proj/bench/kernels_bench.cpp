// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "fpp/derivative.hpp"
#include "fpp/extremes.hpp"
#include "fpp/lanes.hpp"
#include "fpp/variance.hpp"

namespace {

fpp::Lattice bench_box() {
  fpp::LatticeSpec s;
  s.reduced_box = std::vector<fpp::AxisRange>{{0, 4}, {0, 2}};  // 22 edges
  s.a = 1;
  s.b = 3;
  return fpp::build_lattice(s);
}

fpp::Lattice small_box() {
  fpp::LatticeSpec s;
  s.reduced_box = std::vector<fpp::AxisRange>{{0, 3}, {0, 2}};  // 17 edges
  s.a = 1;
  s.b = 3;
  return fpp::build_lattice(s);
}

fpp::Lattice strip() {
  fpp::LatticeSpec s;
  s.reduced_box = std::vector<fpp::AxisRange>{{0, 4}, {0, 1}};  // 13 edges
  return fpp::build_lattice(s);
}

fpp::EdgeSubset first_edges(const fpp::Lattice& g, std::size_t n) {
  std::vector<fpp::EdgeId> v;
  for (std::uint32_t i = 0; i < n && i < g.edge_count(); ++i) v.push_back(fpp::EdgeId{i});
  return fpp::EdgeSubset(std::move(v));
}

fpp::HypercubeTable full_table(const fpp::Lattice& g) {
  return fpp::build_hypercube(g, fpp::Environment(g.edge_count()), first_edges(g, g.edge_count()));
}

void BM_hypercube_serial(benchmark::State& st) {
  const auto g = bench_box();
  const auto v = first_edges(g, 16);
  for (auto _ : st) benchmark::DoNotOptimize(fpp::reference::build_hypercube(g, fpp::Environment(g.edge_count()), v));
}
void BM_hypercube_parallel(benchmark::State& st) {
  const auto g = bench_box();
  const auto v = first_edges(g, 16);
  for (auto _ : st) benchmark::DoNotOptimize(fpp::build_hypercube(g, fpp::Environment(g.edge_count()), v));
}

void BM_extremes_serial(benchmark::State& st) {
  const auto g = small_box();
  for (auto _ : st) benchmark::DoNotOptimize(fpp::reference::exhaustive_extremes_upto(g, 3));
}
void BM_extremes_parallel(benchmark::State& st) {
  const auto g = small_box();
  for (auto _ : st) benchmark::DoNotOptimize(fpp::exhaustive_extremes_upto(g, 3));
}

void BM_expected_derivatives_serial(benchmark::State& st) {
  const auto t = full_table(strip());
  for (auto _ : st) benchmark::DoNotOptimize(fpp::reference::expected_derivatives(t, fpp::BernoulliParam(0.5)));
}
void BM_expected_derivatives_parallel(benchmark::State& st) {
  const auto t = full_table(strip());
  for (auto _ : st) benchmark::DoNotOptimize(fpp::expected_derivatives(t, fpp::BernoulliParam(0.5)));
}

void BM_decomposition_serial(benchmark::State& st) {
  const auto t = full_table(strip());
  for (auto _ : st) benchmark::DoNotOptimize(fpp::reference::decomposition(t, fpp::BernoulliParam(0.5), 4));
}
void BM_decomposition_parallel(benchmark::State& st) {
  const auto t = full_table(strip());
  for (auto _ : st) benchmark::DoNotOptimize(fpp::decomposition(t, fpp::BernoulliParam(0.5), 4));
}

void BM_lane_verify_serial(benchmark::State& st) {
  const auto e = fpp::place_lanes(fpp::make_lane_spec(4, 4, 0, 0));
  for (auto _ : st) benchmark::DoNotOptimize(fpp::reference::verify_embedding(e));
}
void BM_lane_verify_parallel(benchmark::State& st) {
  const auto e = fpp::place_lanes(fpp::make_lane_spec(4, 4, 0, 0));
  for (auto _ : st) benchmark::DoNotOptimize(fpp::verify_embedding(e));
}

}  // namespace

BENCHMARK(BM_hypercube_serial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_hypercube_parallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_extremes_serial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_extremes_parallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_expected_derivatives_serial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_expected_derivatives_parallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_decomposition_serial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_decomposition_parallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_lane_verify_serial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_lane_verify_parallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_MAIN();
