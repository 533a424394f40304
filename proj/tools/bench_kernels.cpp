// Serial vs OpenMP timings for the parallel kernels.

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fabsearch/graph.hpp"
#include "fabsearch/index.hpp"
#include "fabsearch/sph.hpp"
#include "fabsearch/voxelize.hpp"

using namespace fabsearch;

namespace {

// Lumpy UV sphere, 2 * rings * segments triangles minus the pole fans' share.
TriangleMesh lumpy_sphere(int rings, int segments) {
  TriangleMesh m;
  for (int i = 0; i <= rings; ++i) {
    const double theta = std::numbers::pi * i / rings;
    for (int j = 0; j < segments; ++j) {
      const double phi = 2 * std::numbers::pi * j / segments;
      const double r = 10.0 + std::sin(3 * theta) * std::cos(5 * phi);
      m.vertices.push_back({r * std::sin(theta) * std::cos(phi), r * std::sin(theta) * std::sin(phi), r * std::cos(theta)});
    }
  }
  auto at = [segments](int i, int j) { return static_cast<std::uint32_t>(i * segments + (j % segments)); };
  for (int i = 0; i < rings; ++i)
    for (int j = 0; j < segments; ++j) {
      if (i > 0) m.triangles.push_back({at(i, j), at(i + 1, j), at(i, j + 1)});
      if (i + 1 < rings) m.triangles.push_back({at(i, j + 1), at(i + 1, j), at(i + 1, j + 1)});
    }
  return m;
}

const TriangleMesh& raw_mesh() {
  static const TriangleMesh m = lumpy_sphere(50, 101);
  return m;
}

Repository bench_repo(std::size_t n) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Repository repo;
  for (std::size_t i = 0; i < n; ++i) {
    PartRecord r;
    r.meta.part_id = static_cast<PartId>(i + 1);
    r.signature = SphSignature(16, 16);
    for (double& v : r.signature.power) v = u(rng);
    repo.add(std::move(r));
  }
  return repo;
}

void BM_voxelize_serial(benchmark::State& s) {
  const int R = static_cast<int>(s.range(0));
  const TriangleMesh m = normalize_mesh(raw_mesh(), R);
  for (auto _ : s) benchmark::DoNotOptimize(voxelize_surface_serial(m, R));
}
void BM_voxelize_parallel(benchmark::State& s) {
  const int R = static_cast<int>(s.range(0));
  const TriangleMesh m = normalize_mesh(raw_mesh(), R);
  for (auto _ : s) benchmark::DoNotOptimize(voxelize_surface(m, R));
}

void BM_signature_serial(benchmark::State& s) {
  const VoxelGrid g = voxelize(raw_mesh(), 32);
  for (auto _ : s) benchmark::DoNotOptimize(signature_serial(g));
}
void BM_signature_parallel(benchmark::State& s) {
  const VoxelGrid g = voxelize(raw_mesh(), 32);
  for (auto _ : s) benchmark::DoNotOptimize(signature(g));
}

void BM_graph_serial(benchmark::State& s) {
  const Repository repo = bench_repo(static_cast<std::size_t>(s.range(0)));
  for (auto _ : s) benchmark::DoNotOptimize(build_knn_graph_serial(repo, 11));
}
void BM_graph_parallel(benchmark::State& s) {
  const Repository repo = bench_repo(static_cast<std::size_t>(s.range(0)));
  for (auto _ : s) benchmark::DoNotOptimize(build_knn_graph(repo, 11));
}

}  // namespace

BENCHMARK(BM_voxelize_serial)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_voxelize_parallel)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_signature_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_signature_parallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_graph_serial)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_graph_parallel)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
