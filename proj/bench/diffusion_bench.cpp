// Compares the serial reference influence kernel against the OpenMP one and
// times a full greedy pass. The two kernels must agree exactly; the speedup
// column is the point of the exercise.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#include "fim/diffusion.hpp"
#include "fim/graph.hpp"
#include "fim/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

double time_call(const std::function<void()>& fn, int reps) {
  auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() /
         reps;
}

}  // namespace

int main() {
  fim::SbmSpec spec;
  spec.group_sizes = {350, 150};
  spec.prob_matrix = {{0.025, 0.001}, {0.001, 0.025}};
  spec.seed = 7;
  auto graph = fim::generate_sbm(spec);
  std::printf("network: %zu nodes, %zu edges\n", graph.node_count(), graph.edge_count());

  auto ensemble = fim::sample_ensemble(graph, 0.01, 1000, 42);
  std::printf("ensemble: %zu samples, %zu arcs total\n", ensemble.sample_count(),
              ensemble.total_arc_count());

  fim::Rng rng(99);
  std::vector<fim::NodeId> seeds;
  while (seeds.size() < 40) {
    auto v = static_cast<fim::NodeId>(rng.next_below(graph.node_count()));
    if (std::find(seeds.begin(), seeds.end(), v) == seeds.end()) seeds.push_back(v);
  }

  auto serial = fim::estimate_influence_serial(ensemble, graph, seeds);
  auto parallel = fim::estimate_influence(ensemble, graph, seeds);
  if (serial.total != parallel.total || serial.per_group != parallel.per_group) {
    std::fprintf(stderr, "kernel mismatch: serial %.6f vs parallel %.6f\n", serial.total,
                 parallel.total);
    return 1;
  }
  std::printf("kernels agree: influence %.4f\n", serial.total);

#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (OpenMP disabled)\n");
#endif

  const int reps = 50;
  double t_serial = time_call(
      [&] { fim::estimate_influence_serial(ensemble, graph, seeds); }, reps);
  double t_parallel =
      time_call([&] { fim::estimate_influence(ensemble, graph, seeds); }, reps);
  std::printf("%-28s %10.3f ms\n", "estimate_influence (serial)", 1e3 * t_serial);
  std::printf("%-28s %10.3f ms  speedup %.2fx\n", "estimate_influence (openmp)",
              1e3 * t_parallel, t_serial / t_parallel);

  auto greedy_start = std::chrono::steady_clock::now();
  auto greedy = fim::greedy_celf(ensemble, graph, 40);
  double t_greedy =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - greedy_start).count();
  std::printf("%-28s %10.3f ms  influence %.2f\n", "greedy_celf k=40", 1e3 * t_greedy,
              greedy.influence_curve.back());
  return 0;
}
