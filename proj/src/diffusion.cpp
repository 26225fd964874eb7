#include "fim/diffusion.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <queue>

#include "fim/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fim {

std::uint64_t LiveEdgeEnsemble::identity() const {
  std::uint64_t h = mix_seed(seed_, sample_count_);
  h = mix_seed(h, std::bit_cast<std::uint64_t>(p_));
  h = mix_seed(h, node_count_);
  return h | 1;
}

LiveEdgeEnsemble sample_ensemble(const AttributedGraph& graph, double p, std::size_t delta,
                                 std::uint64_t rng_seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("sample_ensemble: p must lie in [0,1]");
  if (delta < 1) throw ValidationError("sample_ensemble: delta must be >= 1");

  std::size_t n = graph.node_count();
  const auto& edges = graph.edges();

  LiveEdgeEnsemble ens;
  ens.sample_count_ = delta;
  ens.node_count_ = n;
  ens.p_ = p;
  ens.seed_ = rng_seed;

  // Per-sample arc lists, generated from per-sample substreams so the result
  // does not depend on scheduling.
  std::vector<std::vector<Edge>> arcs(delta);  // (source, target)
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8)
#endif
  for (std::size_t s = 0; s < delta; ++s) {
    Rng rng(mix_seed(rng_seed, 0x6c697665ull, s));
    auto& list = arcs[s];
    for (const auto& [u, v] : edges) {
      if (p >= 1.0) {
        list.emplace_back(u, v);
        list.emplace_back(v, u);
        continue;
      }
      if (p > 0.0 && rng.bernoulli(p)) list.emplace_back(u, v);
      if (p > 0.0 && rng.bernoulli(p)) list.emplace_back(v, u);
    }
  }

  ens.offsets_.assign(delta * (n + 1), 0);
  std::size_t total = 0;
  for (std::size_t s = 0; s < delta; ++s) total += arcs[s].size();
  ens.targets_.resize(total);

  std::size_t base = 0;
  for (std::size_t s = 0; s < delta; ++s) {
    std::uint64_t* off = ens.offsets_.data() + s * (n + 1);
    for (const auto& [src, dst] : arcs[s]) ++off[src + 1];
    off[0] = base;
    for (std::size_t v = 1; v <= n; ++v) off[v] += off[v - 1];
    std::vector<std::uint64_t> cursor(off, off + n);
    for (const auto& [src, dst] : arcs[s]) ens.targets_[cursor[src]++] = dst;
    base = off[n];
  }
  return ens;
}

namespace {

// Stamped-visited BFS scratch, reused across samples without clearing.
struct ReachScratch {
  std::vector<std::uint32_t> stamp;
  std::vector<NodeId> queue;
  std::uint32_t epoch = 0;

  void ensure(std::size_t n) {
    if (stamp.size() < n) stamp.assign(n, 0);
  }
  std::uint32_t next_mark() {
    if (++epoch == 0) {  // wrapped; stale marks must not collide
      std::fill(stamp.begin(), stamp.end(), 0);
      epoch = 1;
    }
    return epoch;
  }
};

// Count of nodes reachable from seeds over one sample; optionally
// accumulates per-group counts into group_counts.
std::uint64_t reach_count(const LiveEdgeEnsemble& ens, std::size_t sample,
                          std::span<const NodeId> seeds, ReachScratch& scratch,
                          const AttributedGraph* group_source,
                          std::uint64_t* group_counts) {
  std::uint32_t mark = scratch.next_mark();
  auto& queue = scratch.queue;
  queue.clear();
  std::uint64_t count = 0;
  auto visit = [&](NodeId v) {
    if (scratch.stamp[v] == mark) return;
    scratch.stamp[v] = mark;
    queue.push_back(v);
    ++count;
    if (group_counts != nullptr)
      for (auto g : group_source->groups_of(v)) ++group_counts[g];
  };
  for (NodeId v : seeds) visit(v);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    for (NodeId w : ens.out_arcs(sample, queue[head])) visit(w);
  }
  return count;
}

void check_seed_set(const LiveEdgeEnsemble& ens, const AttributedGraph& graph,
                    std::span<const NodeId> seeds) {
  if (graph.node_count() != ens.node_count())
    throw ValidationError("estimate_influence: ensemble does not match graph");
  if (seeds.empty()) throw ValidationError("estimate_influence: empty seed set");
  for (NodeId v : seeds)
    if (v >= ens.node_count())
      throw ValidationError("estimate_influence: seed node out of range");
}

InfluenceEstimate finish_estimate(std::size_t delta, std::uint64_t total_sum,
                                  const std::vector<std::uint64_t>& group_sums) {
  InfluenceEstimate est;
  est.total = static_cast<double>(total_sum) / static_cast<double>(delta);
  est.per_group.resize(group_sums.size());
  for (std::size_t g = 0; g < group_sums.size(); ++g)
    est.per_group[g] = static_cast<double>(group_sums[g]) / static_cast<double>(delta);
  return est;
}

}  // namespace

InfluenceEstimate estimate_influence_serial(const LiveEdgeEnsemble& ensemble,
                                            const AttributedGraph& graph,
                                            std::span<const NodeId> seeds) {
  check_seed_set(ensemble, graph, seeds);
  std::size_t q = graph.group_count();
  std::uint64_t total_sum = 0;
  std::vector<std::uint64_t> group_sums(q, 0);
  std::vector<std::uint64_t> local(q, 0);
  ReachScratch scratch;
  scratch.ensure(ensemble.node_count());
  for (std::size_t s = 0; s < ensemble.sample_count(); ++s) {
    std::fill(local.begin(), local.end(), 0);
    total_sum += reach_count(ensemble, s, seeds, scratch, q ? &graph : nullptr,
                             q ? local.data() : nullptr);
    for (std::size_t g = 0; g < q; ++g) group_sums[g] += local[g];
  }
  return finish_estimate(ensemble.sample_count(), total_sum, group_sums);
}

InfluenceEstimate estimate_influence(const LiveEdgeEnsemble& ensemble,
                                     const AttributedGraph& graph,
                                     std::span<const NodeId> seeds) {
  check_seed_set(ensemble, graph, seeds);
  std::size_t q = graph.group_count();
  std::size_t delta = ensemble.sample_count();
  std::uint64_t total_sum = 0;
  std::vector<std::uint64_t> group_sums(q, 0);

#ifdef _OPENMP
#pragma omp parallel
  {
    ReachScratch scratch;
    scratch.ensure(ensemble.node_count());
    std::vector<std::uint64_t> local(q, 0), sample_local(q, 0);
    std::uint64_t local_total = 0;
#pragma omp for schedule(static) nowait
    for (std::size_t s = 0; s < delta; ++s) {
      std::fill(sample_local.begin(), sample_local.end(), 0);
      local_total += reach_count(ensemble, s, seeds, scratch, q ? &graph : nullptr,
                                 q ? sample_local.data() : nullptr);
      for (std::size_t g = 0; g < q; ++g) local[g] += sample_local[g];
    }
#pragma omp critical(fim_estimate_merge)
    {
      total_sum += local_total;
      for (std::size_t g = 0; g < q; ++g) group_sums[g] += local[g];
    }
  }
  return finish_estimate(delta, total_sum, group_sums);
#else
  return estimate_influence_serial(ensemble, graph, seeds);
#endif
}

double direct_ic_simulate(const AttributedGraph& graph, std::span<const NodeId> seeds,
                          double p, std::size_t rounds, std::uint64_t rng_seed) {
  if (seeds.empty()) throw ValidationError("direct_ic_simulate: empty seed set");
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("direct_ic_simulate: p must lie in [0,1]");
  if (rounds < 1) throw ValidationError("direct_ic_simulate: rounds must be >= 1");
  for (NodeId v : seeds)
    if (v >= graph.node_count()) throw ValidationError("direct_ic_simulate: seed out of range");

  std::size_t n = graph.node_count();
  std::vector<std::uint32_t> active(n, 0);
  std::vector<NodeId> frontier, next;
  std::uint64_t total = 0;

  Rng rng(mix_seed(rng_seed, 0x69637369ull));
  for (std::size_t r = 1; r <= rounds; ++r) {
    frontier.clear();
    std::uint64_t count = 0;
    for (NodeId v : seeds) {
      if (active[v] == r) continue;
      active[v] = static_cast<std::uint32_t>(r);
      frontier.push_back(v);
      ++count;
    }
    while (!frontier.empty()) {
      next.clear();
      for (NodeId u : frontier) {
        for (NodeId w : graph.neighbors(u)) {
          if (active[w] == r) continue;
          if (rng.bernoulli(p)) {
            active[w] = static_cast<std::uint32_t>(r);
            next.push_back(w);
            ++count;
          }
        }
      }
      frontier.swap(next);
    }
    total += count;
  }
  return static_cast<double>(total) / static_cast<double>(rounds);
}

namespace {

// Shared machinery for plain CELF on an ensemble over dense node ids.
struct CelfEngine {
  const LiveEdgeEnsemble& ens;
  std::size_t n;
  std::size_t delta;
  std::vector<std::uint8_t> activated;  // delta * n

  explicit CelfEngine(const LiveEdgeEnsemble& e)
      : ens(e), n(e.node_count()), delta(e.sample_count()), activated(delta * n, 0) {}

  // Newly reachable count from v across all samples given current activated
  // sets; does not modify state unless commit is true.
  std::uint64_t marginal(NodeId v, bool commit) {
    std::uint64_t gain = 0;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) reduction(+ : gain) if (!commit)
#endif
    for (std::size_t s = 0; s < delta; ++s) {
      std::uint8_t* act = activated.data() + s * n;
      if (act[v]) continue;
      if (commit) {
        gain += bfs_commit(s, v, act);
      } else {
        gain += bfs_count(s, v, act);
      }
    }
    return gain;
  }

  std::uint64_t bfs_count(std::size_t s, NodeId v, const std::uint8_t* act) {
    thread_local ReachScratch scratch;
    scratch.ensure(n);
    std::uint32_t mark = scratch.next_mark();
    auto& queue = scratch.queue;
    queue.clear();
    std::uint64_t count = 1;
    scratch.stamp[v] = mark;
    queue.push_back(v);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      for (NodeId w : ens.out_arcs(s, queue[head])) {
        if (act[w] || scratch.stamp[w] == mark) continue;
        scratch.stamp[w] = mark;
        queue.push_back(w);
        ++count;
      }
    }
    return count;
  }

  std::uint64_t bfs_commit(std::size_t s, NodeId v, std::uint8_t* act) {
    thread_local std::vector<NodeId> queue;
    queue.clear();
    std::uint64_t count = 1;
    act[v] = 1;
    queue.push_back(v);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      for (NodeId w : ens.out_arcs(s, queue[head])) {
        if (act[w]) continue;
        act[w] = 1;
        queue.push_back(w);
        ++count;
      }
    }
    return count;
  }
};

GreedyResult celf_core(const LiveEdgeEnsemble& ens, std::size_t k) {
  std::size_t n = ens.node_count();
  if (k < 1 || k > n)
    throw ValidationError("greedy_celf: k must satisfy 1 <= k <= node count");

  CelfEngine engine(ens);

  // Initial marginal gains, computed independently per candidate.
  std::vector<std::uint64_t> gains(n, 0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16)
#endif
  for (NodeId v = 0; v < n; ++v) gains[v] = engine.marginal(v, false);

  struct Entry {
    std::uint64_t gain;
    NodeId node;
    std::uint32_t stamp;  // seed-set size the gain was computed at
  };
  // Max-heap: larger gain first, then lower node id; exact integer ties make
  // the output match plain greedy with lowest-id argmax.
  auto worse = [](const Entry& a, const Entry& b) {
    return a.gain < b.gain || (a.gain == b.gain && a.node > b.node);
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> heap(worse);
  for (NodeId v = 0; v < n; ++v) heap.push({gains[v], v, 0});

  GreedyResult result;
  std::uint64_t covered = 0;
  while (result.seeds.size() < k) {
    Entry top = heap.top();
    heap.pop();
    if (top.stamp == result.seeds.size()) {
      std::uint64_t realized = engine.marginal(top.node, true);
      assert(realized == top.gain);
      covered += realized;
      result.seeds.push_back(top.node);
      result.influence_curve.push_back(static_cast<double>(covered) /
                                       static_cast<double>(ens.sample_count()));
    } else {
      top.gain = engine.marginal(top.node, false);
      top.stamp = static_cast<std::uint32_t>(result.seeds.size());
      heap.push(top);
    }
  }
  return result;
}

}  // namespace

GreedyResult greedy_celf(const LiveEdgeEnsemble& ensemble, const AttributedGraph& graph,
                         std::size_t k, std::optional<std::size_t> restrict_group) {
  if (!restrict_group) {
    if (graph.node_count() != ensemble.node_count())
      throw ValidationError("greedy_celf: ensemble does not match graph");
    return celf_core(ensemble, k);
  }

  std::size_t g = *restrict_group;
  if (!graph.has_groups() || g >= graph.group_count())
    throw ValidationError("greedy_celf: unknown group index");
  auto members = graph.group_members(g);
  auto sub = induced_subgraph(graph, members);
  auto sub_ens = sample_ensemble(sub.graph, ensemble.propagation_probability(),
                                 ensemble.sample_count(),
                                 mix_seed(ensemble.seed(), 0x67727000ull, g));
  GreedyResult result = celf_core(sub_ens, k);
  for (auto& v : result.seeds) v = sub.to_parent[v];
  return result;
}

std::size_t proportional_seed_budget(std::size_t n, std::size_t k, std::size_t group_size) {
  if (n == 0) throw ValidationError("proportional_seed_budget: empty graph");
  return (k * group_size + n - 1) / n;
}

std::vector<double> group_baselines(const AttributedGraph& graph, std::size_t k, double p,
                                    std::size_t delta, std::uint64_t rng_seed) {
  if (!graph.has_groups()) throw ValidationError("group_baselines: graph has no groups");
  if (k < 1 || k > graph.node_count())
    throw ValidationError("group_baselines: k must satisfy 1 <= k <= n");

  std::vector<double> baselines(graph.group_count(), 0.0);
  for (std::size_t g = 0; g < graph.group_count(); ++g) {
    auto sub = induced_subgraph(graph, graph.group_members(g));
    std::size_t budget = proportional_seed_budget(graph.node_count(), k, graph.group_size(g));
    auto ens = sample_ensemble(sub.graph, p, delta, mix_seed(rng_seed, 0x67727000ull, g));
    baselines[g] = celf_core(ens, budget).influence_curve.back();
  }
  return baselines;
}

}  // namespace fim
