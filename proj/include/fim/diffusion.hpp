#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fim/graph.hpp"

namespace fim {

// Pre-sampled live-edge graphs for independent-cascade influence estimation.
// Each undirected edge is realized as two directed arcs, each kept
// independently with probability p; the influence of a seed set equals the
// mean reachable-set size over the samples. Immutable after sampling; safe
// to share across workers.
class LiveEdgeEnsemble {
 public:
  std::size_t sample_count() const { return sample_count_; }
  std::size_t node_count() const { return node_count_; }
  double propagation_probability() const { return p_; }
  std::uint64_t seed() const { return seed_; }

  std::span<const NodeId> out_arcs(std::size_t sample, NodeId v) const {
    const std::uint64_t* off = offsets_.data() + sample * (node_count_ + 1);
    return {targets_.data() + off[v], static_cast<std::size_t>(off[v + 1] - off[v])};
  }
  std::size_t arc_count(std::size_t sample) const {
    const std::uint64_t* off = offsets_.data() + sample * (node_count_ + 1);
    return off[node_count_] - off[0];
  }
  std::size_t total_arc_count() const { return targets_.size(); }

  // Nonzero tag identifying (seed, p, sample count, node count); used as a
  // fitness cache key.
  std::uint64_t identity() const;

 private:
  friend LiveEdgeEnsemble sample_ensemble(const AttributedGraph&, double, std::size_t,
                                          std::uint64_t);
  std::size_t sample_count_ = 0;
  std::size_t node_count_ = 0;
  double p_ = 0.0;
  std::uint64_t seed_ = 0;
  std::vector<std::uint64_t> offsets_;  // (node_count + 1) entries per sample
  std::vector<NodeId> targets_;
};

// delta independent samples; every one of the 2|E| candidate arcs is kept
// i.i.d. with probability p. Deterministic given (rng_seed, p) regardless of
// thread count.
LiveEdgeEnsemble sample_ensemble(const AttributedGraph& graph, double p, std::size_t delta,
                                 std::uint64_t rng_seed);

struct InfluenceEstimate {
  double total = 0.0;              // expected activated count over V
  std::vector<double> per_group;   // expected activated count per group R_i
};

// Mean reachable-set size from S over the ensemble (seeds included), plus
// per-group activation counts. OpenMP-parallel over samples; the per-sample
// counts are integers, so the result is bit-identical to the serial kernel
// at any thread count.
InfluenceEstimate estimate_influence(const LiveEdgeEnsemble& ensemble,
                                     const AttributedGraph& graph,
                                     std::span<const NodeId> seeds);

// Serial reference kernel; same contract as estimate_influence.
InfluenceEstimate estimate_influence_serial(const LiveEdgeEnsemble& ensemble,
                                            const AttributedGraph& graph,
                                            std::span<const NodeId> seeds);

// Round-by-round independent-cascade simulation: each newly active node gets
// one activation attempt per inactive neighbor with probability p. Returns
// the mean activated count over `rounds` runs. Independent oracle for the
// live-edge estimates.
double direct_ic_simulate(const AttributedGraph& graph, std::span<const NodeId> seeds,
                          double p, std::size_t rounds, std::uint64_t rng_seed);

struct GreedyResult {
  std::vector<NodeId> seeds;           // in selection order
  std::vector<double> influence_curve; // cumulative expected influence per pick
};

// CELF lazy-greedy seed selection maximizing estimated influence over the
// ensemble. Ties in marginal gain go to the lower node id, which makes the
// result identical to plain greedy. When restrict_group is set the search
// runs on the induced subgraph G[R_i] with its own ensemble (seed derived
// from the ensemble seed plus the group index) and returns parent-graph ids.
GreedyResult greedy_celf(const LiveEdgeEnsemble& ensemble, const AttributedGraph& graph,
                         std::size_t k, std::optional<std::size_t> restrict_group = {});

// ceil(k * group_size / n): proportional seed budget k_i for a group.
std::size_t proportional_seed_budget(std::size_t n, std::size_t k, std::size_t group_size);

// For every group i: the greedy influence I_{G[R_i]}(k_i) achievable inside
// the group's induced subgraph with its proportional budget. These are the
// DCV denominators; all positive since k_i >= 1.
std::vector<double> group_baselines(const AttributedGraph& graph, std::size_t k, double p,
                                    std::size_t delta, std::uint64_t rng_seed);

}  // namespace fim
