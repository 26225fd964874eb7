#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fim/graph.hpp"

namespace fim {

// Disjoint communities C_1..C_m covering every node. Immutable once built.
class Partition {
 public:
  Partition() = default;

  // Labels may be arbitrary; they are compacted to 0..m-1 in ascending label
  // order. Every node must carry a label.
  explicit Partition(std::vector<std::uint32_t> assignment);

  std::size_t node_count() const { return assignment_.size(); }
  std::size_t community_count() const { return community_offsets_.empty() ? 0 : community_offsets_.size() - 1; }
  std::uint32_t community_of(NodeId v) const { return assignment_[v]; }
  std::size_t community_size(std::size_t c) const {
    return community_offsets_[c + 1] - community_offsets_[c];
  }
  std::span<const NodeId> members(std::size_t c) const {
    return {members_.data() + community_offsets_[c], community_size(c)};
  }
  const std::vector<std::uint32_t>& assignment() const { return assignment_; }

  std::string to_json_string() const;
  static Partition from_json_string(const std::string& text);

 private:
  std::vector<std::uint32_t> assignment_;
  std::vector<std::uint32_t> community_offsets_;
  std::vector<NodeId> members_;
};

// Louvain community detection: greedy modularity maximization by local node
// moves plus graph aggregation, resolution 1. Node-visit order is shuffled
// from rng_seed, so identical seeds reproduce identical partitions. Ties in
// modularity gain go to the lowest community index; isolated nodes end up as
// singletons. A local-move pass stops once its total gain falls below 1e-7.
Partition louvain(const AttributedGraph& graph, std::uint64_t rng_seed);

// Newman modularity Q = sum_c (e_c/w - (d_c/2w)^2). Zero-edge graphs get 0.
double modularity(const AttributedGraph& graph, const Partition& partition);

}  // namespace fim
