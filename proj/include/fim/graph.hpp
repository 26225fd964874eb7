#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fim/errors.hpp"

namespace fim {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;  // stored with first < second

// Undirected graph with per-node group memberships (the sensitive-attribute
// partition R_1..R_q; a node may belong to several groups). Immutable after
// construction and safe to share across threads.
//
// Node ids are dense 0..n-1. Loaders compact arbitrary file ids and keep the
// original id per node for output.
class AttributedGraph {
 public:
  AttributedGraph() = default;

  // edges are deduplicated unordered pairs; self-loops are rejected.
  static AttributedGraph build(std::size_t node_count, std::vector<Edge> edges,
                               std::vector<std::int64_t> external_ids = {});

  std::size_t node_count() const { return node_count_; }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }

  std::span<const NodeId> neighbors(NodeId v) const {
    return {adjacency_.data() + adj_offsets_[v], adj_offsets_[v + 1] - adj_offsets_[v]};
  }
  std::size_t degree(NodeId v) const { return adj_offsets_[v + 1] - adj_offsets_[v]; }

  // Groups. set_groups validates: nonempty groups, ids in range, every node
  // covered by at least one group.
  void set_groups(std::vector<std::vector<NodeId>> members,
                  std::vector<std::int64_t> labels = {});
  bool has_groups() const { return group_count_ > 0; }
  std::size_t group_count() const { return group_count_; }
  std::size_t group_size(std::size_t g) const {
    return group_offsets_[g + 1] - group_offsets_[g];
  }
  std::span<const NodeId> group_members(std::size_t g) const {
    return {group_members_.data() + group_offsets_[g], group_size(g)};
  }
  std::span<const std::uint32_t> groups_of(NodeId v) const {
    return {node_groups_.data() + node_group_offsets_[v],
            node_group_offsets_[v + 1] - node_group_offsets_[v]};
  }
  std::int64_t group_label(std::size_t g) const { return group_labels_[g]; }

  // Original (file) id of a node and the reverse lookup.
  std::int64_t external_id(NodeId v) const { return external_ids_[v]; }
  NodeId internal_id(std::int64_t external) const;
  bool has_node(std::int64_t external) const {
    return external_to_internal_.count(external) != 0;
  }

 private:
  std::size_t node_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::uint32_t> adj_offsets_;
  std::vector<NodeId> adjacency_;
  std::vector<std::int64_t> external_ids_;
  std::unordered_map<std::int64_t, NodeId> external_to_internal_;

  std::size_t group_count_ = 0;
  std::vector<std::uint32_t> group_offsets_;
  std::vector<NodeId> group_members_;
  std::vector<std::uint32_t> node_group_offsets_;
  std::vector<std::uint32_t> node_groups_;
  std::vector<std::int64_t> group_labels_;
};

// Stochastic-block-model recipe: one block per group, symmetric matrix of
// edge probabilities (diagonal intra-group, off-diagonal inter-group).
struct SbmSpec {
  std::vector<std::size_t> group_sizes;
  std::vector<std::vector<double>> prob_matrix;
  std::uint64_t seed = 0;

  void validate() const;  // throws ValidationError
};

SbmSpec sbm_spec_from_json(const std::string& text);
SbmSpec sbm_spec_from_json_file(const std::filesystem::path& path);

// Whitespace-separated "<u> <v>" per line; '#' comments ignored; a line with
// a single integer declares a node without edges. Returns a graph with
// groups unset. Duplicate undirected edges are dropped; self-loops and
// malformed lines are errors.
AttributedGraph load_edge_list(const std::filesystem::path& path);

// "<node_id> <group_id> [more columns]" per line; attribute_column picks the
// group column for multi-attribute files (0 = first). A node may appear on
// several lines (multi-membership). Every graph node must end up covered.
AttributedGraph load_groups(AttributedGraph graph, const std::filesystem::path& path,
                            std::size_t attribute_column = 0);

// Every intra/inter pair included independently with its block probability;
// groups assigned by block. Deterministic given spec.seed.
AttributedGraph generate_sbm(const SbmSpec& spec);

struct InducedSubgraph {
  AttributedGraph graph;
  std::vector<NodeId> to_parent;  // subgraph id -> parent id
};

// Node-induced subgraph; group labels restricted to the node set, groups that
// become empty are dropped. Subgraph ids are dense with to_parent retained.
InducedSubgraph induced_subgraph(const AttributedGraph& graph, std::span<const NodeId> nodes);

void write_edge_list(const AttributedGraph& graph, const std::filesystem::path& path);
void write_groups(const AttributedGraph& graph, const std::filesystem::path& path);

// Zachary karate-club fixture (34 nodes, 78 edges, two factions as groups).
AttributedGraph karate_club_graph();

}  // namespace fim
