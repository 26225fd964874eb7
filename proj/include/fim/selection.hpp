#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fim/community.hpp"
#include "fim/graph.hpp"
#include "fim/rng.hpp"

namespace fim {

// PageRank scores over the whole network; all entries are positive (damping
// floor) and sum to 1 within 1e-6.
struct NodeScores {
  std::vector<double> values;
};

// Power iteration with uniform teleport. Undirected edges count as both in-
// and out-links; the rank mass of degree-0 nodes is redistributed uniformly.
// Stops when the L1 change drops below tol (always happens for d < 1; if
// max_iters is exhausted anyway, the best iterate is returned with a warning
// on stderr).
NodeScores pagerank(const AttributedGraph& graph, double damping = 0.85, double tol = 1e-6,
                    std::size_t max_iters = 100);

// Membership flags over dense node ids with a running count; used as the
// exclusion set of a selection sequence.
class NodeMask {
 public:
  explicit NodeMask(std::size_t n) : bits_(n, 0) {}
  void add(NodeId v) {
    if (!bits_[v]) {
      bits_[v] = 1;
      ++count_;
    }
  }
  bool contains(NodeId v) const { return bits_[v] != 0; }
  std::size_t count() const { return count_; }
  std::size_t capacity() const { return bits_.size(); }

 private:
  std::vector<std::uint8_t> bits_;
  std::size_t count_ = 0;
};

// Mutable context of the two-stage community-then-node sampler.
//
// For every attribute j (a group of the graph) the urgency is
//   u_j = exp(-CA_j / A_j)
// where A_j counts the nodes carrying attribute j and CA_j counts those that
// lie in covered communities (communities holding at least one selected
// node). A community's score is |C_i| times the summed urgencies of the
// attribute kinds present in it; exhausted communities are masked to zero.
// Covering a community can only lower urgencies, so u_j stays in (0, 1] and
// hits e^-1 exactly when every carrier of j is covered.
//
// One state belongs to one selection sequence; never share across workers.
class SelectionState {
 public:
  SelectionState(const AttributedGraph& graph, const Partition& partition);

  // Context manipulation. reset* clears masks and recomputes everything.
  void reset();
  void reset_from(std::span<const NodeId> selected);
  void add_selected(NodeId v);
  void cover_community(std::size_t c);  // no-op when already covered

  void mask_community(std::size_t c);
  bool masked(std::size_t c) const { return masked_[c] != 0; }

  const std::vector<double>& urgencies() const { return urgency_; }
  const std::vector<double>& community_scores() const { return score_; }
  const std::vector<NodeId>& selected() const { return selected_; }
  const Partition& partition() const { return *partition_; }
  std::size_t attribute_count() const { return attr_total_.size(); }

  // Probability-proportional draw over current community scores; falls back
  // to a uniform draw over unmasked communities when every score is zero.
  // Pure: does not update the state.
  std::size_t draw_community(Rng& rng) const;

  // draw_community plus the first-selection refresh.
  std::size_t select_community(Rng& rng);

 private:
  void recompute_urgencies();
  void recompute_scores();

  const Partition* partition_;
  std::vector<std::uint32_t> attr_total_;       // A_j
  std::vector<std::uint32_t> community_attr_;   // C_tj, flattened m x q
  std::vector<std::vector<std::uint32_t>> community_attr_kinds_;  // AC_i
  std::vector<std::uint8_t> covered_;
  std::vector<std::uint32_t> covered_attr_;     // CA_j
  std::vector<double> urgency_;
  std::vector<double> score_;
  std::vector<std::uint8_t> masked_;
  std::vector<NodeId> selected_;
};

// Node drawn from the community's non-excluded members with probability
// proportional to its score; nullopt when every member is excluded (the
// caller should redraw a community).
std::optional<NodeId> select_node(const SelectionState& state, const NodeScores& scores,
                                  std::size_t community, Rng& rng, const NodeMask& exclude);

// Community-then-node composition: draws a community, masks and redraws it
// whenever its eligible pool is empty, then draws a node and records it in
// the state. Requires exclude.count() < node count.
NodeId select_fair_node(SelectionState& state, const NodeScores& scores, Rng& rng,
                        const NodeMask& exclude);

// Uniform draw over non-excluded nodes; the random-selection ablation.
NodeId select_uniform_node(std::size_t node_count, Rng& rng, const NodeMask& exclude);

}  // namespace fim
