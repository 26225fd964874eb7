#include "fim/selection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace fim {

NodeScores pagerank(const AttributedGraph& graph, double damping, double tol,
                    std::size_t max_iters) {
  if (graph.node_count() == 0) throw ValidationError("pagerank: empty graph");
  if (!(damping > 0.0 && damping < 1.0))
    throw ValidationError("pagerank: damping must lie in (0,1)");

  std::size_t n = graph.node_count();
  std::vector<double> cur(n, 1.0 / static_cast<double>(n)), next(n, 0.0);

  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    double dangling = 0.0;
    for (NodeId v = 0; v < n; ++v)
      if (graph.degree(v) == 0) dangling += cur[v];
    double base = (1.0 - damping) / static_cast<double>(n) +
                  damping * dangling / static_cast<double>(n);

    for (NodeId v = 0; v < n; ++v) {
      double in = 0.0;
      for (NodeId u : graph.neighbors(v))
        in += cur[u] / static_cast<double>(graph.degree(u));
      next[v] = base + damping * in;
    }

    double l1 = 0.0;
    for (NodeId v = 0; v < n; ++v) l1 += std::abs(next[v] - cur[v]);
    cur.swap(next);
    if (l1 < tol) return {std::move(cur)};
  }
  std::fprintf(stderr, "pagerank: no convergence within %zu iterations, using best iterate\n",
               max_iters);
  return {std::move(cur)};
}

SelectionState::SelectionState(const AttributedGraph& graph, const Partition& partition)
    : partition_(&partition) {
  if (!graph.has_groups()) throw ValidationError("selection: graph has no groups");
  if (partition.node_count() != graph.node_count())
    throw ValidationError("selection: partition does not match graph");

  std::size_t q = graph.group_count();
  std::size_t m = partition.community_count();
  attr_total_.assign(q, 0);
  for (std::size_t j = 0; j < q; ++j)
    attr_total_[j] = static_cast<std::uint32_t>(graph.group_size(j));

  community_attr_.assign(m * q, 0);
  for (NodeId v = 0; v < graph.node_count(); ++v) {
    std::size_t c = partition.community_of(v);
    for (auto j : graph.groups_of(v)) ++community_attr_[c * q + j];
  }
  community_attr_kinds_.resize(m);
  for (std::size_t c = 0; c < m; ++c)
    for (std::size_t j = 0; j < q; ++j)
      if (community_attr_[c * q + j] > 0)
        community_attr_kinds_[c].push_back(static_cast<std::uint32_t>(j));

  reset();
}

void SelectionState::reset() {
  std::size_t q = attr_total_.size();
  std::size_t m = partition_->community_count();
  covered_.assign(m, 0);
  covered_attr_.assign(q, 0);
  masked_.assign(m, 0);
  selected_.clear();
  recompute_urgencies();
  recompute_scores();
}

void SelectionState::reset_from(std::span<const NodeId> selected) {
  reset();
  selected_.assign(selected.begin(), selected.end());
  bool changed = false;
  for (NodeId v : selected_) {
    std::size_t c = partition_->community_of(v);
    if (!covered_[c]) {
      covered_[c] = 1;
      std::size_t q = attr_total_.size();
      for (auto j : community_attr_kinds_[c]) covered_attr_[j] += community_attr_[c * q + j];
      changed = true;
    }
  }
  if (changed) {
    recompute_urgencies();
    recompute_scores();
  }
}

void SelectionState::add_selected(NodeId v) {
  selected_.push_back(v);
  cover_community(partition_->community_of(v));
}

void SelectionState::cover_community(std::size_t c) {
  if (covered_[c]) return;
  covered_[c] = 1;
  std::size_t q = attr_total_.size();
  for (auto j : community_attr_kinds_[c]) covered_attr_[j] += community_attr_[c * q + j];
  recompute_urgencies();
  recompute_scores();
}

void SelectionState::mask_community(std::size_t c) {
  masked_[c] = 1;
  score_[c] = 0.0;
}

void SelectionState::recompute_urgencies() {
  std::size_t q = attr_total_.size();
  urgency_.resize(q);
  for (std::size_t j = 0; j < q; ++j)
    urgency_[j] = std::exp(-static_cast<double>(covered_attr_[j]) /
                           static_cast<double>(attr_total_[j]));
}

void SelectionState::recompute_scores() {
  std::size_t m = partition_->community_count();
  score_.resize(m);
  for (std::size_t c = 0; c < m; ++c) {
    if (masked_[c]) {
      score_[c] = 0.0;
      continue;
    }
    double sum = 0.0;
    for (auto j : community_attr_kinds_[c]) sum += urgency_[j];
    score_[c] = static_cast<double>(partition_->community_size(c)) * sum;
  }
}

std::size_t SelectionState::draw_community(Rng& rng) const {
  double total = 0.0;
  for (double s : score_) total += s;
  if (total > 0.0) return weighted_draw(score_, total, rng);

  // Uniform fallback over unmasked communities.
  std::size_t unmasked = 0;
  for (auto flag : masked_)
    if (!flag) ++unmasked;
  if (unmasked == 0) throw InternalError("draw_community: every community masked");
  std::size_t pick = rng.next_below(unmasked);
  for (std::size_t c = 0; c < masked_.size(); ++c) {
    if (masked_[c]) continue;
    if (pick == 0) return c;
    --pick;
  }
  throw InternalError("draw_community: fallback scan failed");
}

std::size_t SelectionState::select_community(Rng& rng) {
  std::size_t c = draw_community(rng);
  cover_community(c);
  return c;
}

std::optional<NodeId> select_node(const SelectionState& state, const NodeScores& scores,
                                  std::size_t community, Rng& rng, const NodeMask& exclude) {
  auto members = state.partition().members(community);
  double total = 0.0;
  for (NodeId v : members)
    if (!exclude.contains(v)) total += scores.values[v];
  if (total <= 0.0) return std::nullopt;

  double r = rng.next_double() * total;
  double acc = 0.0;
  NodeId last = members.front();
  for (NodeId v : members) {
    if (exclude.contains(v)) continue;
    acc += scores.values[v];
    last = v;
    if (r < acc) return v;
  }
  return last;  // round-off at the top of the range
}

NodeId select_fair_node(SelectionState& state, const NodeScores& scores, Rng& rng,
                        const NodeMask& exclude) {
  if (exclude.count() >= exclude.capacity())
    throw ValidationError("select_fair_node: every node excluded");
  for (;;) {
    std::size_t c = state.draw_community(rng);
    auto picked = select_node(state, scores, c, rng, exclude);
    if (!picked) {
      state.mask_community(c);  // pool exhausted; redraw elsewhere
      continue;
    }
    state.cover_community(c);
    state.add_selected(*picked);
    return *picked;
  }
}

NodeId select_uniform_node(std::size_t node_count, Rng& rng, const NodeMask& exclude) {
  if (exclude.count() >= node_count)
    throw ValidationError("select_uniform_node: every node excluded");
  std::size_t eligible = node_count - exclude.count();
  std::size_t pick = rng.next_below(eligible);
  for (NodeId v = 0; v < node_count; ++v) {
    if (exclude.contains(v)) continue;
    if (pick == 0) return v;
    --pick;
  }
  throw InternalError("select_uniform_node: scan failed");
}

}  // namespace fim
