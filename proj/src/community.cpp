#include "fim/community.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>

#include "fim/rng.hpp"
#include "json.hpp"

namespace fim {

Partition::Partition(std::vector<std::uint32_t> assignment) {
  if (assignment.empty()) throw ValidationError("partition: no nodes");
  std::vector<std::uint32_t> labels(assignment);
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  for (auto& a : assignment) {
    a = static_cast<std::uint32_t>(
        std::lower_bound(labels.begin(), labels.end(), a) - labels.begin());
  }
  std::size_t m = labels.size();
  community_offsets_.assign(m + 1, 0);
  for (auto a : assignment) ++community_offsets_[a + 1];
  for (std::size_t c = 1; c <= m; ++c) community_offsets_[c] += community_offsets_[c - 1];
  members_.resize(assignment.size());
  std::vector<std::uint32_t> cursor(community_offsets_.begin(), community_offsets_.end() - 1);
  for (NodeId v = 0; v < assignment.size(); ++v) members_[cursor[assignment[v]]++] = v;
  assignment_ = std::move(assignment);
}

std::string Partition::to_json_string() const {
  nlohmann::json j;
  j["assignment"] = assignment_;
  return j.dump();
}

Partition Partition::from_json_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    return Partition(j.at("assignment").get<std::vector<std::uint32_t>>());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("partition JSON: ") + e.what());
  }
}

double modularity(const AttributedGraph& graph, const Partition& partition) {
  if (partition.node_count() != graph.node_count())
    throw ValidationError("modularity: partition does not match graph");
  double w = static_cast<double>(graph.edge_count());
  if (w == 0.0) return 0.0;

  std::size_t m = partition.community_count();
  std::vector<double> internal(m, 0.0), degree_sum(m, 0.0);
  for (const auto& [u, v] : graph.edges()) {
    if (partition.community_of(u) == partition.community_of(v))
      internal[partition.community_of(u)] += 1.0;
  }
  for (NodeId v = 0; v < graph.node_count(); ++v)
    degree_sum[partition.community_of(v)] += static_cast<double>(graph.degree(v));

  double q = 0.0;
  for (std::size_t c = 0; c < m; ++c) {
    double frac = degree_sum[c] / (2.0 * w);
    q += internal[c] / w - frac * frac;
  }
  return q;
}

namespace {

// Aggregated working graph for Louvain levels: weighted, with self-loops
// holding collapsed intra-community weight.
struct LevelGraph {
  std::size_t n = 0;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> adj;  // no self entries
  std::vector<double> self_weight;  // each counted once toward total
  std::vector<double> weighted_degree;  // includes 2 * self_weight
  double total = 0.0;  // sum of edge weights, self-loops once

  static LevelGraph from_graph(const AttributedGraph& g) {
    LevelGraph lg;
    lg.n = g.node_count();
    lg.adj.resize(lg.n);
    lg.self_weight.assign(lg.n, 0.0);
    lg.weighted_degree.assign(lg.n, 0.0);
    for (const auto& [u, v] : g.edges()) {
      lg.adj[u].emplace_back(v, 1.0);
      lg.adj[v].emplace_back(u, 1.0);
      lg.weighted_degree[u] += 1.0;
      lg.weighted_degree[v] += 1.0;
    }
    lg.total = static_cast<double>(g.edge_count());
    return lg;
  }
};

constexpr double kPassGainThreshold = 1e-7;

// One level of local moving, optionally warm-started from an assignment.
// Returns (community label per node, total gain).
std::pair<std::vector<std::uint32_t>, double> local_moving(
    const LevelGraph& g, std::uint64_t seed, std::vector<std::uint32_t> init = {}) {
  std::size_t n = g.n;
  std::vector<std::uint32_t> community;
  std::vector<double> tot;  // degree mass per community
  if (init.empty()) {
    community.resize(n);
    std::iota(community.begin(), community.end(), 0u);
    tot = g.weighted_degree;
  } else {
    community = std::move(init);
    tot.assign(n, 0.0);
    for (NodeId v = 0; v < n; ++v) tot[community[v]] += g.weighted_degree[v];
  }

  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), 0u);
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i)
    std::swap(order[i - 1], order[rng.next_below(i)]);

  // Scatter buffer of edge weight from the current node to each community.
  std::vector<double> weight_to(n, 0.0);
  std::vector<std::uint32_t> touched;

  double total_gain = 0.0;
  double w = g.total;
  if (w <= 0.0) return {community, 0.0};

  while (true) {
    double pass_gain = 0.0;
    for (NodeId u : order) {
      std::uint32_t home = community[u];
      touched.clear();
      weight_to[home] = 0.0;
      touched.push_back(home);
      for (const auto& [v, wt] : g.adj[u]) {
        std::uint32_t c = community[v];
        if (weight_to[c] == 0.0 && c != home) touched.push_back(c);
        weight_to[c] += wt;
      }

      double ku = g.weighted_degree[u];
      tot[home] -= ku;  // remove u, then pick the best insertion

      // score(c) = k_{u->c} - ku * tot_c / (2w); the true gain of moving to c
      // is (score(c) - score(home)) / w, so argmax is unchanged. Candidates
      // are scanned in ascending index order and must strictly beat staying,
      // which makes ties resolve to the lowest community index.
      std::sort(touched.begin(), touched.end());
      double stay_score = weight_to[home] - ku * tot[home] / (2.0 * w);
      double best_score = stay_score;
      std::uint32_t best = home;
      for (std::uint32_t c : touched) {
        if (c == home) continue;
        double score = weight_to[c] - ku * tot[c] / (2.0 * w);
        if (score > best_score) {
          best_score = score;
          best = c;
        }
      }

      if (best != home) {
        pass_gain += (best_score - stay_score) / w;
        community[u] = best;
      }
      tot[community[u]] += ku;
      for (std::uint32_t c : touched) weight_to[c] = 0.0;
    }
    assert(pass_gain > -1e-12);
    total_gain += pass_gain;
    if (pass_gain < kPassGainThreshold) break;
  }
  return {community, total_gain};
}

LevelGraph aggregate(const LevelGraph& g, const std::vector<std::uint32_t>& community,
                     std::size_t m) {
  LevelGraph out;
  out.n = m;
  out.adj.resize(m);
  out.self_weight.assign(m, 0.0);
  out.weighted_degree.assign(m, 0.0);

  // Sum edge weights between community pairs.
  std::vector<std::vector<std::pair<std::uint32_t, double>>> rows(m);
  for (std::uint32_t u = 0; u < g.n; ++u) {
    std::uint32_t cu = community[u];
    out.self_weight[cu] += g.self_weight[u];
    for (const auto& [v, wt] : g.adj[u]) {
      std::uint32_t cv = community[v];
      if (cu == cv) {
        out.self_weight[cu] += wt / 2.0;  // each internal edge visited twice
      } else {
        rows[cu].emplace_back(cv, wt);
      }
    }
  }
  for (std::uint32_t c = 0; c < m; ++c) {
    auto& row = rows[c];
    std::sort(row.begin(), row.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < row.size();) {
      std::size_t j = i;
      double sum = 0.0;
      while (j < row.size() && row[j].first == row[i].first) sum += row[j++].second;
      out.adj[c].emplace_back(row[i].first, sum);
      i = j;
    }
  }
  for (std::uint32_t c = 0; c < m; ++c) {
    double d = 2.0 * out.self_weight[c];
    for (const auto& [v, wt] : out.adj[c]) d += wt;
    out.weighted_degree[c] = d;
  }
  out.total = g.total;
  return out;
}

// Renumber labels to 0..m-1 ordered by first appearance over node ids.
std::size_t compact_labels(std::vector<std::uint32_t>& labels) {
  std::vector<std::uint32_t> remap(labels.size(), static_cast<std::uint32_t>(-1));
  std::uint32_t next = 0;
  for (auto& l : labels) {
    if (remap[l] == static_cast<std::uint32_t>(-1)) remap[l] = next++;
    l = remap[l];
  }
  return next;
}

}  // namespace

Partition louvain(const AttributedGraph& graph, std::uint64_t rng_seed) {
  if (graph.node_count() == 0) throw ValidationError("louvain: empty graph");

  std::vector<std::uint32_t> assignment(graph.node_count());
  std::iota(assignment.begin(), assignment.end(), 0u);
  if (graph.edge_count() == 0) return Partition(std::move(assignment));

  LevelGraph base = LevelGraph::from_graph(graph);
  LevelGraph level = base;
  for (std::size_t depth = 0; depth < 64; ++depth) {
    auto [community, gain] = local_moving(level, mix_seed(rng_seed, depth));
    std::vector<std::uint32_t> labels = community;
    std::size_t m = compact_labels(labels);
    for (NodeId v = 0; v < assignment.size(); ++v) assignment[v] = labels[assignment[v]];
    if (gain < kPassGainThreshold || m == level.n) break;
    level = aggregate(level, labels, m);
  }

  // Aggregation can leave single-node improvements behind; one refinement
  // round at node granularity restores local maximality.
  assignment = local_moving(base, mix_seed(rng_seed, 0x7265666eull), std::move(assignment))
                   .first;

  // Final labels ordered by smallest member node id.
  compact_labels(assignment);
  return Partition(std::move(assignment));
}

}  // namespace fim
