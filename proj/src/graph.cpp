#include "fim/graph.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "fim/rng.hpp"
#include "json.hpp"

namespace fim {

namespace {

std::string strip_comment(const std::string& line) {
  auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

std::vector<std::int64_t> parse_int_tokens(const std::string& line, std::size_t line_no) {
  std::vector<std::int64_t> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
      throw ParseError("expected integer, got '" + tok + "'", line_no);
    out.push_back(value);
  }
  return out;
}

}  // namespace

AttributedGraph AttributedGraph::build(std::size_t node_count, std::vector<Edge> edges,
                                       std::vector<std::int64_t> external_ids) {
  AttributedGraph g;
  g.node_count_ = node_count;
  for (auto& [u, v] : edges) {
    if (u == v) throw ValidationError("self-loop on node " + std::to_string(u));
    if (u >= node_count || v >= node_count)
      throw ValidationError("edge endpoint out of range");
    if (u > v) std::swap(u, v);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  g.edges_ = std::move(edges);

  g.adj_offsets_.assign(node_count + 1, 0);
  for (const auto& [u, v] : g.edges_) {
    ++g.adj_offsets_[u + 1];
    ++g.adj_offsets_[v + 1];
  }
  for (std::size_t i = 1; i <= node_count; ++i) g.adj_offsets_[i] += g.adj_offsets_[i - 1];
  g.adjacency_.resize(2 * g.edges_.size());
  std::vector<std::uint32_t> cursor(g.adj_offsets_.begin(), g.adj_offsets_.end() - 1);
  for (const auto& [u, v] : g.edges_) {
    g.adjacency_[cursor[u]++] = v;
    g.adjacency_[cursor[v]++] = u;
  }
  for (NodeId v = 0; v < node_count; ++v) {
    auto begin = g.adjacency_.begin() + g.adj_offsets_[v];
    auto end = g.adjacency_.begin() + g.adj_offsets_[v + 1];
    std::sort(begin, end);
  }

  if (external_ids.empty()) {
    external_ids.resize(node_count);
    for (std::size_t i = 0; i < node_count; ++i) external_ids[i] = static_cast<std::int64_t>(i);
  }
  if (external_ids.size() != node_count)
    throw InternalError("external id table size mismatch");
  g.external_ids_ = std::move(external_ids);
  g.external_to_internal_.reserve(node_count);
  for (NodeId v = 0; v < node_count; ++v) g.external_to_internal_[g.external_ids_[v]] = v;
  return g;
}

NodeId AttributedGraph::internal_id(std::int64_t external) const {
  auto it = external_to_internal_.find(external);
  if (it == external_to_internal_.end())
    throw ValidationError("unknown node id " + std::to_string(external));
  return it->second;
}

void AttributedGraph::set_groups(std::vector<std::vector<NodeId>> members,
                                 std::vector<std::int64_t> labels) {
  if (members.empty()) throw ValidationError("at least one group required");
  if (labels.empty()) {
    labels.resize(members.size());
    for (std::size_t g = 0; g < members.size(); ++g) labels[g] = static_cast<std::int64_t>(g);
  }
  if (labels.size() != members.size()) throw InternalError("group label table size mismatch");

  std::vector<std::vector<std::uint32_t>> per_node(node_count_);
  group_offsets_.assign(members.size() + 1, 0);
  group_members_.clear();
  for (std::size_t g = 0; g < members.size(); ++g) {
    auto& m = members[g];
    std::sort(m.begin(), m.end());
    m.erase(std::unique(m.begin(), m.end()), m.end());
    if (m.empty()) throw ValidationError("group " + std::to_string(labels[g]) + " is empty");
    for (NodeId v : m) {
      if (v >= node_count_) throw ValidationError("group member out of range");
      per_node[v].push_back(static_cast<std::uint32_t>(g));
    }
    group_members_.insert(group_members_.end(), m.begin(), m.end());
    group_offsets_[g + 1] = static_cast<std::uint32_t>(group_members_.size());
  }
  for (NodeId v = 0; v < node_count_; ++v) {
    if (per_node[v].empty())
      throw ValidationError("node " + std::to_string(external_ids_[v]) +
                            " belongs to no group");
  }
  node_group_offsets_.assign(node_count_ + 1, 0);
  node_groups_.clear();
  for (NodeId v = 0; v < node_count_; ++v) {
    node_groups_.insert(node_groups_.end(), per_node[v].begin(), per_node[v].end());
    node_group_offsets_[v + 1] = static_cast<std::uint32_t>(node_groups_.size());
  }
  group_count_ = members.size();
  group_labels_ = std::move(labels);
}

AttributedGraph load_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open edge list: " + path.string());

  std::vector<std::pair<std::int64_t, std::int64_t>> raw;
  std::vector<std::int64_t> ids;  // also collects single-integer lines: edgeless nodes
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto tokens = parse_int_tokens(strip_comment(line), line_no);
    if (tokens.empty()) continue;
    if (tokens.size() == 1) {
      ids.push_back(tokens[0]);
      continue;
    }
    if (tokens.size() != 2) throw ParseError("expected '<u> <v>'", line_no);
    if (tokens[0] == tokens[1])
      throw ParseError("self-loop on node " + std::to_string(tokens[0]), line_no);
    raw.emplace_back(tokens[0], tokens[1]);
  }

  // Compact arbitrary ids to dense 0..n-1, keeping the original ids.
  ids.reserve(ids.size() + 2 * raw.size());
  for (const auto& [u, v] : raw) {
    ids.push_back(u);
    ids.push_back(v);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::unordered_map<std::int64_t, NodeId> to_dense;
  to_dense.reserve(ids.size());
  for (NodeId i = 0; i < ids.size(); ++i) to_dense[ids[i]] = i;

  std::vector<Edge> edges;
  edges.reserve(raw.size());
  for (const auto& [u, v] : raw) edges.emplace_back(to_dense[u], to_dense[v]);
  std::size_t n = ids.size();
  return AttributedGraph::build(n, std::move(edges), std::move(ids));
}

AttributedGraph load_groups(AttributedGraph graph, const std::filesystem::path& path,
                            std::size_t attribute_column) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open groups file: " + path.string());

  std::vector<std::pair<std::int64_t, NodeId>> raw;  // (group label, node)
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto tokens = parse_int_tokens(strip_comment(line), line_no);
    if (tokens.empty()) continue;
    if (tokens.size() < 2 + attribute_column)
      throw ParseError("expected '<node_id> <group_id>' with at least " +
                           std::to_string(attribute_column + 1) + " group column(s)",
                       line_no);
    if (!graph.has_node(tokens[0]))
      throw ValidationError("groups file references unknown node id " +
                            std::to_string(tokens[0]) + " (line " + std::to_string(line_no) +
                            ")");
    raw.emplace_back(tokens[1 + attribute_column], graph.internal_id(tokens[0]));
  }

  std::vector<std::int64_t> labels;
  labels.reserve(raw.size());
  for (const auto& [label, v] : raw) labels.push_back(label);
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());

  std::vector<std::vector<NodeId>> members(labels.size());
  for (const auto& [label, v] : raw) {
    auto g = static_cast<std::size_t>(
        std::lower_bound(labels.begin(), labels.end(), label) - labels.begin());
    members[g].push_back(v);
  }
  graph.set_groups(std::move(members), std::move(labels));
  return graph;
}

void SbmSpec::validate() const {
  if (group_sizes.empty()) throw ValidationError("sbm: group_sizes must be nonempty");
  for (auto s : group_sizes)
    if (s < 1) throw ValidationError("sbm: every group size must be >= 1");
  if (prob_matrix.size() != group_sizes.size())
    throw ValidationError("sbm: prob_matrix must be square with one row per group");
  for (std::size_t i = 0; i < prob_matrix.size(); ++i) {
    if (prob_matrix[i].size() != group_sizes.size())
      throw ValidationError("sbm: prob_matrix must be square with one row per group");
    for (std::size_t j = 0; j < prob_matrix[i].size(); ++j) {
      double p = prob_matrix[i][j];
      if (!(p >= 0.0 && p <= 1.0))
        throw ValidationError("sbm: probabilities must lie in [0,1]");
      if (prob_matrix[i][j] != prob_matrix[j][i])
        throw ValidationError("sbm: prob_matrix must be symmetric");
    }
  }
}

SbmSpec sbm_spec_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("sbm spec: invalid JSON: ") + e.what());
  }
  SbmSpec spec;
  try {
    spec.group_sizes = j.at("group_sizes").get<std::vector<std::size_t>>();
    spec.prob_matrix = j.at("prob_matrix").get<std::vector<std::vector<double>>>();
    spec.seed = j.value("seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("sbm spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

SbmSpec sbm_spec_from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open sbm spec: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return sbm_spec_from_json(buf.str());
}

AttributedGraph generate_sbm(const SbmSpec& spec) {
  spec.validate();
  std::size_t n = 0;
  for (auto s : spec.group_sizes) n += s;

  std::vector<std::uint32_t> block(n);
  {
    std::size_t at = 0;
    for (std::size_t b = 0; b < spec.group_sizes.size(); ++b)
      for (std::size_t i = 0; i < spec.group_sizes[b]; ++i) block[at++] = b;
  }

  Rng rng(mix_seed(spec.seed, 0x73626d00ull));
  std::vector<Edge> edges;
  for (NodeId u = 0; u + 1 < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      double p = spec.prob_matrix[block[u]][block[v]];
      if (p >= 1.0 || (p > 0.0 && rng.bernoulli(p))) edges.emplace_back(u, v);
    }
  }

  auto g = AttributedGraph::build(n, std::move(edges));
  std::vector<std::vector<NodeId>> members(spec.group_sizes.size());
  for (NodeId v = 0; v < n; ++v) members[block[v]].push_back(v);
  g.set_groups(std::move(members));
  return g;
}

InducedSubgraph induced_subgraph(const AttributedGraph& graph, std::span<const NodeId> nodes) {
  std::vector<NodeId> keep(nodes.begin(), nodes.end());
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  for (NodeId v : keep)
    if (v >= graph.node_count())
      throw ValidationError("induced_subgraph: unknown node " + std::to_string(v));

  std::vector<NodeId> to_sub(graph.node_count(), static_cast<NodeId>(-1));
  for (NodeId i = 0; i < keep.size(); ++i) to_sub[keep[i]] = i;

  std::vector<Edge> edges;
  for (const auto& [u, v] : graph.edges()) {
    if (to_sub[u] != static_cast<NodeId>(-1) && to_sub[v] != static_cast<NodeId>(-1))
      edges.emplace_back(to_sub[u], to_sub[v]);
  }

  std::vector<std::int64_t> external;
  external.reserve(keep.size());
  for (NodeId v : keep) external.push_back(graph.external_id(v));
  auto sub = AttributedGraph::build(keep.size(), std::move(edges), std::move(external));

  if (graph.has_groups()) {
    std::vector<std::vector<NodeId>> members;
    std::vector<std::int64_t> labels;
    for (std::size_t g = 0; g < graph.group_count(); ++g) {
      std::vector<NodeId> m;
      for (NodeId v : graph.group_members(g))
        if (to_sub[v] != static_cast<NodeId>(-1)) m.push_back(to_sub[v]);
      if (!m.empty()) {
        members.push_back(std::move(m));
        labels.push_back(graph.group_label(g));
      }
    }
    sub.set_groups(std::move(members), std::move(labels));
  }
  return {std::move(sub), std::move(keep)};
}

void write_edge_list(const AttributedGraph& graph, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write edge list: " + path.string());
  for (const auto& [u, v] : graph.edges())
    out << graph.external_id(u) << ' ' << graph.external_id(v) << '\n';
  // Edgeless nodes appear as single-integer lines so a reload reproduces
  // the full node set.
  for (NodeId v = 0; v < graph.node_count(); ++v)
    if (graph.degree(v) == 0) out << graph.external_id(v) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

void write_groups(const AttributedGraph& graph, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write groups file: " + path.string());
  for (NodeId v = 0; v < graph.node_count(); ++v)
    for (auto g : graph.groups_of(v)) out << graph.external_id(v) << ' ' << graph.group_label(g) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace fim
