#include "fim/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "fim/rng.hpp"

namespace fim {

namespace {

constexpr std::uint64_t kTagLouvain = 0x6c6f7576ull;
constexpr std::uint64_t kTagEnsemble = 0x656e7300ull;
constexpr std::uint64_t kTagBaseline = 0x62617365ull;
constexpr std::uint64_t kTagEvolve = 0x65766f00ull;
constexpr std::uint64_t kTagReport = 0x72657000ull;
constexpr std::uint64_t kTagReportBase = 0x72706200ull;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// "%.17g" round-trips doubles exactly and is locale-independent.
std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  std::vector<std::string> issues;
  try {
    if (!j.contains("network")) {
      issues.push_back("network: missing");
    } else {
      const auto& net = j.at("network");
      if (net.contains("karate") && net.at("karate").get<bool>()) {
        cfg.network.kind = NetworkSource::Kind::karate;
      } else if (net.contains("sbm")) {
        cfg.network.kind = NetworkSource::Kind::sbm;
        cfg.network.sbm = sbm_spec_from_json(net.at("sbm").dump());
      } else if (net.contains("edges") && net.contains("groups")) {
        cfg.network.kind = NetworkSource::Kind::files;
        cfg.network.edges_path = net.at("edges").get<std::string>();
        cfg.network.groups_path = net.at("groups").get<std::string>();
        cfg.network.attribute_column = net.value("attribute_column", std::size_t{0});
      } else {
        issues.push_back("network: need edges+groups paths, an sbm spec, or karate:true");
      }
    }
    if (j.contains("algorithms")) cfg.algorithms = j.at("algorithms").get<std::vector<std::string>>();
    cfg.k = j.value("k", cfg.k);
    cfg.p = j.value("p", cfg.p);
    cfg.delta = j.value("delta", cfg.delta);
    cfg.lambda = j.value("lambda", cfg.lambda);
    cfg.pop = j.value("pop", cfg.pop);
    cfg.g_max = j.value("g_max", cfg.g_max);
    cfg.cr = j.value("cr", cfg.cr);
    cfg.mu = j.value("mu", cfg.mu);
    if (j.contains("lambdas")) cfg.lambdas = j.at("lambdas").get<std::vector<double>>();
    cfg.repetitions = j.value("repetitions", cfg.repetitions);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
    cfg.split_timings = j.value("split_timings", cfg.split_timings);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  if (!issues.empty()) {
    std::string msg = "config invalid:";
    for (const auto& s : issues) msg += " " + s + ";";
    throw ValidationError(msg);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: invalid JSON: ") + e.what());
  }
  return from_json(j);
}

void ExperimentConfig::validate() const {
  std::vector<std::string> issues;
  if (algorithms.empty()) issues.push_back("algorithms: at least one required");
  static const std::set<std::string> known{"cea-fim", "rea-fim", "greedy"};
  for (const auto& a : algorithms)
    if (!known.count(a)) issues.push_back("algorithms: unknown '" + a + "'");
  if (repetitions < 1) issues.push_back("repetitions: must be >= 1");
  if (!(p >= 0.0 && p <= 1.0)) issues.push_back("p: must lie in [0,1]");
  if (delta < 1) issues.push_back("delta: must be >= 1");
  if (!(lambda >= 0.0 && lambda <= 1.0)) issues.push_back("lambda: must lie in [0,1]");
  for (double l : lambdas)
    if (!(l >= 0.0 && l <= 1.0)) issues.push_back("lambdas: entries must lie in [0,1]");
  if (k < 1) issues.push_back("k: must be >= 1");
  if (pop < 2 || pop % 2 != 0) issues.push_back("pop: must be even and >= 2");
  if (!(cr >= 0.0 && cr <= 1.0)) issues.push_back("cr: must lie in [0,1]");
  if (!(mu >= 0.0 && mu <= 1.0)) issues.push_back("mu: must lie in [0,1]");
  if (!issues.empty()) {
    std::string msg = "config invalid:";
    for (const auto& s : issues) msg += " " + s + ";";
    throw ValidationError(msg);
  }
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json net;
  switch (network.kind) {
    case NetworkSource::Kind::karate:
      net["karate"] = true;
      break;
    case NetworkSource::Kind::sbm:
      net["sbm"] = {{"group_sizes", network.sbm.group_sizes},
                    {"prob_matrix", network.sbm.prob_matrix},
                    {"seed", network.sbm.seed}};
      break;
    case NetworkSource::Kind::files:
      net["edges"] = network.edges_path.string();
      net["groups"] = network.groups_path.string();
      net["attribute_column"] = network.attribute_column;
      break;
  }
  return nlohmann::json{{"network", net},
                        {"algorithms", algorithms},
                        {"k", k},
                        {"p", p},
                        {"delta", delta},
                        {"lambda", lambda},
                        {"pop", pop},
                        {"g_max", g_max},
                        {"cr", cr},
                        {"mu", mu},
                        {"lambdas", lambdas},
                        {"repetitions", repetitions},
                        {"seed", seed},
                        {"split_timings", split_timings}};
}

AttributedGraph load_network(const NetworkSource& source) {
  switch (source.kind) {
    case NetworkSource::Kind::karate:
      return karate_club_graph();
    case NetworkSource::Kind::sbm:
      return generate_sbm(source.sbm);
    case NetworkSource::Kind::files: {
      auto g = load_edge_list(source.edges_path);
      return load_groups(std::move(g), source.groups_path, source.attribute_column);
    }
  }
  throw InternalError("load_network: unknown source kind");
}

ExperimentResults run_experiment(const ExperimentConfig& config) {
  config.validate();
  auto setup_start = std::chrono::steady_clock::now();

  AttributedGraph graph = load_network(config.network);
  if (!graph.has_groups()) throw ValidationError("experiment: network has no groups");
  if (config.k > graph.node_count())
    throw ValidationError("experiment: k exceeds node count");

  Partition partition = louvain(graph, mix_seed(config.seed, kTagLouvain));
  NodeScores scores = pagerank(graph);

  // Fresh context used only for reporting, never for fitness.
  auto report_ens =
      sample_ensemble(graph, config.p, config.delta, mix_seed(config.seed, kTagReport));
  auto report_baselines = group_baselines(graph, config.k, config.p, config.delta,
                                          mix_seed(config.seed, kTagReportBase));

  ExperimentResults results;
  results.config = config;
  results.global_setup_seconds = seconds_since(setup_start);

  std::size_t reps = config.repetitions;
  std::size_t algo_count = config.algorithms.size();
  results.records.assign(reps * algo_count, RunRecord{});

  // Exceptions must not unwind out of the parallel region; stash the first
  // one and rethrow after the loop.
  std::exception_ptr failure = nullptr;

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
  for (std::size_t r = 0; r < reps; ++r) {
    try {
    std::uint64_t rep_seed = config.seed + r;

    auto rep_setup_start = std::chrono::steady_clock::now();
    auto eval_ens =
        sample_ensemble(graph, config.p, config.delta, mix_seed(rep_seed, kTagEnsemble));
    auto baselines = group_baselines(graph, config.k, config.p, config.delta,
                                     mix_seed(rep_seed, kTagBaseline));
    double rep_setup = seconds_since(rep_setup_start);

    // Greedy reference: PoF numerator for every algorithm in this repetition.
    auto greedy_start = std::chrono::steady_clock::now();
    GreedyResult greedy_ref = greedy_celf(eval_ens, graph, config.k);
    double greedy_seconds = seconds_since(greedy_start);
    double opt_influence =
        estimate_influence(report_ens, graph, greedy_ref.seeds).total;

    EvolveContext ctx{graph, partition, scores, eval_ens, baselines};
    for (std::size_t a = 0; a < algo_count; ++a) {
      const std::string& name = config.algorithms[a];
      RunRecord rec;
      rec.algorithm = name;
      rec.repetition = r;
      rec.setup_seconds = rep_setup;

      std::vector<NodeId> seeds;
      if (name == "greedy") {
        seeds = greedy_ref.seeds;
        rec.algo_seconds = greedy_seconds;
      } else {
        EvolutionConfig ecfg;
        ecfg.pop = config.pop;
        ecfg.g_max = config.g_max;
        ecfg.cr = config.cr;
        ecfg.mu = config.mu;
        ecfg.k = config.k;
        ecfg.lambda = config.lambda;
        ecfg.mode = name == "rea-fim" ? SelectionMode::random
                                      : SelectionMode::community_based;
        ecfg.rng_seed = mix_seed(rep_seed, kTagEvolve, a);
        auto algo_start = std::chrono::steady_clock::now();
        EvolveResult evo = evolve(ctx, ecfg);
        rec.algo_seconds = seconds_since(algo_start);
        seeds = evo.best;
        rec.trace = std::move(evo.trace);
      }

      auto estimate = estimate_influence(report_ens, graph, seeds);
      auto report = make_fairness_report(estimate, report_baselines, graph, config.lambda,
                                         opt_influence);
      rec.mf = report.mf;
      rec.dcv = report.dcv;
      rec.f_value = report.f_value;
      rec.influence = estimate.total;
      rec.pof = *report.pof;
      std::sort(seeds.begin(), seeds.end());
      rec.seed_set.reserve(seeds.size());
      for (NodeId v : seeds) rec.seed_set.push_back(graph.external_id(v));
      std::sort(rec.seed_set.begin(), rec.seed_set.end());
      results.records[r * algo_count + a] = std::move(rec);
    }
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical(fim_experiment_failure)
#endif
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t a = 0; a < algo_count; ++a) {
    AlgorithmAggregate agg;
    agg.algorithm = config.algorithms[a];
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& rec = results.records[r * algo_count + a];
      agg.mean_mf += rec.mf;
      agg.mean_dcv += rec.dcv;
      agg.mean_f += rec.f_value;
      agg.mean_influence += rec.influence;
      agg.mean_pof += rec.pof;
    }
    double d = static_cast<double>(reps);
    agg.mean_mf /= d;
    agg.mean_dcv /= d;
    agg.mean_f /= d;
    agg.mean_influence /= d;
    agg.mean_pof /= d;
    results.aggregates.push_back(agg);
  }
  return results;
}

void write_results(const ExperimentResults& results) {
  const auto& config = results.config;
  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + config.out_dir.string());

  nlohmann::json root;
  root["config"] = config.to_json();
  root["seed"] = config.seed;
  nlohmann::json algos = nlohmann::json::object();
  for (const auto& agg : results.aggregates) {
    nlohmann::json entry;
    entry["runs"] = nlohmann::json::array();
    for (const auto& rec : results.records) {
      if (rec.algorithm != agg.algorithm) continue;
      entry["runs"].push_back({{"repetition", rec.repetition},
                               {"seed_set", rec.seed_set},
                               {"mf", rec.mf},
                               {"dcv", rec.dcv},
                               {"f", rec.f_value},
                               {"influence", rec.influence},
                               {"pof", rec.pof}});
    }
    entry["mean"] = {{"mf", agg.mean_mf},
                     {"dcv", agg.mean_dcv},
                     {"f", agg.mean_f},
                     {"influence", agg.mean_influence},
                     {"pof", agg.mean_pof}};
    algos[agg.algorithm] = entry;
  }
  root["algorithms"] = algos;

  {
    std::ofstream out(config.out_dir / "results.json");
    if (!out) throw IoError("cannot write results.json");
    out << root.dump(2) << '\n';
  }

  for (const auto& rec : results.records) {
    if (rec.trace.empty()) continue;
    std::ostringstream name;
    name << "trace_" << rec.algorithm << "_rep" << rec.repetition << ".csv";
    std::ofstream out(config.out_dir / name.str());
    if (!out) throw IoError("cannot write trace CSV");
    out << "generation,best_f,mean_f,best_mf,best_dcv\n";
    for (const auto& row : rec.trace)
      out << row.generation << ',' << format_double(row.best_f) << ','
          << format_double(row.mean_f) << ',' << format_double(row.best_mf) << ','
          << format_double(row.best_dcv) << '\n';
  }

  {
    std::ofstream out(config.out_dir / "timings.csv");
    if (!out) throw IoError("cannot write timings.csv");
    out << "algorithm,repetition,wall_clock_seconds\n";
    double overhead_share =
        config.split_timings
            ? 0.0
            : results.global_setup_seconds / static_cast<double>(results.records.size());
    for (const auto& rec : results.records) {
      double wall = rec.algo_seconds +
                    (config.split_timings ? 0.0 : rec.setup_seconds + overhead_share);
      out << rec.algorithm << ',' << rec.repetition << ',' << format_double(wall) << '\n';
    }
  }
}

namespace {

// Competition ranking: 1 = best, ties share the smallest rank.
std::vector<int> rank_values(const std::vector<double>& values, bool ascending) {
  std::vector<int> rank(values.size(), 1);
  for (std::size_t i = 0; i < values.size(); ++i)
    for (std::size_t j = 0; j < values.size(); ++j) {
      bool better = ascending ? values[j] < values[i] : values[j] > values[i];
      if (better) ++rank[i];
    }
  return rank;
}

}  // namespace

std::vector<LambdaSweepRow> sweep_lambda(const ExperimentConfig& config) {
  config.validate();
  std::vector<double> grid = config.lambdas.empty() ? std::vector<double>{config.lambda}
                                                    : config.lambdas;
  std::string algorithm = config.algorithms.front();

  std::vector<LambdaSweepRow> rows;
  rows.reserve(grid.size());
  for (double l : grid) {
    ExperimentConfig point = config;
    point.lambda = l;
    point.lambdas.clear();
    point.algorithms = {algorithm};
    auto results = run_experiment(point);
    const auto& agg = results.aggregates.front();
    LambdaSweepRow row;
    row.lambda = l;
    row.mean_dcv = agg.mean_dcv;
    row.mean_mf = agg.mean_mf;
    row.mean_pof = agg.mean_pof;
    rows.push_back(row);
  }

  std::vector<double> dcv, mf, pof;
  for (const auto& r : rows) {
    dcv.push_back(r.mean_dcv);
    mf.push_back(r.mean_mf);
    pof.push_back(r.mean_pof);
  }
  auto rd = rank_values(dcv, true);
  auto rm = rank_values(mf, false);
  auto rp = rank_values(pof, true);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].rank_dcv = rd[i];
    rows[i].rank_mf = rm[i];
    rows[i].rank_pof = rp[i];
  }
  return rows;
}

void write_sweep(const std::vector<LambdaSweepRow>& rows,
                 const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + out_dir.string());
  std::ofstream out(out_dir / "sweep.csv");
  if (!out) throw IoError("cannot write sweep.csv");
  out << "lambda,mean_dcv,mean_mf,mean_pof,rank_dcv,rank_mf,rank_pof\n";
  for (const auto& r : rows)
    out << format_double(r.lambda) << ',' << format_double(r.mean_dcv) << ','
        << format_double(r.mean_mf) << ',' << format_double(r.mean_pof) << ',' << r.rank_dcv
        << ',' << r.rank_mf << ',' << r.rank_pof << '\n';
}

void cmd_generate(const std::filesystem::path& spec_path, const std::string& out_prefix) {
  auto spec = sbm_spec_from_json_file(spec_path);
  auto graph = generate_sbm(spec);
  write_edge_list(graph, out_prefix + ".edges");
  write_groups(graph, out_prefix + ".groups");
}

}  // namespace fim
