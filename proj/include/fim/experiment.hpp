#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fim/evolution.hpp"
#include "fim/graph.hpp"
#include "json.hpp"

namespace fim {

struct NetworkSource {
  enum class Kind { files, sbm, karate };
  Kind kind = Kind::files;
  std::filesystem::path edges_path;
  std::filesystem::path groups_path;
  std::size_t attribute_column = 0;  // column picked from multi-attribute files
  SbmSpec sbm;
};

struct ExperimentConfig {
  NetworkSource network;
  std::vector<std::string> algorithms{"cea-fim", "rea-fim", "greedy"};
  std::size_t k = 40;
  double p = 0.01;
  std::size_t delta = 1000;
  double lambda = 0.5;
  std::size_t pop = 10;
  std::size_t g_max = 150;
  double cr = 0.6;
  double mu = 0.1;
  std::vector<double> lambdas;  // sweep grid; empty means {lambda}
  std::size_t repetitions = 10;
  std::uint64_t seed = 1;
  std::filesystem::path out_dir = "out";
  bool split_timings = false;

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_json_file(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  void validate() const;  // throws ValidationError listing every bad field
};

// One algorithm x repetition outcome. Metrics are measured on the shared
// fresh reporting ensemble so algorithms are directly comparable; PoF is
// taken against the greedy reference seed set of the same repetition.
struct RunRecord {
  std::string algorithm;
  std::size_t repetition = 0;
  std::vector<std::int64_t> seed_set;  // external ids, ascending
  double mf = 0.0;
  double dcv = 0.0;
  double f_value = 0.0;
  double influence = 0.0;
  double pof = 0.0;
  double algo_seconds = 0.0;
  double setup_seconds = 0.0;
  std::vector<GenerationStats> trace;  // empty for greedy
};

struct AlgorithmAggregate {
  std::string algorithm;
  double mean_mf = 0.0;
  double mean_dcv = 0.0;
  double mean_f = 0.0;
  double mean_influence = 0.0;
  double mean_pof = 0.0;
};

struct ExperimentResults {
  ExperimentConfig config;
  std::vector<RunRecord> records;          // repetition-major, algorithm order
  std::vector<AlgorithmAggregate> aggregates;
  double global_setup_seconds = 0.0;
};

// Loads/generates the network, runs every algorithm x repetition
// (repetitions may execute concurrently; outputs are identical either way),
// and reports on a fresh ensemble. Does not touch the filesystem beyond
// reading the network source.
ExperimentResults run_experiment(const ExperimentConfig& config);

// results.json (byte-deterministic given the seed), one trace CSV per
// evolutionary run, and timings.csv (the only run-to-run varying file).
void write_results(const ExperimentResults& results);

struct LambdaSweepRow {
  double lambda = 0.0;
  double mean_dcv = 0.0;
  double mean_mf = 0.0;
  double mean_pof = 0.0;
  int rank_dcv = 0;  // 1 = best; ties share the smallest rank
  int rank_mf = 0;
  int rank_pof = 0;
};

// Runs the first configured algorithm once per lambda in config.lambdas with
// identical repetition seeds, so rows differ only through lambda.
std::vector<LambdaSweepRow> sweep_lambda(const ExperimentConfig& config);

void write_sweep(const std::vector<LambdaSweepRow>& rows,
                 const std::filesystem::path& out_dir);

// Materializes an SBM spec into "<prefix>.edges" and "<prefix>.groups".
void cmd_generate(const std::filesystem::path& spec_path, const std::string& out_prefix);

// Loads the configured network (files, generated SBM, or the karate fixture).
AttributedGraph load_network(const NetworkSource& source);

}  // namespace fim
