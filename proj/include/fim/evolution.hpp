#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fim/community.hpp"
#include "fim/diffusion.hpp"
#include "fim/fairness.hpp"
#include "fim/graph.hpp"
#include "fim/selection.hpp"

namespace fim {

// One seed-set candidate: k distinct node ids plus a cached fitness tagged
// with the ensemble it was computed on (0 = dirty).
struct Individual {
  std::vector<NodeId> genes;
  double fitness = 0.0;
  double mf = 0.0;
  double dcv = 0.0;
  std::uint64_t fitness_key = 0;
};

using Population = std::vector<Individual>;

enum class SelectionMode {
  community_based,  // two-stage community/node sampler
  random,           // uniform ablation
};

struct EvolutionConfig {
  std::size_t pop = 10;
  std::size_t g_max = 150;
  double cr = 0.6;
  double mu = 0.1;
  std::size_t k = 40;
  double lambda = 0.5;
  SelectionMode mode = SelectionMode::community_based;
  std::uint64_t rng_seed = 0;

  void validate(std::size_t node_count) const;  // throws ValidationError
};

// Everything the operators need; all references outlive the run and are
// immutable, so fitness evaluations may proceed concurrently.
struct EvolveContext {
  const AttributedGraph& graph;
  const Partition& partition;
  const NodeScores& scores;
  const LiveEdgeEnsemble& ensemble;
  std::span<const double> baselines;
};

struct GenerationStats {
  std::size_t generation = 0;
  double best_f = 0.0;
  double mean_f = 0.0;
  double best_mf = 0.0;
  double best_dcv = 0.0;
};

struct EvolveResult {
  std::vector<NodeId> best;  // sorted ascending
  double best_f = 0.0;
  double best_mf = 0.0;
  double best_dcv = 0.0;
  std::vector<GenerationStats> trace;  // generation 0 = initial population
};

// Community-based initialization: per individual, k community draws with
// first-selection score refresh and over-draw masking, then the top draws-
// per-community nodes by score. Random mode samples k distinct nodes
// uniformly instead.
Population initialize_population(const EvolveContext& ctx, const EvolutionConfig& config);

// Paired uniform crossover on a population sorted descending by fitness:
// position-wise swaps between individuals i and pop-1-i with probability cr,
// duplicate removal, then refill to k genes with the child's genes as both
// urgency context and exclusion set.
Population crossover(const Population& sorted_population, const EvolveContext& ctx,
                     const EvolutionConfig& config, std::size_t generation);

// Each gene mutates independently with probability mu; the replacement is
// drawn with the community scores rebuilt from the other k-1 genes.
void mutation(Population& population, const EvolveContext& ctx, const EvolutionConfig& config,
              std::size_t generation);

// Evaluates any dirty individual on the shared ensemble (parallel across
// individuals; results are scheduling-independent).
void evaluate_population(Population& population, const EvolveContext& ctx,
                         const EvolutionConfig& config);

// g_max generations of sort / crossover / mutation / pairwise elitist
// replacement. Identical inputs reproduce identical traces bit-for-bit.
EvolveResult evolve(const EvolveContext& ctx, const EvolutionConfig& config);

// Ablation: the identical pipeline with uniform node selection.
EvolveResult rea_fim_variant(const EvolveContext& ctx, EvolutionConfig config);

}  // namespace fim
