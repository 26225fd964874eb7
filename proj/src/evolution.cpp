#include "fim/evolution.hpp"

#include <algorithm>
#include <cassert>
#include <numeric>
#include <optional>

#include "fim/rng.hpp"

namespace fim {

namespace {

// Substream tags so operator randomness is independent of scheduling.
constexpr std::uint64_t kTagInit = 0x696e6974ull;
constexpr std::uint64_t kTagCross = 0x63726f73ull;
constexpr std::uint64_t kTagRepair = 0x72657061ull;
constexpr std::uint64_t kTagMutate = 0x6d757461ull;

std::vector<NodeId> sample_uniform_distinct(std::size_t n, std::size_t k, Rng& rng) {
  // Partial Fisher-Yates over a scratch identity permutation.
  std::vector<NodeId> ids(n);
  std::iota(ids.begin(), ids.end(), 0u);
  for (std::size_t j = 0; j < k; ++j)
    std::swap(ids[j], ids[j + rng.next_below(n - j)]);
  ids.resize(k);
  return ids;
}

void check_individual(const Individual& ind, std::size_t k, std::size_t n) {
  if (ind.genes.size() != k) throw InternalError("individual: wrong gene count");
  std::vector<NodeId> copy = ind.genes;
  std::sort(copy.begin(), copy.end());
  if (std::adjacent_find(copy.begin(), copy.end()) != copy.end())
    throw InternalError("individual: duplicate gene");
  if (!copy.empty() && copy.back() >= n) throw InternalError("individual: gene out of range");
}

}  // namespace

void EvolutionConfig::validate(std::size_t node_count) const {
  if (pop < 2 || pop % 2 != 0)
    throw ValidationError("evolution: pop must be even and >= 2");
  if (!(cr >= 0.0 && cr <= 1.0)) throw ValidationError("evolution: cr must lie in [0,1]");
  if (!(mu >= 0.0 && mu <= 1.0)) throw ValidationError("evolution: mu must lie in [0,1]");
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw ValidationError("evolution: lambda must lie in [0,1]");
  if (k < 1 || k > node_count)
    throw ValidationError("evolution: k must satisfy 1 <= k <= node count");
}

Population initialize_population(const EvolveContext& ctx, const EvolutionConfig& config) {
  config.validate(ctx.graph.node_count());
  std::size_t n = ctx.graph.node_count();
  std::size_t m = ctx.partition.community_count();

  // Community members pre-sorted by descending score, id ascending on ties.
  std::vector<std::vector<NodeId>> ranked(m);
  if (config.mode == SelectionMode::community_based) {
    for (std::size_t c = 0; c < m; ++c) {
      auto members = ctx.partition.members(c);
      ranked[c].assign(members.begin(), members.end());
      std::sort(ranked[c].begin(), ranked[c].end(), [&](NodeId a, NodeId b) {
        double sa = ctx.scores.values[a], sb = ctx.scores.values[b];
        return sa > sb || (sa == sb && a < b);
      });
    }
  }

  Population population(config.pop);
  std::optional<SelectionState> state;
  if (config.mode == SelectionMode::community_based) state.emplace(ctx.graph, ctx.partition);
  for (std::size_t i = 0; i < config.pop; ++i) {
    Rng rng(mix_seed(config.rng_seed, kTagInit, i));
    auto& individual = population[i];
    if (config.mode == SelectionMode::random) {
      individual.genes = sample_uniform_distinct(n, config.k, rng);
    } else {
      state->reset();
      std::vector<std::size_t> draws(m, 0);
      for (std::size_t j = 0; j < config.k; ++j) {
        std::size_t c = state->select_community(rng);
        ++draws[c];
        // A community drawn as often as it has nodes is out of stock.
        if (draws[c] == ctx.partition.community_size(c)) state->mask_community(c);
      }
      individual.genes.clear();
      for (std::size_t c = 0; c < m; ++c)
        individual.genes.insert(individual.genes.end(), ranked[c].begin(),
                                ranked[c].begin() + draws[c]);
    }
    check_individual(individual, config.k, n);
  }
  return population;
}

namespace {

void dedup_keep_first(std::vector<NodeId>& genes, std::size_t n) {
  NodeMask seen(n);
  std::size_t out = 0;
  for (NodeId v : genes) {
    if (seen.contains(v)) continue;
    seen.add(v);
    genes[out++] = v;
  }
  genes.resize(out);
}

// Refill genes to k using the configured sampler with the current genes as
// both urgency context and exclusion set.
void repair(std::vector<NodeId>& genes, std::optional<SelectionState>& state,
            const EvolveContext& ctx, const EvolutionConfig& config, Rng& rng) {
  std::size_t n = ctx.graph.node_count();
  NodeMask exclude(n);
  for (NodeId v : genes) exclude.add(v);
  if (config.mode == SelectionMode::community_based) state->reset_from(genes);
  while (genes.size() < config.k) {
    NodeId v = config.mode == SelectionMode::community_based
                   ? select_fair_node(*state, ctx.scores, rng, exclude)
                   : select_uniform_node(n, rng, exclude);
    genes.push_back(v);
    exclude.add(v);
  }
}

}  // namespace

Population crossover(const Population& sorted_population, const EvolveContext& ctx,
                     const EvolutionConfig& config, std::size_t generation) {
  Population children = sorted_population;
  std::size_t pop = children.size();

  for (std::size_t i = 0; i < pop / 2; ++i) {
    std::size_t partner = pop - 1 - i;
    Rng rng(mix_seed(config.rng_seed, kTagCross, generation, i));
    for (std::size_t j = 0; j < config.k; ++j)
      if (rng.bernoulli(config.cr))
        std::swap(children[i].genes[j], children[partner].genes[j]);
  }

  std::optional<SelectionState> state;
  if (config.mode == SelectionMode::community_based) state.emplace(ctx.graph, ctx.partition);
  for (std::size_t i = 0; i < pop; ++i) {
    auto& child = children[i];
    dedup_keep_first(child.genes, ctx.graph.node_count());
    if (child.genes.size() != config.k) {
      Rng rng(mix_seed(config.rng_seed, kTagRepair, generation, i));
      repair(child.genes, state, ctx, config, rng);
    }
    if (child.genes != sorted_population[i].genes) child.fitness_key = 0;
    check_individual(child, config.k, ctx.graph.node_count());
  }
  return children;
}

void mutation(Population& population, const EvolveContext& ctx, const EvolutionConfig& config,
              std::size_t generation) {
  std::size_t n = ctx.graph.node_count();
  std::optional<SelectionState> state;
  if (config.mode == SelectionMode::community_based) state.emplace(ctx.graph, ctx.partition);
  std::vector<NodeId> others;

  for (std::size_t i = 0; i < population.size(); ++i) {
    Rng rng(mix_seed(config.rng_seed, kTagMutate, generation, i));
    auto& genes = population[i].genes;
    bool changed = false;
    for (std::size_t j = 0; j < config.k; ++j) {
      if (!rng.bernoulli(config.mu)) continue;
      // Scores are rebuilt from the individual without its j-th element.
      others.clear();
      for (std::size_t t = 0; t < genes.size(); ++t)
        if (t != j) others.push_back(genes[t]);
      NodeMask exclude(n);
      for (NodeId v : others) exclude.add(v);
      NodeId replacement;
      if (config.mode == SelectionMode::community_based) {
        state->reset_from(others);
        replacement = select_fair_node(*state, ctx.scores, rng, exclude);
      } else {
        replacement = select_uniform_node(n, rng, exclude);
      }
      changed = changed || replacement != genes[j];
      genes[j] = replacement;
    }
    if (changed) population[i].fitness_key = 0;
    check_individual(population[i], config.k, n);
  }
}

void evaluate_population(Population& population, const EvolveContext& ctx,
                         const EvolutionConfig& config) {
  std::uint64_t key = ctx.ensemble.identity();
  std::size_t count = population.size();
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::size_t i = 0; i < count; ++i) {
    auto& ind = population[i];
    if (ind.fitness_key == key) continue;
    auto estimate = estimate_influence(ctx.ensemble, ctx.graph, ind.genes);
    ind.mf = maximin_fairness(estimate, ctx.graph);
    ind.dcv = diversity_constraint_violation(estimate, ctx.baselines, ctx.graph);
    ind.fitness = evaluate_fitness(ind.mf, ind.dcv, config.lambda);
    ind.fitness_key = key;
  }
}

namespace {

GenerationStats stats_for(const Population& population, std::size_t generation) {
  GenerationStats stats;
  stats.generation = generation;
  double sum = 0.0;
  std::size_t best = 0;
  for (std::size_t i = 0; i < population.size(); ++i) {
    sum += population[i].fitness;
    if (population[i].fitness > population[best].fitness) best = i;
  }
  stats.mean_f = sum / static_cast<double>(population.size());
  stats.best_f = population[best].fitness;
  stats.best_mf = population[best].mf;
  stats.best_dcv = population[best].dcv;
  return stats;
}

}  // namespace

EvolveResult evolve(const EvolveContext& ctx, const EvolutionConfig& config) {
  config.validate(ctx.graph.node_count());
  if (ctx.ensemble.node_count() != ctx.graph.node_count())
    throw ValidationError("evolve: ensemble does not match graph");
  if (ctx.baselines.size() != ctx.graph.group_count())
    throw ValidationError("evolve: baseline count does not match group count");

  Population population = initialize_population(ctx, config);
  evaluate_population(population, ctx, config);

  EvolveResult result;
  result.trace.reserve(config.g_max + 1);
  result.trace.push_back(stats_for(population, 0));

  for (std::size_t g = 1; g <= config.g_max; ++g) {
    std::stable_sort(population.begin(), population.end(),
                     [](const Individual& a, const Individual& b) {
                       return a.fitness > b.fitness;
                     });
    Population children = crossover(population, ctx, config, g);
    mutation(children, ctx, config, g);
    evaluate_population(children, ctx, config);
    for (std::size_t i = 0; i < population.size(); ++i)
      if (children[i].fitness > population[i].fitness) population[i] = children[i];
    result.trace.push_back(stats_for(population, g));
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < population.size(); ++i)
    if (population[i].fitness > population[best].fitness) best = i;
  result.best = population[best].genes;
  std::sort(result.best.begin(), result.best.end());
  result.best_f = population[best].fitness;
  result.best_mf = population[best].mf;
  result.best_dcv = population[best].dcv;
  return result;
}

EvolveResult rea_fim_variant(const EvolveContext& ctx, EvolutionConfig config) {
  config.mode = SelectionMode::random;
  return evolve(ctx, config);
}

}  // namespace fim
