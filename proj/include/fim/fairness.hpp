#pragma once

#include <optional>
#include <span>
#include <vector>

#include "fim/diffusion.hpp"
#include "fim/graph.hpp"
#include "json.hpp"

namespace fim {

// min_i I_{G,R_i}(S) / |R_i|: the smallest fraction any group receives.
double maximin_fairness(const InfluenceEstimate& estimate, const AttributedGraph& graph);

// (1/q) * sum_i max{(baseline_i - I_{G,R_i}(S)) / baseline_i, 0}: mean
// relative shortfall versus what each group could achieve internally with
// its proportional seed budget. Baselines must all be positive.
double diversity_constraint_violation(const InfluenceEstimate& estimate,
                                      std::span<const double> baselines,
                                      const AttributedGraph& graph);

// lambda * mf - (1 - lambda) * dcv, lambda in [0,1].
double evaluate_fitness(double mf, double dcv, double lambda);

// opt_influence / fair_influence; both measured on the same reporting
// ensemble by the caller. Values near 1 mean fairness cost little spread.
double price_of_fairness(double opt_influence, double fair_influence);

struct FairnessReport {
  double mf = 0.0;
  double dcv = 0.0;
  double f_value = 0.0;
  std::optional<double> pof;
  std::vector<double> per_group_fraction;
  std::vector<double> per_group_violation;

  nlohmann::json to_json() const;
};

FairnessReport make_fairness_report(const InfluenceEstimate& estimate,
                                    std::span<const double> baselines,
                                    const AttributedGraph& graph, double lambda,
                                    std::optional<double> opt_influence = {});

}  // namespace fim
