#include "fim/fairness.hpp"

#include <algorithm>

namespace fim {

namespace {

void check_groups(const InfluenceEstimate& estimate, const AttributedGraph& graph) {
  if (!graph.has_groups()) throw ValidationError("fairness: graph has no groups");
  if (estimate.per_group.size() != graph.group_count())
    throw ValidationError("fairness: estimate does not cover all groups");
}

}  // namespace

double maximin_fairness(const InfluenceEstimate& estimate, const AttributedGraph& graph) {
  check_groups(estimate, graph);
  double mf = 1.0;
  for (std::size_t g = 0; g < graph.group_count(); ++g)
    mf = std::min(mf, estimate.per_group[g] / static_cast<double>(graph.group_size(g)));
  return mf;
}

double diversity_constraint_violation(const InfluenceEstimate& estimate,
                                      std::span<const double> baselines,
                                      const AttributedGraph& graph) {
  check_groups(estimate, graph);
  if (baselines.size() != graph.group_count())
    throw ValidationError("dcv: baseline count does not match group count");
  double sum = 0.0;
  for (std::size_t g = 0; g < baselines.size(); ++g) {
    if (!(baselines[g] > 0.0)) throw ValidationError("dcv: nonpositive baseline");
    sum += std::max((baselines[g] - estimate.per_group[g]) / baselines[g], 0.0);
  }
  return sum / static_cast<double>(baselines.size());
}

double evaluate_fitness(double mf, double dcv, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw ValidationError("evaluate_fitness: lambda must lie in [0,1]");
  return lambda * mf - (1.0 - lambda) * dcv;
}

double price_of_fairness(double opt_influence, double fair_influence) {
  if (!(fair_influence > 0.0))
    throw ValidationError("price_of_fairness: fair influence must be positive");
  return opt_influence / fair_influence;
}

FairnessReport make_fairness_report(const InfluenceEstimate& estimate,
                                    std::span<const double> baselines,
                                    const AttributedGraph& graph, double lambda,
                                    std::optional<double> opt_influence) {
  FairnessReport report;
  std::size_t q = graph.group_count();
  report.per_group_fraction.resize(q);
  report.per_group_violation.resize(q);
  check_groups(estimate, graph);
  if (baselines.size() != q) throw ValidationError("fairness report: baseline count mismatch");
  for (std::size_t g = 0; g < q; ++g) {
    report.per_group_fraction[g] =
        estimate.per_group[g] / static_cast<double>(graph.group_size(g));
    report.per_group_violation[g] =
        std::max((baselines[g] - estimate.per_group[g]) / baselines[g], 0.0);
  }
  report.mf = maximin_fairness(estimate, graph);
  report.dcv = diversity_constraint_violation(estimate, baselines, graph);
  report.f_value = evaluate_fitness(report.mf, report.dcv, lambda);
  if (opt_influence) report.pof = price_of_fairness(*opt_influence, estimate.total);
  return report;
}

nlohmann::json FairnessReport::to_json() const {
  nlohmann::json j;
  j["mf"] = mf;
  j["dcv"] = dcv;
  j["f_value"] = f_value;
  if (pof) j["pof"] = *pof;
  j["per_group_fraction"] = per_group_fraction;
  j["per_group_violation"] = per_group_violation;
  return j;
}

}  // namespace fim
