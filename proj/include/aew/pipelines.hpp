#pragma once

#include <algorithm>
#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "aew/aggregate.hpp"
#include "aew/dataset.hpp"
#include "aew/grids.hpp"
#include "aew/parallel.hpp"
#include "aew/risk.hpp"
#include "aew/rules.hpp"
#include "aew/sieve.hpp"
#include "aew/split.hpp"
#include "aew/svm.hpp"

namespace aew {

struct MemberInfo {
  std::string descriptor;
  bool converged = true;      // always true for partition members
  double holdout_hinge = 0.0; // empirical hinge risk on the aggregation part
};

/// Outcome of a split-fit-aggregate run. `members` is aligned with
/// model.rules(). The holdout fields are all computed on the aggregation
/// suffix D_l, so `aggregate_holdout_hinge <= min_member_holdout_hinge +
/// log(M)/l` holds exactly (up to rounding) for exponential-weight kinds.
struct PipelineResult {
  AggregateModel model;
  SplitPlan plan;
  std::vector<MemberInfo> members;
  double aggregate_holdout_hinge = 0.0;
  double min_member_holdout_hinge = 0.0;
  std::size_t members_dropped = 0;  // member fits excluded by the failure policy
};

namespace detail {

inline PipelineResult finish_aggregation(AggregateKind kind, std::vector<PredictionRule> rules,
                                         std::vector<bool> member_converged, const Dataset& dl,
                                         const SplitPlan& plan, std::size_t dropped) {
  WeightVector w = kind == AggregateKind::recursive ? recursive_weights(rules, dl)
                                                    : aew_weights(rules, dl);
  AggregateModel model(kind, rules, std::move(w));

  std::vector<MemberInfo> members;
  members.reserve(rules.size());
  double min_hinge = 0.0;
  for (std::size_t j = 0; j < rules.size(); ++j) {
    MemberInfo info;
    info.descriptor = rules[j].descriptor();
    info.converged = member_converged.empty() ? true : static_cast<bool>(member_converged[j]);
    info.holdout_hinge = empirical_hinge_risk(rules[j], dl);
    if (j == 0 || info.holdout_hinge < min_hinge) min_hinge = info.holdout_hinge;
    members.push_back(std::move(info));
  }
  const double agg_hinge = empirical_hinge_risk(model.as_soft(), dl);
  return PipelineResult{std::move(model), plan,           std::move(members),
                        agg_hinge,        min_hinge,      dropped};
}

/// Sign rules for models sharing one support set and kernel width. Identical
/// to calling sign_rule() on each model; batching only shares the scan-grid
/// kernel columns across models (bitwise-equal decision values, see
/// batched_decisions_1d).
inline std::vector<PredictionRule> svm_sign_rules(
    const std::vector<std::shared_ptr<const SvmModel>>& models) {
  std::vector<PredictionRule> rules;
  rules.reserve(models.size());
  if (models.empty()) return rules;
  const Dataset& sup = models[0]->support();
  if (sup.dim() != 1) {
    for (const auto& m : models)
      rules.push_back(PredictionRule::boxed(
          [m](std::span<const double> x) { return m->classify(x); }, {}, m->descriptor()));
    return rules;
  }
  const double sigma = models[0]->kernel().sigma;
  const auto xs = uniform_grid(-1.0, 1.0, scan_points_for_sigma(sigma));
  std::vector<const std::vector<double>*> coeff_sets;
  coeff_sets.reserve(models.size());
  for (const auto& m : models) coeff_sets.push_back(&m->coeffs());
  const auto values = batched_decisions_1d(sup, sigma, coeff_sets, xs);
  for (std::size_t k = 0; k < models.size(); ++k) {
    const auto m = models[k];
    auto bps = refine_sign_changes([m](double x) { return m->decision_at(x); }, xs, values[k]);
    rules.push_back(PredictionRule::boxed(
        [m](std::span<const double> x) { return m->classify(x); }, std::move(bps),
        m->descriptor()));
  }
  return rules;
}

}  // namespace detail

/// Split the data, fit partition ERMs at depths 0..max_depth on the prefix,
/// aggregate them with exponential (or recursive) weights on the suffix.
/// max_depth < 0 picks the default ladder height for the prefix size.
inline PipelineResult pipeline_sieve(const Dataset& data, double a, int max_depth, const Box& box,
                                     AggregateKind kind = AggregateKind::aew) {
  if (kind != AggregateKind::aew && kind != AggregateKind::recursive)
    throw std::invalid_argument("pipeline_sieve: kind must be aew or recursive");
  const SplitPlan plan = make_split_plan(data.size(), a);
  auto [dm, dl] = split_dataset(data, a);
  if (max_depth < 0) max_depth = default_ladder_depth(dm.size(), dm.dim());
  const auto ladder = sieve_ladder(dm, max_depth, box);
  std::vector<PredictionRule> rules;
  rules.reserve(ladder.size());
  for (const auto& r : ladder) rules.push_back(r.as_rule());
  return detail::finish_aggregation(kind, std::move(rules), {}, dl, plan, 0);
}

namespace detail {

// Fit one model per lambda against a shared Gram matrix; keep the ones whose
// first-order violation is within 100x the convergence tolerance, drop the
// rest. Fits land in indexed slots so worker count cannot reorder anything.
inline std::vector<std::shared_ptr<const SvmModel>> fit_lambda_family(
    const Dataset& dm, double sigma, const std::vector<double>& lambdas,
    const SolveOptions& options, unsigned workers, std::size_t& dropped) {
  const KernelSpec kernel{sigma};
  const std::vector<double> gram = gram_matrix(dm, kernel);
  std::vector<std::optional<SvmModel>> fits(lambdas.size());
  parallel_for(lambdas.size(), workers, [&](std::size_t i) {
    fits[i] = solve_dual_with_gram(dm, kernel, lambdas[i], gram, options);
  });
  std::vector<std::shared_ptr<const SvmModel>> kept;
  for (auto& f : fits) {
    if (f->kkt() <= 100.0 * options.tol)
      kept.push_back(std::make_shared<const SvmModel>(std::move(*f)));
    else
      ++dropped;
  }
  return kept;
}

}  // namespace detail

/// Kernel machines with a fixed width sigma across the lambda grid G(l),
/// aggregated with exponential weights.
inline PipelineResult pipeline_svm_lambda(const Dataset& data, double a, double b0, double sigma,
                                          const SolveOptions& options = {}, unsigned workers = 1) {
  const SplitPlan plan = make_split_plan(data.size(), a);
  auto [dm, dl] = split_dataset(data, a);
  const LambdaGrid grid = lambda_grid(plan.l, b0);
  std::vector<double> lambdas;
  lambdas.reserve(grid.entries.size());
  for (const auto& e : grid.entries) lambdas.push_back(e.lambda);

  std::size_t dropped = 0;
  const auto kept = detail::fit_lambda_family(dm, sigma, lambdas, options, workers, dropped);
  if (kept.empty())
    throw std::runtime_error("pipeline_svm_lambda: every fit exceeded the violation threshold");
  std::vector<PredictionRule> rules = detail::svm_sign_rules(kept);
  std::vector<bool> conv;
  conv.reserve(kept.size());
  for (const auto& m : kept) conv.push_back(m->converged());
  return detail::finish_aggregation(AggregateKind::aew, std::move(rules), std::move(conv), dl,
                                    plan, dropped);
}

/// Kernel machines across the (sigma, lambda) product grid M(l) x N(l),
/// aggregated with exponential weights. Fits sharing a sigma share a Gram
/// matrix.
inline PipelineResult pipeline_svm_sigma_lambda(const Dataset& data, double a, double b0, int d0,
                                                const SolveOptions& options = {},
                                                unsigned workers = 1) {
  const SplitPlan plan = make_split_plan(data.size(), a);
  auto [dm, dl] = split_dataset(data, a);
  const SigmaLambdaGrid grid = sigma_lambda_grid(plan.l, b0, d0);

  std::vector<PredictionRule> rules;
  std::vector<bool> conv;
  std::size_t dropped = 0;
  std::size_t i = 0;
  while (i < grid.entries.size()) {  // entries are p1-major: one block per sigma
    std::size_t j = i;
    std::vector<double> lambdas;
    while (j < grid.entries.size() && grid.entries[j].p1 == grid.entries[i].p1) {
      lambdas.push_back(grid.entries[j].lambda);
      ++j;
    }
    const double sigma = grid.entries[i].sigma;
    const auto kept = detail::fit_lambda_family(dm, sigma, lambdas, options, workers, dropped);
    auto group_rules = detail::svm_sign_rules(kept);
    for (std::size_t k = 0; k < kept.size(); ++k) {
      rules.push_back(std::move(group_rules[k]));
      conv.push_back(kept[k]->converged());
    }
    i = j;
  }
  if (rules.empty())
    throw std::runtime_error(
        "pipeline_svm_sigma_lambda: every fit exceeded the violation threshold");
  return detail::finish_aggregation(AggregateKind::aew, std::move(rules), std::move(conv), dl,
                                    plan, dropped);
}

/// Average of sieve aggregates built over cyclic rotations of the sample
/// (n_splits different prefix/suffix splits). Holdout statistics are reported
/// against the unrotated split for comparability.
inline PipelineResult pipeline_split_average(const Dataset& data, double a, int max_depth,
                                             const Box& box, std::size_t n_splits) {
  if (n_splits == 0) throw std::invalid_argument("pipeline_split_average: n_splits must be >= 1");
  const std::size_t n = data.size();
  n_splits = std::min(n_splits, n);
  const SplitPlan plan = make_split_plan(n, a);

  std::vector<AggregateModel> parts;
  parts.reserve(n_splits);
  for (std::size_t r = 0; r < n_splits; ++r) {
    const std::size_t start = r * n / n_splits;
    std::vector<LabeledSample> rotated;
    rotated.reserve(n);
    for (std::size_t i = 0; i < n; ++i) rotated.push_back(data[(start + i) % n]);
    parts.push_back(pipeline_sieve(Dataset(std::move(rotated)), a, max_depth, box).model);
  }
  AggregateModel model = split_average(parts);

  const Dataset dl = data.tail(plan.l);
  std::vector<MemberInfo> members;
  members.reserve(model.rules().size());
  double min_hinge = 0.0;
  for (std::size_t j = 0; j < model.rules().size(); ++j) {
    MemberInfo info;
    info.descriptor = model.rules()[j].descriptor();
    info.holdout_hinge = empirical_hinge_risk(model.rules()[j], dl);
    if (j == 0 || info.holdout_hinge < min_hinge) min_hinge = info.holdout_hinge;
    members.push_back(std::move(info));
  }
  const double agg_hinge = empirical_hinge_risk(model.as_soft(), dl);
  return PipelineResult{std::move(model), plan,      std::move(members),
                        agg_hinge,        min_hinge, 0};
}

}  // namespace aew
