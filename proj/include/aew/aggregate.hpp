#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "aew/dataset.hpp"
#include "aew/risk.hpp"
#include "aew/rules.hpp"
#include "aew/text.hpp"

namespace aew {

/// Probability vector over the members of an aggregate.
struct WeightVector {
  std::vector<double> w;

  std::size_t size() const { return w.size(); }
  double operator[](std::size_t i) const { return w[i]; }

  double entropy() const {  // -sum w log w, with 0 log 0 = 0
    double h = 0.0;
    for (double v : w)
      if (v > 0.0) h -= v * std::log(v);
    return h;
  }

  void validate(double tol = 1e-12) const {
    if (w.empty()) throw std::invalid_argument("WeightVector: empty");
    double sum = 0.0;
    for (double v : w) {
      if (!(v >= 0.0)) throw std::invalid_argument("WeightVector: negative weight");
      sum += v;
    }
    if (std::fabs(sum - 1.0) > tol)
      throw std::invalid_argument("WeightVector: weights must sum to 1");
  }
};

// Exponents below this after max-shift underflow exp() anyway; their weights
// are set to exact zero so downstream code can skip the members entirely.
inline constexpr double kUnderflowExponent = -745.0;

/// Stabilized softmax: w_j proportional to exp(e_j), computed after
/// subtracting max(e). Invariant under shifting all exponents by a constant,
/// which is what makes the score form sum_i y_i f(x_i) and the risk form
/// -n A_n(f) produce bitwise-identical weights for hard rules.
inline WeightVector weights_from_exponents(std::span<const double> exponents) {
  if (exponents.empty()) throw std::invalid_argument("weights_from_exponents: empty");
  double top = exponents[0];
  for (double e : exponents) {
    if (!std::isfinite(e)) throw std::invalid_argument("weights_from_exponents: non-finite exponent");
    top = std::max(top, e);
  }
  WeightVector out;
  out.w.resize(exponents.size());
  double sum = 0.0;
  for (std::size_t j = 0; j < exponents.size(); ++j) {
    const double shifted = exponents[j] - top;
    out.w[j] = shifted < kUnderflowExponent ? 0.0 : std::exp(shifted);
    sum += out.w[j];
  }
  for (double& v : out.w) v /= sum;  // sum >= 1 since the max contributes exp(0)
  return out;
}

/// Convex surrogate loss phi(margin) used to weight members. Built-in tags
/// keep serialization simple; custom callables get a midpoint-convexity spot
/// check on [-1, 1], the whole margin range for bounded classifiers.
class ConvexLoss {
 public:
  enum class Tag { hinge, exponential, logit, custom };

  static ConvexLoss hinge() {
    return ConvexLoss(Tag::hinge, [](double x) { return std::max(0.0, 1.0 - x); });
  }
  static ConvexLoss exponential() {
    return ConvexLoss(Tag::exponential, [](double x) { return std::exp(-x); });
  }
  static ConvexLoss logit() {
    return ConvexLoss(Tag::logit, [](double x) { return std::log1p(std::exp(-x)); });
  }
  static ConvexLoss custom(std::function<double(double)> fn) {
    if (!fn) throw std::invalid_argument("ConvexLoss: empty callable");
    spot_check_convexity(fn);
    return ConvexLoss(Tag::custom, std::move(fn));
  }

  double operator()(double margin) const { return fn_(margin); }
  Tag tag() const { return tag_; }

 private:
  ConvexLoss(Tag tag, std::function<double(double)> fn) : tag_(tag), fn_(std::move(fn)) {}

  static void spot_check_convexity(const std::function<double(double)>& fn) {
    constexpr int kPoints = 33;
    double vals[kPoints];
    for (int i = 0; i < kPoints; ++i) {
      const double x = -1.0 + 2.0 * i / (kPoints - 1);
      vals[i] = fn(x);
      if (!std::isfinite(vals[i]))
        throw std::invalid_argument("ConvexLoss: non-finite value on [-1, 1]");
    }
    for (int i = 0; i + 2 < kPoints; i += 2)
      if (vals[i + 1] > 0.5 * (vals[i] + vals[i + 2]) + 1e-9)
        throw std::invalid_argument("ConvexLoss: callable is not convex on [-1, 1]");
  }

  Tag tag_;
  std::function<double(double)> fn_;
};

enum class AggregateKind { aew, erm, recursive, split_average };

inline const char* to_string(AggregateKind k) {
  switch (k) {
    case AggregateKind::aew: return "aew";
    case AggregateKind::erm: return "erm";
    case AggregateKind::recursive: return "recursive";
    case AggregateKind::split_average: return "split_average";
  }
  throw std::logic_error("AggregateKind: bad value");
}

inline AggregateKind aggregate_kind_from_string(const std::string& s) {
  if (s == "aew") return AggregateKind::aew;
  if (s == "erm") return AggregateKind::erm;
  if (s == "recursive") return AggregateKind::recursive;
  if (s == "split_average") return AggregateKind::split_average;
  throw std::invalid_argument("AggregateKind: unknown kind '" + s + "'");
}

/// Convex combination sum_j w_j f_j of hard rules; takes values in [-1, 1].
class AggregateModel {
 public:
  AggregateModel(AggregateKind kind, std::vector<PredictionRule> rules, WeightVector weights)
      : kind_(kind), rules_(std::move(rules)), weights_(std::move(weights)) {
    if (rules_.empty()) throw std::invalid_argument("AggregateModel: no rules");
    if (weights_.size() != rules_.size())
      throw std::invalid_argument("AggregateModel: weight/rule count mismatch");
    weights_.validate();
  }

  double evaluate(std::span<const double> x) const {
    double s = 0.0;
    for (std::size_t j = 0; j < rules_.size(); ++j)
      if (weights_.w[j] > 0.0) s += weights_.w[j] * rules_[j](x);
    return s;
  }

  double at(double x) const { return evaluate(std::span<const double>(&x, 1)); }

  AggregateKind kind() const { return kind_; }
  const std::vector<PredictionRule>& rules() const { return rules_; }
  const WeightVector& weights() const { return weights_; }

  SoftClassifier as_soft() const {
    auto self = std::make_shared<const AggregateModel>(*this);
    return SoftClassifier([self](std::span<const double> x) { return self->evaluate(x); },
                          merged_breakpoints());
  }

  PredictionRule sign_rule() const {
    auto self = std::make_shared<const AggregateModel>(*this);
    return PredictionRule::boxed(
        [self](std::span<const double> x) { return sign_pm1(self->evaluate(x)); },
        merged_breakpoints(), std::string("sign(") + to_string(kind_) + " aggregate)");
  }

  nlohmann::json to_json(const std::vector<std::string>& rule_refs) const {
    if (rule_refs.size() != rules_.size())
      throw std::invalid_argument("AggregateModel: rule_refs size mismatch");
    nlohmann::json j;
    j["kind"] = to_string(kind_);
    nlohmann::json ws = nlohmann::json::array();
    for (double w : weights_.w) ws.push_back(full_precision(w));
    j["weights"] = std::move(ws);
    j["rules"] = rule_refs;
    return j;
  }

 private:
  // union over members that actually carry weight; zero-weight members
  // cannot move the sum off a sign
  std::vector<double> merged_breakpoints() const {
    std::vector<double> pts;
    for (std::size_t j = 0; j < rules_.size(); ++j)
      if (weights_.w[j] > 0.0) {
        const auto& b = rules_[j].sign_breakpoints();
        pts.insert(pts.end(), b.begin(), b.end());
      }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
  }

  AggregateKind kind_;
  std::vector<PredictionRule> rules_;
  WeightVector weights_;
};

namespace detail {
// exponent_j = -sum_i phi(y_i f_j(x_i)) = -n A_n^{(phi)}(f_j); keeping the
// sum unnormalized avoids a divide-then-multiply round trip
inline std::vector<double> loss_sum_exponents(const std::vector<PredictionRule>& rules,
                                              const Dataset& data, const ConvexLoss& loss) {
  if (rules.empty()) throw std::invalid_argument("aggregation: empty rule list");
  std::vector<double> exponents(rules.size());
  for (std::size_t j = 0; j < rules.size(); ++j) {
    double sum = 0.0;
    for (const auto& s : data) sum += loss(static_cast<double>(s.y * rules[j](s.x)));
    exponents[j] = -sum;
  }
  return exponents;
}
}  // namespace detail

/// Exponential weights under a convex surrogate: w_j proportional to
/// exp(-n A_n^{(phi)}(f_j)).
inline WeightVector phi_weights(const std::vector<PredictionRule>& rules, const Dataset& data,
                                const ConvexLoss& loss) {
  return weights_from_exponents(detail::loss_sum_exponents(rules, data, loss));
}

/// Hinge-loss exponential weights, w_j proportional to exp(-n A_n(f_j)).
/// For hard rules the hinge terms are exactly 0 or 2, so these coincide
/// bitwise with weights built from the raw scores sum_i y_i f_j(x_i).
inline WeightVector aew_weights(const std::vector<PredictionRule>& rules, const Dataset& data) {
  return phi_weights(rules, data, ConvexLoss::hinge());
}

inline AggregateModel aew_aggregate(std::vector<PredictionRule> rules, const Dataset& data) {
  WeightVector w = aew_weights(rules, data);
  return AggregateModel(AggregateKind::aew, std::move(rules), std::move(w));
}

inline AggregateModel phi_aggregate(std::vector<PredictionRule> rules, const Dataset& data,
                                    const ConvexLoss& loss) {
  WeightVector w = phi_weights(rules, data, loss);
  return AggregateModel(AggregateKind::aew, std::move(rules), std::move(w));
}

/// Empirical risk minimization over the list; ties go to the smallest index.
inline std::pair<std::size_t, PredictionRule> erm_select(
    const std::vector<PredictionRule>& rules, const Dataset& data) {
  if (rules.empty()) throw std::invalid_argument("erm_select: empty rule list");
  std::size_t best = 0;
  double best_risk = empirical_risk(rules[0], data);
  for (std::size_t j = 1; j < rules.size(); ++j) {
    const double r = empirical_risk(rules[j], data);
    if (r < best_risk) {
      best = j;
      best_risk = r;
    }
  }
  return {best, rules[best]};
}

/// Average of the exponential-weight vectors over all data prefixes of length
/// 1..n (uniform prefix weights by default; a custom probability vector over
/// prefixes is accepted). One pass, O(n M) loss evaluations.
inline WeightVector recursive_weights(const std::vector<PredictionRule>& rules,
                                      const Dataset& data,
                                      std::span<const double> prefix_weights = {}) {
  if (rules.empty()) throw std::invalid_argument("recursive_weights: empty rule list");
  const std::size_t n = data.size();
  const bool uniform = prefix_weights.empty();
  if (!uniform) {
    if (prefix_weights.size() != n)
      throw std::invalid_argument("recursive_weights: prefix weight count must equal n");
    double sum = 0.0;
    for (double p : prefix_weights) {
      if (!(p >= 0.0)) throw std::invalid_argument("recursive_weights: negative prefix weight");
      sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-12)
      throw std::invalid_argument("recursive_weights: prefix weights must sum to 1");
  }

  std::vector<double> loss_sums(rules.size(), 0.0);
  std::vector<double> exponents(rules.size());
  std::vector<double> acc(rules.size(), 0.0);
  const ConvexLoss hinge = ConvexLoss::hinge();
  for (std::size_t k = 0; k < n; ++k) {
    const auto& s = data[k];
    for (std::size_t j = 0; j < rules.size(); ++j) {
      loss_sums[j] += hinge(static_cast<double>(s.y * rules[j](s.x)));
      exponents[j] = -loss_sums[j];
    }
    const WeightVector wk = weights_from_exponents(exponents);
    const double pk = uniform ? 1.0 : prefix_weights[k];
    for (std::size_t j = 0; j < rules.size(); ++j) acc[j] += pk * wk.w[j];
  }
  if (uniform)
    for (double& v : acc) v /= static_cast<double>(n);
  WeightVector out{std::move(acc)};
  out.validate();
  return out;
}

inline AggregateModel recursive_aggregate(std::vector<PredictionRule> rules, const Dataset& data,
                                          std::span<const double> prefix_weights = {}) {
  WeightVector w = recursive_weights(rules, data, prefix_weights);
  return AggregateModel(AggregateKind::recursive, std::move(rules), std::move(w));
}

/// Pointwise average of aggregates (e.g. built over different data splits):
/// the members are concatenated and each weight is scaled by 1/K.
inline AggregateModel split_average(const std::vector<AggregateModel>& models) {
  if (models.empty()) throw std::invalid_argument("split_average: no models");
  std::vector<PredictionRule> rules;
  std::vector<double> w;
  const double scale = 1.0 / static_cast<double>(models.size());
  for (const auto& m : models) {
    for (std::size_t j = 0; j < m.rules().size(); ++j) {
      rules.push_back(m.rules()[j]);
      w.push_back(scale * m.weights().w[j]);
    }
  }
  return AggregateModel(AggregateKind::split_average, std::move(rules), WeightVector{std::move(w)});
}

}  // namespace aew
