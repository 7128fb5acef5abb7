#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace aew {

// sign convention used everywhere: sign(0) = +1
inline int sign_pm1(double v) { return v < 0.0 ? -1 : 1; }

namespace detail {
inline const std::vector<double>& empty_breakpoints() {
  static const std::vector<double> none;
  return none;
}
}  // namespace detail

/// Hard classifier X -> {-1, +1}. Cheap to copy (the callable and breakpoint
/// list are shared). For 1-D rules, sign_breakpoints() lists points where the
/// predicted label may change; population-risk quadrature subdivides there.
/// The list is a hint for integration accuracy, not a contract: evaluation
/// always goes through the callable.
class PredictionRule {
 public:
  using EvalFn = std::function<int(std::span<const double>)>;

  PredictionRule() = default;

  static PredictionRule constant(int label) {
    require_label(label);
    return PredictionRule([label](std::span<const double>) { return label; }, {},
                          "constant(" + std::to_string(label) + ")");
  }

  /// Exact-match lookup with a default label for unseen points. Handy for
  /// tests that pin a rule's behaviour on a finite sample.
  static PredictionRule lookup_table(std::map<std::vector<double>, int> table, int fallback = 1) {
    require_label(fallback);
    for (const auto& [k, v] : table) require_label(v);
    auto shared = std::make_shared<const std::map<std::vector<double>, int>>(std::move(table));
    return PredictionRule(
        [shared, fallback](std::span<const double> x) {
          auto it = shared->find(std::vector<double>(x.begin(), x.end()));
          return it == shared->end() ? fallback : it->second;
        },
        {}, "lookup_table");
  }

  static PredictionRule boxed(EvalFn fn, std::vector<double> sign_breakpoints = {},
                              std::string descriptor = "boxed") {
    return PredictionRule(std::move(fn), std::move(sign_breakpoints), std::move(descriptor));
  }

  int operator()(std::span<const double> x) const {
    int v = fn_(x);
    if (v != 1 && v != -1) throw std::logic_error("PredictionRule: output must be -1 or +1");
    return v;
  }

  // 1-D convenience
  int at(double x) const { return (*this)(std::span<const double>(&x, 1)); }

  const std::vector<double>& sign_breakpoints() const {
    return breakpoints_ ? *breakpoints_ : detail::empty_breakpoints();
  }
  const std::string& descriptor() const { return descriptor_; }
  bool valid() const { return static_cast<bool>(fn_); }

 private:
  PredictionRule(EvalFn fn, std::vector<double> bps, std::string descriptor)
      : fn_(std::move(fn)),
        breakpoints_(std::make_shared<const std::vector<double>>(std::move(bps))),
        descriptor_(std::move(descriptor)) {
    if (!fn_) throw std::invalid_argument("PredictionRule: empty callable");
  }

  static void require_label(int v) {
    if (v != 1 && v != -1) throw std::invalid_argument("PredictionRule: label must be -1 or +1");
  }

  EvalFn fn_;
  std::shared_ptr<const std::vector<double>> breakpoints_;
  std::string descriptor_;
};

/// Soft classifier X -> [-1, +1] (convex combinations of hard rules, clipped
/// decision functions). Values outside the range are a logic error, caught at
/// evaluation with a small floating-point slack.
class SoftClassifier {
 public:
  using EvalFn = std::function<double(std::span<const double>)>;

  static constexpr double kRangeSlack = 1e-9;

  explicit SoftClassifier(EvalFn fn, std::vector<double> sign_breakpoints = {})
      : fn_(std::move(fn)),
        breakpoints_(std::make_shared<const std::vector<double>>(std::move(sign_breakpoints))) {
    if (!fn_) throw std::invalid_argument("SoftClassifier: empty callable");
  }

  static SoftClassifier from_rule(const PredictionRule& r) {
    return SoftClassifier(
        [r](std::span<const double> x) { return static_cast<double>(r(x)); },
        r.sign_breakpoints());
  }

  double operator()(std::span<const double> x) const {
    double v = fn_(x);
    if (!(std::fabs(v) <= 1.0 + kRangeSlack))
      throw std::logic_error("SoftClassifier: |value| must be <= 1");
    return v;
  }

  double at(double x) const { return (*this)(std::span<const double>(&x, 1)); }

  const std::vector<double>& sign_breakpoints() const { return *breakpoints_; }

 private:
  EvalFn fn_;
  std::shared_ptr<const std::vector<double>> breakpoints_;
};

}  // namespace aew
