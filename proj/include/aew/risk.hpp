#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "aew/dataset.hpp"
#include "aew/quadrature.hpp"
#include "aew/rules.hpp"
#include "aew/synth.hpp"

namespace aew {

inline double hinge_loss(double margin) { return std::max(0.0, 1.0 - margin); }

// fraction of points with y f(x) <= 0 (ties y f = 0 cannot occur for hard rules)
inline double empirical_risk(const PredictionRule& f, const Dataset& data) {
  std::size_t wrong = 0;
  for (const auto& s : data)
    if (s.y * f(s.x) <= 0) ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(data.size());
}

// For hard rules every hinge term is exactly 0 or 2, so this equals twice the
// misclassification rate with no rounding: the sum is an even integer.
inline double empirical_hinge_risk(const PredictionRule& f, const Dataset& data) {
  double sum = 0.0;
  for (const auto& s : data) sum += hinge_loss(static_cast<double>(s.y * f(s.x)));
  return sum / static_cast<double>(data.size());
}

inline double empirical_hinge_risk(const SoftClassifier& f, const Dataset& data) {
  double sum = 0.0;
  for (const auto& s : data) sum += hinge_loss(static_cast<double>(s.y) * f(s.x));
  return sum / static_cast<double>(data.size());
}

namespace detail {
inline std::vector<double> with_origin(const std::vector<double>& breakpoints) {
  // eta has a kink at 0 for every alpha; always split there
  std::vector<double> pts = breakpoints;
  pts.push_back(0.0);
  return pts;
}
}  // namespace detail

/// P(f(X) != Y) by quadrature: integrates density * (eta or 1 - eta according
/// to the predicted label). The rule's sign breakpoints seed the subdivision.
inline double expected_risk(const PredictionRule& f, const SyntheticDist& dist,
                            double tol = 1e-10) {
  auto integrand = [&](double x) {
    const double e = dist.eta(x);
    const double wrong_prob = f.at(x) == -1 ? e : 1.0 - e;
    return dist.marginal_density(x) * wrong_prob;
  };
  QuadOptions opt;
  opt.tol = tol;
  return integrate_piecewise(integrand, dist.lo(), dist.hi(),
                             detail::with_origin(f.sign_breakpoints()), opt);
}

/// E[(1 - Y f(X))_+] by quadrature; valid for any bounded f, hard or soft.
inline double expected_hinge_risk(const SoftClassifier& f, const SyntheticDist& dist,
                                  double tol = 1e-10) {
  auto integrand = [&](double x) {
    const double e = dist.eta(x);
    const double v = f.at(x);
    return dist.marginal_density(x) * (e * hinge_loss(v) + (1.0 - e) * hinge_loss(-v));
  };
  QuadOptions opt;
  opt.tol = tol;
  return integrate_piecewise(integrand, dist.lo(), dist.hi(),
                             detail::with_origin(f.sign_breakpoints()), opt);
}

inline double excess_risk(const PredictionRule& f, const SyntheticDist& dist, double tol = 1e-10) {
  return expected_risk(f, dist, tol) - dist.bayes_risk();
}

inline double excess_hinge_risk(const SoftClassifier& f, const SyntheticDist& dist,
                                double tol = 1e-10) {
  return expected_hinge_risk(f, dist, tol) - dist.optimal_hinge_risk();
}

struct McRiskEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

/// Monte-Carlo check of expected_risk; the standard error is the exact
/// binomial one, so |estimate - truth| <= 3 std_error is a fair 3-sigma test.
inline McRiskEstimate mc_expected_risk(const PredictionRule& f, const SyntheticDist& dist,
                                       std::size_t n, std::uint64_t seed) {
  const Dataset data = dist.sample(n, seed);
  McRiskEstimate est;
  est.n = n;
  est.estimate = empirical_risk(f, data);
  est.std_error = std::sqrt(std::max(est.estimate * (1.0 - est.estimate), 1e-12) /
                            static_cast<double>(n));
  return est;
}

}  // namespace aew
