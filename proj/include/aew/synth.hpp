#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "aew/dataset.hpp"
#include "aew/quadrature.hpp"
#include "aew/rng.hpp"
#include "aew/rules.hpp"
#include "aew/stats.hpp"

namespace aew {

/// 1-D benchmark distribution with a tunable margin exponent alpha > 0:
///   X ~ Uniform[-1, 1],   P(Y = 1 | X = x) = (1 + sgn(x)|x|^{1/alpha}) / 2.
///
/// Everything interesting about it is closed-form:
///   margin  |2 eta(x) - 1| = |x|^{1/alpha},  so  P(|2 eta - 1| <= t) = t^alpha on [0,1]
///   optimal rule sign(x), optimal misclassification risk 1 / (2 (alpha + 1))
///   optimal hinge risk exactly twice that (the minimizer is hard and a.s. unique)
/// which makes it a self-contained oracle for risk and rate computations.
class SyntheticDist {
 public:
  explicit SyntheticDist(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
      throw std::invalid_argument("SyntheticDist: alpha must be positive and finite");
  }

  double alpha() const { return alpha_; }
  double lo() const { return -1.0; }
  double hi() const { return 1.0; }

  double eta(double x) const {
    const double ax = std::min(std::fabs(x), 1.0);
    const double r = std::pow(ax, 1.0 / alpha_);
    return x >= 0.0 ? 0.5 * (1.0 + r) : 0.5 * (1.0 - r);
  }

  double marginal_density(double x) const { return (x >= -1.0 && x <= 1.0) ? 0.5 : 0.0; }

  // P(|2 eta(X) - 1| <= t)
  double margin_cdf(double t) const {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return std::pow(t, alpha_);
  }

  double bayes_risk() const { return 0.5 / (alpha_ + 1.0); }
  double optimal_hinge_risk() const { return 2.0 * bayes_risk(); }

  PredictionRule bayes_rule() const {
    return PredictionRule::boxed([](std::span<const double> x) { return sign_pm1(x[0]); }, {0.0},
                                 "sign(x)");
  }

  /// i.i.d. sample of size n. Per point, the X draw comes first and then the
  /// label draw, so the stream layout is pinned and reproducible.
  Dataset sample(std::size_t n, std::uint64_t seed) const {
    if (n == 0) throw std::invalid_argument("SyntheticDist: sample size must be positive");
    Rng rng(seed);
    std::vector<LabeledSample> samples;
    samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = rng.uniform(-1.0, 1.0);
      const int y = rng.bernoulli(eta(x)) ? 1 : -1;
      samples.push_back({{x}, y});
    }
    return Dataset(std::move(samples));
  }

 private:
  double alpha_;
};

inline SyntheticDist make_margin_dist(double alpha) { return SyntheticDist(alpha); }

inline Dataset sample(const SyntheticDist& dist, std::size_t n, std::uint64_t seed) {
  return dist.sample(n, seed);
}

struct MarginDiagnostics {
  std::vector<double> t_grid;
  std::vector<double> cdf;
  double fitted_alpha = 0.0;
  double fitted_kappa = 0.0;  // (1 + fitted_alpha) / fitted_alpha
};

namespace detail {
inline void check_t_grid(const std::vector<double>& t_grid) {
  if (t_grid.size() < 2) throw std::invalid_argument("diagnostics: t grid needs >= 2 points");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > 0.0) || !(t_grid[i] <= 1.0))
      throw std::invalid_argument("diagnostics: t grid must lie in (0, 1]");
    if (i > 0 && !(t_grid[i] > t_grid[i - 1]))
      throw std::invalid_argument("diagnostics: t grid must be strictly increasing");
  }
}

inline MarginDiagnostics finish_margin_diagnostics(std::vector<double> t_grid,
                                                   std::vector<double> cdf) {
  // empirical CDFs can be zero at small t; fit over the positive part
  std::vector<double> ts, cs;
  for (std::size_t i = 0; i < t_grid.size(); ++i)
    if (cdf[i] > 0.0) {
      ts.push_back(t_grid[i]);
      cs.push_back(cdf[i]);
    }
  MarginDiagnostics d;
  d.t_grid = std::move(t_grid);
  d.cdf = std::move(cdf);
  if (ts.size() >= 2) {
    d.fitted_alpha = loglog_fit(ts, cs).slope;
    d.fitted_kappa = (1.0 + d.fitted_alpha) / d.fitted_alpha;
  } else {
    d.fitted_alpha = std::numeric_limits<double>::quiet_NaN();
    d.fitted_kappa = std::numeric_limits<double>::quiet_NaN();
  }
  return d;
}
}  // namespace detail

/// Margin behaviour from the exact CDF: log-log slope recovers alpha.
inline MarginDiagnostics margin_diagnostics(const SyntheticDist& dist,
                                            std::vector<double> t_grid) {
  detail::check_t_grid(t_grid);
  std::vector<double> cdf;
  cdf.reserve(t_grid.size());
  for (double t : t_grid) cdf.push_back(dist.margin_cdf(t));
  return detail::finish_margin_diagnostics(std::move(t_grid), std::move(cdf));
}

/// Same from an empirical sample: CDF of |2 eta(X_i) - 1| over the data.
inline MarginDiagnostics margin_diagnostics(const SyntheticDist& dist, const Dataset& data,
                                            std::vector<double> t_grid) {
  detail::check_t_grid(t_grid);
  std::vector<double> margins;
  margins.reserve(data.size());
  for (const auto& s : data) margins.push_back(std::fabs(2.0 * dist.eta(s.x[0]) - 1.0));
  std::vector<double> cdf;
  cdf.reserve(t_grid.size());
  for (double t : t_grid) {
    std::size_t c = 0;
    for (double m : margins)
      if (m <= t) ++c;
    cdf.push_back(static_cast<double>(c) / static_cast<double>(data.size()));
  }
  return detail::finish_margin_diagnostics(std::move(t_grid), std::move(cdf));
}

struct GeometricNoiseDiagnostics {
  std::vector<double> t_grid;
  std::vector<double> values;   // E[|2 eta(X) - 1| exp(-dist(X)^2 / t)], dist = distance to {eta = 1/2}
  double fitted_gamma = 0.0;    // small-t log-log slope equals gamma d0 / 2 with d0 = 1 here
  double c1_estimate = 0.0;     // max over the grid of value / t^{fitted slope}
};

/// Small-t decay of the noise-weighted Gaussian smoothing functional. For
/// this family the distance to the decision boundary is |x| and
///   v(t) = integral_0^1 x^{1/alpha} exp(-x^2 / t) dx,
/// whose log-log slope tends to (1 + 1/alpha)/2 as t -> 0, i.e. the
/// geometric noise exponent is gamma = (alpha + 1)/alpha in dimension 1.
inline GeometricNoiseDiagnostics geometric_noise_diagnostics(const SyntheticDist& dist,
                                                             std::vector<double> t_grid,
                                                             double small_t_max = 1e-2) {
  detail::check_t_grid(t_grid);
  const double inv_alpha = 1.0 / dist.alpha();
  GeometricNoiseDiagnostics d;
  d.t_grid = t_grid;
  d.values.reserve(t_grid.size());
  for (double t : t_grid) {
    auto integrand = [inv_alpha, t](double x) { return std::pow(x, inv_alpha) * std::exp(-x * x / t); };
    // the mass concentrates on a sqrt(t) neighbourhood of 0; seed the
    // subdivision there so tiny t stays cheap
    const double s = std::sqrt(t);
    std::vector<double> hints{std::min(1.0, s), std::min(1.0, 10.0 * s)};
    QuadOptions opt;
    opt.tol = 1e-12;
    d.values.push_back(integrate_piecewise(integrand, 0.0, 1.0, hints, opt));
  }

  std::vector<double> ts, vs;
  for (std::size_t i = 0; i < t_grid.size(); ++i)
    if (t_grid[i] <= small_t_max) {
      ts.push_back(t_grid[i]);
      vs.push_back(d.values[i]);
    }
  if (ts.size() < 2) {  // fall back to the two smallest grid points
    ts.assign(t_grid.begin(), t_grid.begin() + 2);
    vs.assign(d.values.begin(), d.values.begin() + 2);
  }
  const double slope = loglog_fit(ts, vs).slope;
  d.fitted_gamma = 2.0 * slope;
  d.c1_estimate = 0.0;
  for (std::size_t i = 0; i < t_grid.size(); ++i)
    d.c1_estimate = std::max(d.c1_estimate, d.values[i] / std::pow(t_grid[i], slope));
  return d;
}

}  // namespace aew
