#pragma once

#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "aew/text.hpp"

namespace aew {

// exponent resolution shared by both grids: Delta = l^{b0}, kept as a real
inline double grid_resolution(std::size_t l, double b0) {
  if (l < 2) throw std::invalid_argument("grid: l must be >= 2");
  if (!(b0 > 0.0) || !std::isfinite(b0)) throw std::invalid_argument("grid: b0 must be positive");
  return std::pow(static_cast<double>(l), b0);
}

struct LambdaGridEntry {
  int k;
  double phi;     // 1/2 + k / Delta
  double lambda;  // l^{-phi}
};

/// Geometric grid of regularization values lambda_k = l^{-(1/2 + k/Delta)},
/// k = 0 .. floor(3 Delta / 2), Delta = l^{b0}. Spacing 1/Delta in the
/// exponent guarantees some grid point lands within 1/Delta of any target
/// exponent in [1/2, 2].
struct LambdaGrid {
  std::size_t l = 0;
  double b0 = 0.0;
  double delta = 0.0;
  std::vector<LambdaGridEntry> entries;

  std::string to_csv() const {
    std::ostringstream out;
    out << "k,phi,lambda\n";
    for (const auto& e : entries)
      out << e.k << ',' << full_precision(e.phi) << ',' << full_precision(e.lambda) << '\n';
    return out.str();
  }
};

inline LambdaGrid lambda_grid(std::size_t l, double b0) {
  LambdaGrid g;
  g.l = l;
  g.b0 = b0;
  g.delta = grid_resolution(l, b0);
  const int k_max = static_cast<int>(std::floor(1.5 * g.delta));
  const double ld = static_cast<double>(l);
  for (int k = 0; k <= k_max; ++k) {
    const double phi = 0.5 + static_cast<double>(k) / g.delta;
    g.entries.push_back({k, phi, std::pow(ld, -phi)});
  }
  return g;
}

struct SigmaLambdaEntry {
  int p1;
  int p2;
  double phi;     // p1 / (2 Delta)
  double psi;     // p2 / Delta + 1/2
  double sigma;   // l^{phi / d0}
  double lambda;  // l^{-psi}
};

/// Product grid over kernel width and regularization:
///   (phi, psi) = (p1 / (2 Delta), p2 / Delta + 1/2),
///   p1 = 1 .. 2 floor(Delta), p2 = 1 .. floor(Delta / 2),
///   (sigma, lambda) = (l^{phi / d0}, l^{-psi}).
/// Entries are ordered p1-major, so runs sharing a sigma are contiguous.
struct SigmaLambdaGrid {
  std::size_t l = 0;
  double b0 = 0.0;
  int d0 = 0;
  double delta = 0.0;
  std::vector<SigmaLambdaEntry> entries;

  std::string to_csv() const {
    std::ostringstream out;
    out << "p1,p2,phi,psi,sigma,lambda\n";
    for (const auto& e : entries)
      out << e.p1 << ',' << e.p2 << ',' << full_precision(e.phi) << ',' << full_precision(e.psi)
          << ',' << full_precision(e.sigma) << ',' << full_precision(e.lambda) << '\n';
    return out.str();
  }
};

inline SigmaLambdaGrid sigma_lambda_grid(std::size_t l, double b0, int d0) {
  if (d0 < 1) throw std::invalid_argument("sigma_lambda_grid: d0 must be >= 1");
  SigmaLambdaGrid g;
  g.l = l;
  g.b0 = b0;
  g.d0 = d0;
  g.delta = grid_resolution(l, b0);
  const int p1_max = 2 * static_cast<int>(std::floor(g.delta));
  const int p2_max = static_cast<int>(std::floor(0.5 * g.delta));
  if (p2_max < 1)
    throw std::invalid_argument("sigma_lambda_grid: resolution too coarse (l^b0 < 2), grid empty");
  const double ld = static_cast<double>(l);
  for (int p1 = 1; p1 <= p1_max; ++p1) {
    const double phi = static_cast<double>(p1) / (2.0 * g.delta);
    const double sigma = std::pow(ld, phi / static_cast<double>(d0));
    for (int p2 = 1; p2 <= p2_max; ++p2) {
      const double psi = static_cast<double>(p2) / g.delta + 0.5;
      g.entries.push_back({p1, p2, phi, psi, sigma, std::pow(ld, -psi)});
    }
  }
  return g;
}

/// Inputs for the closed-form choices below: margin exponent alpha, member
/// complexity/approximation exponents (p, beta) for the fixed-width case, and
/// geometric noise exponent gamma with ambient dimension d0 for the Gaussian
/// case.
struct TheoryParams {
  double alpha = 1.0;
  double beta = 0.0;
  double p = 0.0;
  double gamma = 0.0;
  int d0 = 1;
};

inline double kappa_from_alpha(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("kappa_from_alpha: alpha must be positive");
  return (1.0 + alpha) / alpha;
}

/// Regularization for a kernel of fixed width with complexity exponent
/// p in (0, 2) and approximation exponent beta in (0, 1]:
///   lambda_n = n^{-4 (alpha + 1) / ((2 alpha + p alpha + 4)(1 + beta))}.
inline double theory_lambda_ab(std::size_t n, double alpha, double beta, double p) {
  if (n < 1) throw std::invalid_argument("theory_lambda_ab: n must be >= 1");
  if (!(alpha > 0.0)) throw std::invalid_argument("theory_lambda_ab: alpha must be positive");
  if (!(beta > 0.0 && beta <= 1.0))
    throw std::invalid_argument("theory_lambda_ab: beta must be in (0, 1]");
  if (!(p > 0.0 && p < 2.0)) throw std::invalid_argument("theory_lambda_ab: p must be in (0, 2)");
  const double expo = 4.0 * (alpha + 1.0) / ((2.0 * alpha + p * alpha + 4.0) * (1.0 + beta));
  return std::pow(static_cast<double>(n), -expo);
}

/// Excess-risk rate exponent for a fixed-width kernel machine run at
/// theory_lambda_ab's regularization: 4 beta (alpha + 1) / ((2 alpha +
/// p alpha + 4)(1 + beta)).
inline double theory_rate_ab_exponent(double alpha, double beta, double p) {
  if (!(alpha > 0.0)) throw std::invalid_argument("theory_rate_ab_exponent: alpha must be positive");
  if (!(beta > 0.0 && beta <= 1.0))
    throw std::invalid_argument("theory_rate_ab_exponent: beta must be in (0, 1]");
  if (!(p > 0.0 && p < 2.0))
    throw std::invalid_argument("theory_rate_ab_exponent: p must be in (0, 2)");
  return 4.0 * beta * (alpha + 1.0) / ((2.0 * alpha + p * alpha + 4.0) * (1.0 + beta));
}

namespace detail {
inline void check_alpha_gamma(double alpha, double gamma) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
}
}  // namespace detail

/// Regularization and width for a Gaussian kernel under geometric noise
/// exponent gamma. Two regimes split at gamma = (alpha + 2) / (2 alpha);
/// the exponents agree at the boundary, both equal to
/// (3 alpha + 2) / (4 (alpha + 1)).
inline std::pair<double, double> theory_lambda_sigma_gauss(std::size_t n, double alpha,
                                                           double gamma, int d0) {
  detail::check_alpha_gamma(alpha, gamma);
  if (n < 1) throw std::invalid_argument("theory_lambda_sigma_gauss: n must be >= 1");
  if (d0 < 1) throw std::invalid_argument("theory_lambda_sigma_gauss: d0 must be >= 1");
  const double boundary = (alpha + 2.0) / (2.0 * alpha);
  double expo;
  if (gamma <= boundary)
    expo = (gamma + 1.0) / (2.0 * gamma + 1.0);
  else
    expo = 2.0 * (gamma + 1.0) * (alpha + 1.0) /
           (2.0 * gamma * (alpha + 2.0) + 3.0 * alpha + 4.0);
  const double lambda = std::pow(static_cast<double>(n), -expo);
  const double sigma = std::pow(lambda, -1.0 / ((gamma + 1.0) * static_cast<double>(d0)));
  return {lambda, sigma};
}

/// Excess-risk rate n^{-kappa / (2 kappa + rho - 1)} for margin parameter
/// kappa >= 1 and complexity exponent rho in (0, 1).
inline double theory_rate(std::size_t n, double kappa, double rho) {
  if (n < 1) throw std::invalid_argument("theory_rate: n must be >= 1");
  if (!(kappa >= 1.0)) throw std::invalid_argument("theory_rate: kappa must be >= 1");
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("theory_rate: rho must be in (0, 1)");
  return std::pow(static_cast<double>(n), -kappa / (2.0 * kappa + rho - 1.0));
}

/// Excess-risk rate exponent for the Gaussian-kernel machine under margin
/// exponent alpha and geometric noise exponent gamma (two regimes, continuous
/// at the boundary).
inline double theory_rate_gauss_exponent(double alpha, double gamma) {
  detail::check_alpha_gamma(alpha, gamma);
  const double boundary = (alpha + 2.0) / (2.0 * alpha);
  if (gamma <= boundary) return gamma / (2.0 * gamma + 1.0);
  return 2.0 * gamma * (alpha + 1.0) / (2.0 * gamma * (alpha + 2.0) + 3.0 * alpha + 4.0);
}

inline double theory_rate_gauss(std::size_t n, double alpha, double gamma) {
  if (n < 1) throw std::invalid_argument("theory_rate_gauss: n must be >= 1");
  return std::pow(static_cast<double>(n), -theory_rate_gauss_exponent(alpha, gamma));
}

}  // namespace aew
