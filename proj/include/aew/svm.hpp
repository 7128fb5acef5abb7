#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstring>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "aew/dataset.hpp"
#include "aew/rules.hpp"
#include "aew/text.hpp"

namespace aew {

/// Gaussian RBF kernel K(x, x') = exp(-sigma^2 ||x - x'||^2); sigma is an
/// inverse width (large sigma = narrow kernel).
struct KernelSpec {
  double sigma = 1.0;

  void validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
      throw std::invalid_argument("KernelSpec: sigma must be positive and finite");
  }
};

inline double rbf_kernel(std::span<const double> a, std::span<const double> b, double sigma) {
  if (a.size() != b.size()) throw std::invalid_argument("rbf_kernel: dimension mismatch");
  double d2 = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    d2 += d * d;
  }
  return std::exp(-sigma * sigma * d2);
}

// row-major n x n Gram matrix; symmetric with unit diagonal by construction
inline std::vector<double> gram_matrix(const Dataset& data, const KernelSpec& kernel) {
  kernel.validate();
  const std::size_t n = data.size();
  std::vector<double> g(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = rbf_kernel(data.x(i), data.x(j), kernel.sigma);
      g[i * n + j] = v;
      g[j * n + i] = v;
    }
  }
  return g;
}

/// Dual objective 2 sum_i C_i y_i - sum_ij C_i C_j K_ij at a coefficient
/// vector (not necessarily optimal or feasible).
inline double dual_objective(std::span<const double> coeffs, const std::vector<double>& gram,
                             std::span<const int> labels) {
  const std::size_t n = coeffs.size();
  if (labels.size() != n || gram.size() != n * n)
    throw std::invalid_argument("dual_objective: size mismatch");
  double lin = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lin += coeffs[i] * labels[i];
    for (std::size_t j = 0; j < n; ++j) quad += coeffs[i] * coeffs[j] * gram[i * n + j];
  }
  return 2.0 * lin - quad;
}

struct SolveOptions {
  double tol = 1e-8;                          // convergence threshold on the KKT violation
  std::size_t max_updates_per_point = 10000;  // update cap is this times n
  // Test instrumentation: when set, the exact dual objective (recomputed from
  // scratch, O(n^2)) is appended after every coordinate update.
  std::vector<double>* objective_trace = nullptr;
};

/// Fitted kernel machine: decision function F(x) = sum_i C_i K(x_i, x) over
/// the training points, with the box constraint 0 <= 2 lambda C_i y_i <= 1/n.
class SvmModel {
 public:
  SvmModel(KernelSpec kernel, double lambda, std::vector<double> coeffs, Dataset support,
           double dual_value, double kkt, std::size_t updates, bool converged)
      : kernel_(kernel),
        lambda_(lambda),
        coeffs_(std::move(coeffs)),
        support_(std::move(support)),
        dual_value_(dual_value),
        kkt_(kkt),
        updates_(updates),
        converged_(converged) {
    kernel_.validate();
    if (!(lambda_ > 0.0) || !std::isfinite(lambda_))
      throw std::invalid_argument("SvmModel: lambda must be positive and finite");
    if (coeffs_.size() != support_.size())
      throw std::invalid_argument("SvmModel: coefficient/support size mismatch");
  }

  const KernelSpec& kernel() const { return kernel_; }
  double lambda() const { return lambda_; }
  const std::vector<double>& coeffs() const { return coeffs_; }
  const Dataset& support() const { return support_; }
  double dual_value() const { return dual_value_; }
  double kkt() const { return kkt_; }
  std::size_t updates() const { return updates_; }
  bool converged() const { return converged_; }

  // upper bound of the box in beta = C y coordinates
  double box_upper() const { return 1.0 / (2.0 * lambda_ * static_cast<double>(support_.size())); }

  double decision(std::span<const double> x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
      if (coeffs_[i] != 0.0) s += coeffs_[i] * rbf_kernel(support_.x(i), x, kernel_.sigma);
    return s;
  }

  double decision_at(double x) const { return decision(std::span<const double>(&x, 1)); }

  int classify(std::span<const double> x) const { return sign_pm1(decision(x)); }

  PredictionRule sign_rule() const;  // defined below (needs the scan helpers)

  std::string descriptor() const {
    return "svm(sigma=" + full_precision(kernel_.sigma) + ",lambda=" + full_precision(lambda_) + ")";
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["kind"] = "svm";
    j["sigma"] = kernel_.sigma;
    j["lambda"] = lambda_;
    nlohmann::json cs = nlohmann::json::array();
    for (double c : coeffs_) cs.push_back(full_precision(c));
    j["coeffs"] = std::move(cs);
    nlohmann::json xs = nlohmann::json::array();
    nlohmann::json ys = nlohmann::json::array();
    for (const auto& s : support_) {
      xs.push_back(s.x);
      ys.push_back(s.y);
    }
    j["support"] = {{"d", support_.dim()}, {"x", std::move(xs)}, {"y", std::move(ys)}};
    j["dual_value"] = dual_value_;
    j["kkt"] = kkt_;
    j["updates"] = updates_;
    j["converged"] = converged_;
    return j;
  }

  static SvmModel from_json(const nlohmann::json& j) {
    if (j.value("kind", "") != std::string("svm"))
      throw std::invalid_argument("SvmModel: json kind must be 'svm'");
    KernelSpec kernel{j.at("sigma").get<double>()};
    const double lambda = j.at("lambda").get<double>();
    std::vector<double> coeffs;
    for (const auto& c : j.at("coeffs")) coeffs.push_back(parse_finite_double(c.get<std::string>()));
    const auto& sup = j.at("support");
    const std::size_t d = sup.at("d").get<std::size_t>();
    const auto& xs = sup.at("x");
    const auto& ys = sup.at("y");
    if (xs.size() != ys.size()) throw std::invalid_argument("SvmModel: support x/y size mismatch");
    std::vector<LabeledSample> samples;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      LabeledSample s;
      s.x = xs[i].get<std::vector<double>>();
      if (s.x.size() != d) throw std::invalid_argument("SvmModel: support point dimension mismatch");
      s.y = ys[i].get<int>();
      samples.push_back(std::move(s));
    }
    return SvmModel(kernel, lambda, std::move(coeffs), Dataset(std::move(samples)),
                    j.at("dual_value").get<double>(), j.at("kkt").get<double>(),
                    j.at("updates").get<std::size_t>(), j.at("converged").get<bool>());
  }

 private:
  KernelSpec kernel_;
  double lambda_;
  std::vector<double> coeffs_;
  Dataset support_;
  double dual_value_;
  double kkt_;
  std::size_t updates_;
  bool converged_;
};

namespace detail {

/// Violation of the box-constrained first-order conditions at one coordinate:
// how far the gradient points into the feasible set. Zero at an optimum; also
// zero when the box is degenerate (U = 0) since no movement is possible.
inline double box_kkt_violation(double beta, double grad, double upper) {
  double v = 0.0;
  if (beta < upper) v = std::max(v, grad);
  if (beta > 0.0) v = std::max(v, -grad);
  return v;
}

struct ScanResult {
  std::size_t index = 0;
  double violation = 0.0;
};

// One solver sweep: grad -= c * qrow elementwise, then argmax of the box
// violations (first index on ties). c = 0 turns this into a pure rescan.
// This runs once per coordinate update, tens of millions of times per hard
// fit, so it is written against the compiler's vector extensions; widths
// follow whatever instruction set the build enables. The scalar tail and the
// lane merge preserve the exact first-index tie rule of the plain loop.
#if defined(__GNUC__) || defined(__clang__)
#if defined(__AVX512F__)
#define AEW_SOLVER_LANES 8
#elif defined(__AVX__)
#define AEW_SOLVER_LANES 4
#elif defined(__SSE2__) || defined(__aarch64__)
#define AEW_SOLVER_LANES 2
#endif
#endif

#ifdef AEW_SOLVER_LANES
typedef double SolverVec __attribute__((vector_size(sizeof(double) * AEW_SOLVER_LANES)));

inline SolverVec solver_load(const double* p) {
  SolverVec v;
  std::memcpy(&v, p, sizeof(v));
  return v;
}

inline ScanResult apply_step_and_scan(double* grad, const double* qrow, const double* beta,
                                      double c, double upper, std::size_t n) {
  constexpr std::size_t W = AEW_SOLVER_LANES;
  const SolverVec vc = c - SolverVec{};
  const SolverVec vupper = upper - SolverVec{};
  const SolverVec vzero{};
  SolverVec vmax{}, vidx{}, idx, step;
  for (std::size_t l = 0; l < W; ++l) {
    idx[l] = static_cast<double>(l);
    step[l] = static_cast<double>(W);
  }
  const std::size_t nv = n / W * W;
  for (std::size_t j = 0; j < nv; j += W) {
    const SolverVec g = solver_load(grad + j) - vc * solver_load(qrow + j);
    std::memcpy(grad + j, &g, sizeof(g));
    const SolverVec b = solver_load(beta + j);
    const SolverVec up = b < vupper ? g : vzero;
    const SolverVec dn = b > vzero ? -g : vzero;
    const SolverVec v = up > dn ? up : dn;
    const auto better = v > vmax;
    vmax = better ? v : vmax;
    vidx = better ? idx : vidx;
    idx += step;
  }
  ScanResult r;
  for (std::size_t l = 0; l < W; ++l) {
    const double v = vmax[l];
    const auto j = static_cast<std::size_t>(vidx[l]);
    if (v > r.violation || (v == r.violation && v > 0.0 && j < r.index)) {
      r.violation = v;
      r.index = j;
    }
  }
  for (std::size_t j = nv; j < n; ++j) {
    const double g = grad[j] - c * qrow[j];
    grad[j] = g;
    const double v = box_kkt_violation(beta[j], g, upper);
    if (v > r.violation) {  // tail indices exceed every vector index, ties keep the vector pick
      r.violation = v;
      r.index = j;
    }
  }
  return r;
}
#else
inline ScanResult apply_step_and_scan(double* grad, const double* qrow, const double* beta,
                                      double c, double upper, std::size_t n) {
  ScanResult r;
  for (std::size_t j = 0; j < n; ++j) {
    const double g = grad[j] - c * qrow[j];
    grad[j] = g;
    const double v = box_kkt_violation(beta[j], g, upper);
    if (v > r.violation) {
      r.violation = v;
      r.index = j;
    }
  }
  return r;
}
#endif

inline std::vector<double> uniform_grid(double lo, double hi, std::size_t points) {
  std::vector<double> xs(points);
  for (std::size_t k = 0; k < points; ++k)
    xs[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
  return xs;
}

// narrow kernels (large sigma) produce decision functions that wiggle at
// scale 1/sigma; scale the scan so bumps are not stepped over
inline std::size_t scan_points_for_sigma(double sigma) {
  const double wanted = 8.0 * sigma;
  return static_cast<std::size_t>(std::clamp(wanted, 2049.0, 16385.0));
}

/// Sign-change locations of a scalar function sampled on a grid, refined by
/// bisection on the function itself. Changes happening strictly between two
/// same-sign grid points are invisible; callers pick the grid density.
inline std::vector<double> refine_sign_changes(const std::function<double(double)>& f,
                                               std::span<const double> xs,
                                               std::span<const double> values) {
  std::vector<double> out;
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    if (sign_pm1(values[k]) == sign_pm1(values[k + 1])) continue;
    double lo = xs[k], hi = xs[k + 1];
    const int slo = sign_pm1(values[k]);
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (sign_pm1(f(mid)) == slo)
        lo = mid;
      else
        hi = mid;
    }
    out.push_back(0.5 * (lo + hi));
  }
  return out;
}

// Decision values of several coefficient vectors sharing one support set and
// kernel, at many 1-D points. Kernel columns are computed once per point, and
// the per-model accumulation mirrors SvmModel::decision exactly (ascending
// index, zero coefficients skipped), so results are bitwise identical to
// model-by-model evaluation.
inline std::vector<std::vector<double>> batched_decisions_1d(
    const Dataset& support, double sigma,
    const std::vector<const std::vector<double>*>& coeff_sets, std::span<const double> xs) {
  const std::size_t m = support.size();
  std::vector<std::vector<double>> values(coeff_sets.size(),
                                          std::vector<double>(xs.size(), 0.0));
  std::vector<double> col(m);
  for (std::size_t p = 0; p < xs.size(); ++p) {
    const std::span<const double> xp(&xs[p], 1);
    for (std::size_t i = 0; i < m; ++i) col[i] = rbf_kernel(support.x(i), xp, sigma);
    for (std::size_t mdl = 0; mdl < coeff_sets.size(); ++mdl) {
      const std::vector<double>& c = *coeff_sets[mdl];
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i)
        if (c[i] != 0.0) s += c[i] * col[i];
      values[mdl][p] = s;
    }
  }
  return values;
}

}  // namespace detail

inline PredictionRule SvmModel::sign_rule() const {
  std::vector<double> breakpoints;
  if (support_.dim() == 1) {
    const auto xs = detail::uniform_grid(-1.0, 1.0, detail::scan_points_for_sigma(kernel_.sigma));
    std::vector<double> values(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k) values[k] = decision_at(xs[k]);
    breakpoints = detail::refine_sign_changes([this](double x) { return decision_at(x); }, xs,
                                              values);
  }
  auto self = std::make_shared<const SvmModel>(*this);
  return PredictionRule::boxed(
      [self](std::span<const double> x) { return self->classify(x); }, std::move(breakpoints),
      descriptor());
}

/// Maximizes the dual 2 sum_i C_i y_i - sum_ij C_i C_j K_ij subject to
/// 0 <= 2 lambda C_i y_i <= 1/n by exact single-coordinate ascent.
///
/// Work happens in beta_i = C_i y_i in [0, U], U = 1/(2 lambda n), where the
/// objective is D(beta) = 2 sum beta - beta' Q beta with Q = (y y') * K. The
/// coordinate with the largest KKT violation is updated to its exact
/// conditional maximum, beta_i <- clip(beta_i + g_i / 2, 0, U) (the diagonal
/// of Q is 1), which never decreases D. There is no equality constraint, so
/// single-coordinate steps suffice for convergence. The running gradient is
/// updated incrementally and recomputed from scratch periodically and at
/// apparent convergence, so the reported violation never relies on drifted
/// values.
inline SvmModel solve_dual_with_gram(const Dataset& data, KernelSpec kernel, double lambda,
                                     const std::vector<double>& gram, SolveOptions options = {}) {
  kernel.validate();
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("solve_dual: lambda must be positive and finite");
  if (!(options.tol > 0.0)) throw std::invalid_argument("solve_dual: tol must be positive");
  const std::size_t n = data.size();
  if (gram.size() != n * n) throw std::invalid_argument("solve_dual: gram size mismatch");

  const double upper = 1.0 / (2.0 * lambda * static_cast<double>(n));
  std::vector<double> beta(n, 0.0);
  std::vector<double> grad(n, 2.0);  // g_i = 2 (1 - y_i F_i); F = 0 at the start
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = data.y(i);

  // The gradient math only ever sees y_i y_j K_ij, so fold the signs in once.
  // Exact: each entry changes at most sign.
  std::vector<double> q(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    const double yi = y[i];
    for (std::size_t j = 0; j < n; ++j) {
      const double k = gram[i * n + j];
      if (!std::isfinite(k)) throw std::invalid_argument("solve_dual: non-finite Gram entry");
      q[i * n + j] = k * (yi * y[j]);
    }
  }

  auto refresh_gradient = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      const double* row = &q[i * n];
      for (std::size_t j = 0; j < n; ++j) s += row[j] * beta[j];
      grad[i] = 2.0 - 2.0 * s;
    }
  };

  auto coeffs_from_beta = [&] {
    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = beta[i] * y[i];
    return c;
  };

  const std::size_t cap = options.max_updates_per_point * n;
  const std::size_t refresh_period = 64 * n;
  std::size_t updates = 0;
  bool gradient_fresh = true;

  auto rescan = [&] { return detail::apply_step_and_scan(grad.data(), q.data(), beta.data(), 0.0,
                                                         upper, n); };
  detail::ScanResult pick = rescan();
  while (true) {
    if (pick.violation <= options.tol) {
      if (gradient_fresh) break;
      refresh_gradient();  // rule out incremental drift before declaring victory
      gradient_fresh = true;
      pick = rescan();
      continue;
    }
    if (updates >= cap) break;

    const std::size_t i = pick.index;
    const double target = beta[i] + 0.5 * grad[i];
    const double nb = std::clamp(target, 0.0, upper);
    const double delta = nb - beta[i];
    if (delta == 0.0) break;  // unreachable for violations above rounding scale
    beta[i] = nb;
    ++updates;
    if (updates % refresh_period == 0) {
      refresh_gradient();
      gradient_fresh = true;
      pick = rescan();
    } else {
      pick = detail::apply_step_and_scan(grad.data(), &q[i * n], beta.data(), 2.0 * delta, upper,
                                         n);
      gradient_fresh = false;
    }
    if (options.objective_trace)
      options.objective_trace->push_back(dual_objective(coeffs_from_beta(), gram, y));
  }

  refresh_gradient();
  double kkt = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    kkt = std::max(kkt, detail::box_kkt_violation(beta[i], grad[i], upper));
  const std::vector<double> coeffs = coeffs_from_beta();
  const double dual = dual_objective(coeffs, gram, y);
  return SvmModel(kernel, lambda, coeffs, data, dual, kkt, updates, kkt <= options.tol);
}

inline SvmModel solve_dual(const Dataset& data, KernelSpec kernel, double lambda,
                           SolveOptions options = {}) {
  return solve_dual_with_gram(data, kernel, lambda, gram_matrix(data, kernel), options);
}

/// Largest first-order violation of a model's coefficients, recomputed from
/// scratch (fresh Gram matrix and gradient).
inline double kkt_violation(const SvmModel& model) {
  const Dataset& sup = model.support();
  const std::size_t n = sup.size();
  const std::vector<double> gram = gram_matrix(sup, model.kernel());
  const double upper = model.box_upper();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double q = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      q += gram[i * n + j] * (sup.y(i) * sup.y(j)) * model.coeffs()[j] * sup.y(j);
    const double grad = 2.0 - 2.0 * q;
    worst = std::max(worst, detail::box_kkt_violation(model.coeffs()[i] * sup.y(i), grad, upper));
  }
  return worst;
}

}  // namespace aew
