#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace aew {

struct OlsFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_std_error = std::numeric_limits<double>::quiet_NaN();  // needs n >= 3
  std::size_t n = 0;
};

inline OlsFit ols_fit(std::span<const double> xs, std::span<const double> ys) {
  const std::size_t n = xs.size();
  if (n != ys.size()) throw std::invalid_argument("ols_fit: length mismatch");
  if (n < 2) throw std::invalid_argument("ols_fit: needs at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("ols_fit: degenerate x values");
  OlsFit fit;
  fit.n = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (n >= 3) {
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
      rss += r * r;
    }
    fit.slope_std_error = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
  }
  return fit;
}

// least squares on (log x, log y); all coordinates must be positive
inline OlsFit loglog_fit(std::span<const double> xs, std::span<const double> ys) {
  const std::size_t n = xs.size();
  if (n != ys.size()) throw std::invalid_argument("loglog_fit: length mismatch");
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
      throw std::invalid_argument("loglog_fit: coordinates must be positive");
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  return ols_fit(lx, ly);
}

}  // namespace aew
