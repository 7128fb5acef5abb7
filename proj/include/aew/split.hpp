#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>

#include "aew/dataset.hpp"

namespace aew {

/// Deterministic split sizes: the last l points aggregate what the first m
/// points learn. l grows like a n / log n, clamped to keep both halves
/// non-trivial.
struct SplitPlan {
  std::size_t n = 0;
  double a = 1.0;
  std::size_t l = 0;  // aggregation part (suffix)
  std::size_t m = 0;  // estimation part (prefix), m = n - l
};

inline SplitPlan make_split_plan(std::size_t n, double a) {
  if (n < 4) throw std::invalid_argument("make_split_plan: n must be >= 4");
  if (!(a > 0.0) || !std::isfinite(a)) throw std::invalid_argument("make_split_plan: a must be positive");
  SplitPlan plan;
  plan.n = n;
  plan.a = a;
  const double raw = std::ceil(a * static_cast<double>(n) / std::log(static_cast<double>(n)));
  std::size_t l = static_cast<std::size_t>(raw);
  l = std::min(l, n / 2);
  l = std::max<std::size_t>(l, 1);
  plan.l = l;
  plan.m = n - l;
  return plan;
}

// (estimation prefix D_m, aggregation suffix D_l); order within each part is
// preserved, and concatenating them restores the input
inline std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double a) {
  const SplitPlan plan = make_split_plan(data.size(), a);
  return {data.head(plan.m), data.tail(plan.l)};
}

}  // namespace aew
