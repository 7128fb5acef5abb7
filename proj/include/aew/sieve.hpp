#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "aew/dataset.hpp"
#include "aew/rules.hpp"

namespace aew {

/// Axis-aligned box, the domain carved into dyadic cells.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  static Box unit(std::size_t dims) {
    return Box{std::vector<double>(dims, 0.0), std::vector<double>(dims, 1.0)};
  }
  static Box symmetric(std::size_t dims) {  // [-1, 1]^d
    return Box{std::vector<double>(dims, -1.0), std::vector<double>(dims, 1.0)};
  }

  std::size_t dims() const { return lo.size(); }

  void validate() const {
    if (lo.empty() || lo.size() != hi.size()) throw std::invalid_argument("Box: bad shape");
    for (std::size_t k = 0; k < lo.size(); ++k) {
      if (!std::isfinite(lo[k]) || !std::isfinite(hi[k]) || !(lo[k] < hi[k]))
        throw std::invalid_argument("Box: requires finite lo < hi per axis");
    }
  }
};

/// Histogram classifier on 2^{depth * d} congruent dyadic cells of a box,
/// one hard label per cell. Points outside the box are clamped to the nearest
/// cell, so the rule is total on R^d.
class DyadicPartitionRule {
 public:
  // labels vector of 2^{depth d} entries would exceed this otherwise
  static constexpr std::size_t kMaxCells = std::size_t{1} << 20;

  DyadicPartitionRule(int depth, Box box, std::vector<std::int8_t> cell_labels)
      : depth_(depth), box_(std::move(box)) {
    box_.validate();
    if (depth < 0) throw std::invalid_argument("DyadicPartitionRule: negative depth");
    const std::size_t want = cell_count(depth, box_.dims());
    if (cell_labels.size() != want)
      throw std::invalid_argument("DyadicPartitionRule: label count must be 2^(depth*d)");
    for (std::int8_t v : cell_labels)
      if (v != 1 && v != -1)
        throw std::invalid_argument("DyadicPartitionRule: cell labels must be -1 or +1");
    labels_ = std::make_shared<const std::vector<std::int8_t>>(std::move(cell_labels));
  }

  static std::size_t cell_count(int depth, std::size_t dims) {
    const std::size_t bits = static_cast<std::size_t>(depth) * dims;
    if (bits >= 21)  // 2^bits > kMaxCells
      throw std::invalid_argument("DyadicPartitionRule: more than 2^20 cells");
    return std::size_t{1} << bits;
  }

  int depth() const { return depth_; }
  std::size_t dims() const { return box_.dims(); }
  const Box& box() const { return box_; }
  std::size_t cells() const { return labels_->size(); }
  const std::vector<std::int8_t>& cell_labels() const { return *labels_; }

  std::size_t cell_index(std::span<const double> x) const {
    if (x.size() != box_.dims())
      throw std::invalid_argument("DyadicPartitionRule: dimension mismatch");
    const std::size_t side = std::size_t{1} << depth_;
    std::size_t idx = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double t = (x[k] - box_.lo[k]) / (box_.hi[k] - box_.lo[k]);
      double cell = std::floor(t * static_cast<double>(side));
      if (cell < 0.0) cell = 0.0;  // clamp points outside the box
      if (cell > static_cast<double>(side - 1)) cell = static_cast<double>(side - 1);
      idx = idx * side + static_cast<std::size_t>(cell);
    }
    return idx;
  }

  int evaluate(std::span<const double> x) const { return (*labels_)[cell_index(x)]; }

  PredictionRule as_rule() const {
    std::vector<double> breakpoints;
    if (box_.dims() == 1) {
      const std::size_t side = std::size_t{1} << depth_;
      for (std::size_t c = 1; c < side; ++c)
        breakpoints.push_back(box_.lo[0] + (box_.hi[0] - box_.lo[0]) * static_cast<double>(c) /
                                               static_cast<double>(side));
    }
    auto self = std::make_shared<const DyadicPartitionRule>(*this);
    return PredictionRule::boxed(
        [self](std::span<const double> x) { return self->evaluate(x); }, std::move(breakpoints),
        "dyadic(depth=" + std::to_string(depth_) + ")");
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["kind"] = "dyadic_partition";
    j["depth"] = depth_;
    j["box"] = {{"lo", box_.lo}, {"hi", box_.hi}};
    // run-length encoded labels: [[count, label], ...]
    nlohmann::json runs = nlohmann::json::array();
    std::size_t i = 0;
    const auto& labels = *labels_;
    while (i < labels.size()) {
      std::size_t j2 = i;
      while (j2 < labels.size() && labels[j2] == labels[i]) ++j2;
      runs.push_back({j2 - i, static_cast<int>(labels[i])});
      i = j2;
    }
    j["cell_labels"] = std::move(runs);
    return j;
  }

  static DyadicPartitionRule from_json(const nlohmann::json& j) {
    if (j.value("kind", "") != std::string("dyadic_partition"))
      throw std::invalid_argument("DyadicPartitionRule: json kind must be 'dyadic_partition'");
    Box box{j.at("box").at("lo").get<std::vector<double>>(),
            j.at("box").at("hi").get<std::vector<double>>()};
    std::vector<std::int8_t> labels;
    for (const auto& run : j.at("cell_labels")) {
      const std::size_t count = run.at(0).get<std::size_t>();
      const int label = run.at(1).get<int>();
      if (labels.size() + count > kMaxCells)
        throw std::invalid_argument("DyadicPartitionRule: run-length data too large");
      labels.insert(labels.end(), count, static_cast<std::int8_t>(label));
    }
    return DyadicPartitionRule(j.at("depth").get<int>(), std::move(box), std::move(labels));
  }

 private:
  int depth_;
  Box box_;
  std::shared_ptr<const std::vector<std::int8_t>> labels_;
};

/// Empirical risk minimizer over all labelings of the depth-j partition:
/// per-cell majority vote. Empty cells and exact ties get +1, so the result
/// is deterministic and independent of data order.
inline DyadicPartitionRule erm_over_partition(const Dataset& data, int depth, const Box& box) {
  box.validate();
  if (box.dims() != data.dim())
    throw std::invalid_argument("erm_over_partition: box/data dimension mismatch");
  if (depth < 0) throw std::invalid_argument("erm_over_partition: negative depth");
  const std::size_t cells = DyadicPartitionRule::cell_count(depth, box.dims());

  // counting needs a throwaway rule only for cell_index; labels are interim
  DyadicPartitionRule probe(depth, box, std::vector<std::int8_t>(cells, 1));
  std::vector<std::uint32_t> pos(cells, 0), neg(cells, 0);
  for (const auto& s : data) {
    const std::size_t c = probe.cell_index(s.x);
    if (s.y == 1)
      ++pos[c];
    else
      ++neg[c];
  }
  std::vector<std::int8_t> labels(cells);
  for (std::size_t c = 0; c < cells; ++c) labels[c] = pos[c] >= neg[c] ? 1 : -1;
  return DyadicPartitionRule(depth, box, std::move(labels));
}

/// Partition ERM at every depth 0..max_depth: a nested family whose empirical
/// risk is non-increasing in depth (refining a cell never hurts the majority
/// vote) while complexity grows, the raw material for aggregation.
inline std::vector<DyadicPartitionRule> sieve_ladder(const Dataset& data, int max_depth,
                                                     const Box& box) {
  if (max_depth < 0) throw std::invalid_argument("sieve_ladder: negative max depth");
  std::vector<DyadicPartitionRule> ladder;
  ladder.reserve(static_cast<std::size_t>(max_depth) + 1);
  for (int j = 0; j <= max_depth; ++j) ladder.push_back(erm_over_partition(data, j, box));
  return ladder;
}

// default ladder height: ceil(log2(m) / d), deep enough that the finest
// partition can interpolate a typical sample of size m
inline int default_ladder_depth(std::size_t m, std::size_t dims) {
  if (m == 0 || dims == 0) throw std::invalid_argument("default_ladder_depth: bad arguments");
  const int j = static_cast<int>(std::ceil(std::log2(static_cast<double>(m)) / static_cast<double>(dims)));
  const int cap = static_cast<int>(20 / dims);  // keep 2^{j d} within kMaxCells
  return std::min(std::max(j, 0), cap);
}

}  // namespace aew
