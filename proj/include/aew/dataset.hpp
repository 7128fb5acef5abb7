#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "aew/text.hpp"

namespace aew {

struct LabeledSample {
  std::vector<double> x;
  int y;  // -1 or +1
};

/// Ordered labeled sample; every point shares one feature dimension, labels
/// are hard (+1/-1) and features are finite. Order matters: prefix-based
/// procedures (recursive aggregation, sample splitting) read it as given.
class Dataset {
 public:
  explicit Dataset(std::vector<LabeledSample> samples) : samples_(std::move(samples)) {
    if (samples_.empty()) throw std::invalid_argument("Dataset: empty sample");
    dim_ = samples_[0].x.size();
    if (dim_ == 0) throw std::invalid_argument("Dataset: zero-dimensional features");
    for (const auto& s : samples_) {
      if (s.x.size() != dim_) throw std::invalid_argument("Dataset: inconsistent feature dimension");
      if (s.y != 1 && s.y != -1) throw std::invalid_argument("Dataset: label must be -1 or +1");
      for (double v : s.x)
        if (!std::isfinite(v)) throw std::invalid_argument("Dataset: non-finite feature value");
    }
  }

  std::size_t size() const { return samples_.size(); }
  std::size_t dim() const { return dim_; }
  const LabeledSample& operator[](std::size_t i) const { return samples_[i]; }
  std::span<const double> x(std::size_t i) const { return samples_[i].x; }
  int y(std::size_t i) const { return samples_[i].y; }
  auto begin() const { return samples_.begin(); }
  auto end() const { return samples_.end(); }
  const std::vector<LabeledSample>& samples() const { return samples_; }

  Dataset head(std::size_t count) const {
    check_count(count);
    return Dataset(std::vector<LabeledSample>(samples_.begin(), samples_.begin() + count));
  }

  Dataset tail(std::size_t count) const {
    check_count(count);
    return Dataset(std::vector<LabeledSample>(samples_.end() - count, samples_.end()));
  }

 private:
  void check_count(std::size_t count) const {
    if (count == 0 || count > samples_.size())
      throw std::invalid_argument("Dataset: slice count out of range");
  }

  std::vector<LabeledSample> samples_;
  std::size_t dim_ = 0;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace detail

/// CSV layout: header `x1,...,xd,y`, one row per point, label column last and
/// literally `1` or `-1`. Any NaN/Inf feature or malformed label is an error.
inline Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("dataset csv: missing header");
  detail::strip_cr(line);
  auto header = detail::split_csv_line(line);
  if (header.size() < 2 || header.back() != "y")
    throw std::invalid_argument("dataset csv: header must be x1,...,xd,y");
  const std::size_t dim = header.size() - 1;
  for (std::size_t k = 0; k < dim; ++k)
    if (header[k] != "x" + std::to_string(k + 1))
      throw std::invalid_argument("dataset csv: header must be x1,...,xd,y");

  std::vector<LabeledSample> samples;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    detail::strip_cr(line);
    if (line.empty()) continue;  // tolerate a trailing blank line
    auto fields = detail::split_csv_line(line);
    if (fields.size() != dim + 1)
      throw std::invalid_argument("dataset csv: row " + std::to_string(row) + " has wrong field count");
    LabeledSample s;
    s.x.reserve(dim);
    for (std::size_t k = 0; k < dim; ++k) s.x.push_back(parse_finite_double(fields[k]));
    const std::string& lab = fields[dim];
    if (lab == "1")
      s.y = 1;
    else if (lab == "-1")
      s.y = -1;
    else
      throw std::invalid_argument("dataset csv: row " + std::to_string(row) + " label must be 1 or -1");
    samples.push_back(std::move(s));
  }
  return Dataset(std::move(samples));
}

inline Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset csv: " + path);
  return read_dataset_csv(in);
}

inline void write_dataset_csv(const Dataset& data, std::ostream& out) {
  for (std::size_t k = 1; k <= data.dim(); ++k) out << 'x' << k << ',';
  out << "y\n";
  for (const auto& s : data) {
    for (double v : s.x) out << full_precision(v) << ',';
    out << (s.y == 1 ? "1" : "-1") << '\n';
  }
}

inline void write_dataset_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset csv: " + path);
  write_dataset_csv(data, out);
}

}  // namespace aew
