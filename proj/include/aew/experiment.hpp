#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "aew/grids.hpp"
#include "aew/parallel.hpp"
#include "aew/pipelines.hpp"
#include "aew/risk.hpp"
#include "aew/rng.hpp"
#include "aew/stats.hpp"
#include "aew/synth.hpp"
#include "aew/text.hpp"

namespace aew {

enum class PipelineTag { sieve, svm_lambda, svm_sigma_lambda, recursive, split_average };

inline const char* to_string(PipelineTag t) {
  switch (t) {
    case PipelineTag::sieve: return "sieve";
    case PipelineTag::svm_lambda: return "svm-lambda";
    case PipelineTag::svm_sigma_lambda: return "svm-sigma-lambda";
    case PipelineTag::recursive: return "recursive";
    case PipelineTag::split_average: return "split-average";
  }
  throw std::logic_error("PipelineTag: bad value");
}

inline PipelineTag pipeline_tag_from_string(const std::string& s) {
  if (s == "sieve") return PipelineTag::sieve;
  if (s == "svm-lambda") return PipelineTag::svm_lambda;
  if (s == "svm-sigma-lambda" || s == "svm-grid") return PipelineTag::svm_sigma_lambda;
  if (s == "recursive") return PipelineTag::recursive;
  if (s == "split-average") return PipelineTag::split_average;
  throw std::invalid_argument("unknown pipeline tag '" + s + "'");
}

/// One rate study: a pipeline run over a grid of sample sizes with R
/// replications each, against the synthetic margin family.
struct ExperimentConfig {
  PipelineTag pipeline = PipelineTag::sieve;
  double alpha = 1.0;
  std::vector<std::size_t> sizes;
  std::size_t replications = 1;
  std::uint64_t seed = 0;

  double a = 1.0;       // split ratio knob
  double b0 = 0.4;      // grid resolution knob
  int d0 = 1;           // ambient dimension for the sigma grid
  double sigma = 4.0;   // fixed kernel width for the lambda-only pipeline
  int max_depth = -1;   // partition ladder height; -1 = default per size
  std::size_t splits = 5;  // split-average only

  // optional theory inputs for the reported comparison exponent
  double rho = 0.0;   // complexity exponent of the base class (0 = limit case)
  double p = 0.0;     // complexity exponent of the kernel, 0 = unknown
  double beta = 0.0;  // approximation exponent, 0 = unknown

  std::string out_csv;      // optional output paths
  std::string out_summary;

  void validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
      throw std::invalid_argument("ExperimentConfig: alpha must be positive");
    if (sizes.empty()) throw std::invalid_argument("ExperimentConfig: sizes must be non-empty");
    for (std::size_t n : sizes)
      if (n < 8) throw std::invalid_argument("ExperimentConfig: every size must be >= 8");
    if (replications < 1) throw std::invalid_argument("ExperimentConfig: replications must be >= 1");
    if (!(a > 0.0)) throw std::invalid_argument("ExperimentConfig: a must be positive");
    if (!(b0 > 0.0)) throw std::invalid_argument("ExperimentConfig: b0 must be positive");
    if (d0 < 1) throw std::invalid_argument("ExperimentConfig: d0 must be >= 1");
    if (!(sigma > 0.0)) throw std::invalid_argument("ExperimentConfig: sigma must be positive");
    if (splits < 1) throw std::invalid_argument("ExperimentConfig: splits must be >= 1");
    if (!(rho >= 0.0 && rho < 1.0))
      throw std::invalid_argument("ExperimentConfig: rho must be in [0, 1)");
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["pipeline"] = to_string(pipeline);
    j["alpha"] = alpha;
    j["sizes"] = sizes;
    j["replications"] = replications;
    j["seed"] = seed;
    j["a"] = a;
    j["b0"] = b0;
    j["d0"] = d0;
    j["sigma"] = sigma;
    j["max_depth"] = max_depth;
    j["splits"] = splits;
    j["rho"] = rho;
    j["p"] = p;
    j["beta"] = beta;
    if (!out_csv.empty()) j["out_csv"] = out_csv;
    if (!out_summary.empty()) j["out_summary"] = out_summary;
    return j;
  }

  static ExperimentConfig from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    c.pipeline = pipeline_tag_from_string(j.at("pipeline").get<std::string>());
    c.alpha = j.at("alpha").get<double>();
    c.sizes = j.at("sizes").get<std::vector<std::size_t>>();
    c.replications = j.at("replications").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.a = j.value("a", c.a);
    c.b0 = j.value("b0", c.b0);
    c.d0 = j.value("d0", c.d0);
    c.sigma = j.value("sigma", c.sigma);
    c.max_depth = j.value("max_depth", c.max_depth);
    c.splits = j.value("splits", c.splits);
    c.rho = j.value("rho", c.rho);
    c.p = j.value("p", c.p);
    c.beta = j.value("beta", c.beta);
    c.out_csv = j.value("out_csv", std::string());
    c.out_summary = j.value("out_summary", std::string());
    c.validate();
    return c;
  }
};

struct RunRecord {
  std::size_t n = 0;
  std::size_t replication = 0;
  double excess_risk = 0.0;
  double min_member_excess = 0.0;
  double weights_entropy = 0.0;
  bool ok = false;
  std::string error;
};

struct SizeSummary {
  std::size_t n = 0;
  std::size_t ok_count = 0;
  double mean_excess = 0.0;
  double std_error = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<RunRecord> records;  // size-major, replication-minor, fixed order
  std::vector<SizeSummary> per_size;
  std::size_t failed = 0;

  bool has_slope = false;
  double slope = 0.0;
  bool has_slope_ci = false;
  double slope_std_error = 0.0;
  double slope_ci_lo = 0.0;
  double slope_ci_hi = 0.0;

  bool has_theory_exponent = false;
  double theory_exponent = 0.0;

  // rows for failed replications are omitted; the summary carries the count
  std::string to_csv() const {
    std::ostringstream out;
    out << "pipeline,n,replication,excess_risk,min_member_excess,weights_entropy\n";
    for (const auto& r : records) {
      if (!r.ok) continue;
      out << to_string(config.pipeline) << ',' << r.n << ',' << r.replication << ','
          << full_precision(r.excess_risk) << ',' << full_precision(r.min_member_excess) << ','
          << full_precision(r.weights_entropy) << '\n';
    }
    return out.str();
  }

  nlohmann::json summary_json() const {
    nlohmann::json j;
    j["pipeline"] = to_string(config.pipeline);
    j["alpha"] = config.alpha;
    j["seed"] = config.seed;
    j["replications"] = config.replications;
    j["sizes"] = config.sizes;
    j["failed_replications"] = failed;
    nlohmann::json per = nlohmann::json::array();
    for (const auto& s : per_size) {
      per.push_back({{"n", s.n},
                     {"count", s.ok_count},
                     {"mean_excess", s.mean_excess},
                     {"std_error", s.std_error}});
    }
    j["per_n"] = std::move(per);
    j["slope"] = has_slope ? nlohmann::json(slope) : nlohmann::json(nullptr);
    j["slope_ci"] = has_slope_ci ? nlohmann::json({slope_ci_lo, slope_ci_hi})
                                 : nlohmann::json(nullptr);
    j["theory_exponent"] =
        has_theory_exponent ? nlohmann::json(theory_exponent) : nlohmann::json(nullptr);
    return j;
  }
};

namespace detail {

inline PipelineResult run_pipeline_once(const ExperimentConfig& cfg, const Dataset& data) {
  const Box box = Box::symmetric(1);
  switch (cfg.pipeline) {
    case PipelineTag::sieve:
      return pipeline_sieve(data, cfg.a, cfg.max_depth, box, AggregateKind::aew);
    case PipelineTag::recursive:
      return pipeline_sieve(data, cfg.a, cfg.max_depth, box, AggregateKind::recursive);
    case PipelineTag::svm_lambda:
      return pipeline_svm_lambda(data, cfg.a, cfg.b0, cfg.sigma);
    case PipelineTag::svm_sigma_lambda:
      return pipeline_svm_sigma_lambda(data, cfg.a, cfg.b0, cfg.d0);
    case PipelineTag::split_average:
      return pipeline_split_average(data, cfg.a, cfg.max_depth, box, cfg.splits);
  }
  throw std::logic_error("run_pipeline_once: bad pipeline tag");
}

inline void fill_theory_exponent(ExperimentResult& res) {
  const ExperimentConfig& cfg = res.config;
  switch (cfg.pipeline) {
    case PipelineTag::sieve:
    case PipelineTag::recursive:
    case PipelineTag::split_average: {
      // kappa / (2 kappa + rho - 1); rho = 0 reports the low-complexity limit
      const double kappa = kappa_from_alpha(cfg.alpha);
      res.theory_exponent = kappa / (2.0 * kappa + cfg.rho - 1.0);
      res.has_theory_exponent = true;
      return;
    }
    case PipelineTag::svm_sigma_lambda: {
      // this synthetic family has geometric noise exponent (alpha + 1)/alpha
      const double gamma = (cfg.alpha + 1.0) / cfg.alpha;
      res.theory_exponent = theory_rate_gauss_exponent(cfg.alpha, gamma);
      res.has_theory_exponent = true;
      return;
    }
    case PipelineTag::svm_lambda: {
      // needs the kernel complexity/approximation pair; absent unless given
      if (cfg.p > 0.0 && cfg.beta > 0.0) {
        res.theory_exponent = theory_rate_ab_exponent(cfg.alpha, cfg.beta, cfg.p);
        res.has_theory_exponent = true;
      }
      return;
    }
  }
}

}  // namespace detail

/// Runs the full grid of (size, replication) tasks. Each task samples its own
/// substream (stream id = size index * R + replication), so results are
/// byte-identical for any worker count. A replication that throws is recorded
/// and skipped; more than 10% failures abort the experiment.
inline ExperimentResult run_rate_experiment(const ExperimentConfig& cfg, unsigned workers = 1) {
  cfg.validate();
  const SyntheticDist dist(cfg.alpha);
  const std::size_t tasks = cfg.sizes.size() * cfg.replications;

  ExperimentResult res;
  res.config = cfg;
  res.records.resize(tasks);

  parallel_for(tasks, workers, [&](std::size_t t) {
    const std::size_t size_index = t / cfg.replications;
    const std::size_t rep = t % cfg.replications;
    RunRecord& rec = res.records[t];
    rec.n = cfg.sizes[size_index];
    rec.replication = rep;
    try {
      const Dataset data = dist.sample(rec.n, Rng::substream_seed(cfg.seed, t));
      const PipelineResult pr = detail::run_pipeline_once(cfg, data);
      rec.excess_risk = excess_risk(pr.model.sign_rule(), dist);
      double best = std::numeric_limits<double>::infinity();
      for (const auto& rule : pr.model.rules())
        best = std::min(best, excess_risk(rule, dist));
      rec.min_member_excess = best;
      rec.weights_entropy = pr.model.weights().entropy();
      rec.ok = true;
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.error = e.what();
    }
  });

  for (const auto& r : res.records)
    if (!r.ok) ++res.failed;
  if (res.failed * 10 > tasks) {
    std::string first;
    for (const auto& r : res.records)
      if (!r.ok) {
        first = r.error;
        break;
      }
    throw std::runtime_error("run_rate_experiment: more than 10% of replications failed; first error: " + first);
  }

  for (std::size_t si = 0; si < cfg.sizes.size(); ++si) {
    SizeSummary s;
    s.n = cfg.sizes[si];
    double sum = 0.0;
    std::vector<double> vals;
    for (std::size_t rep = 0; rep < cfg.replications; ++rep) {
      const RunRecord& r = res.records[si * cfg.replications + rep];
      if (!r.ok) continue;
      vals.push_back(r.excess_risk);
      sum += r.excess_risk;
    }
    s.ok_count = vals.size();
    if (!vals.empty()) {
      s.mean_excess = sum / static_cast<double>(vals.size());
      if (vals.size() >= 2) {
        double ss = 0.0;
        for (double v : vals) ss += (v - s.mean_excess) * (v - s.mean_excess);
        s.std_error = std::sqrt(ss / static_cast<double>(vals.size() - 1) /
                                static_cast<double>(vals.size()));
      }
    }
    res.per_size.push_back(s);
  }

  std::vector<double> ns, means;
  for (const auto& s : res.per_size)
    if (s.ok_count > 0 && s.mean_excess > 0.0) {
      ns.push_back(static_cast<double>(s.n));
      means.push_back(s.mean_excess);
    }
  if (ns.size() >= 2) {
    const OlsFit fit = loglog_fit(ns, means);
    res.has_slope = true;
    res.slope = fit.slope;
    if (ns.size() >= 3 && std::isfinite(fit.slope_std_error)) {
      res.has_slope_ci = true;
      res.slope_std_error = fit.slope_std_error;
      res.slope_ci_lo = fit.slope - 1.96 * fit.slope_std_error;
      res.slope_ci_hi = fit.slope + 1.96 * fit.slope_std_error;
    }
  }

  detail::fill_theory_exponent(res);
  return res;
}

}  // namespace aew
