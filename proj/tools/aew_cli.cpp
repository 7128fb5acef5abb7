// Command-line front end: synthetic data generation, single fits, pipeline
// runs, grid exports, and the Monte-Carlo rate experiment. Every option can
// also be set through an AEW_* environment variable (see --help per
// subcommand).

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aew/aew.hpp"

namespace {

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

aew::PredictionRule rule_from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open rule file: " + path.string());
  nlohmann::json j;
  in >> j;
  const std::string kind = j.value("kind", "");
  if (kind == "svm") return aew::SvmModel::from_json(j).sign_rule();
  if (kind == "dyadic_partition") return aew::DyadicPartitionRule::from_json(j).as_rule();
  if (kind == "constant") return aew::PredictionRule::constant(j.at("label").get<int>());
  throw std::runtime_error("rule file " + path.string() + ": unknown kind '" + kind + "'");
}

nlohmann::json pipeline_report(const std::string& name, double alpha, std::uint64_t seed,
                               const aew::PipelineResult& pr, const aew::SyntheticDist& dist) {
  nlohmann::json j;
  j["pipeline"] = name;
  j["alpha"] = alpha;
  j["seed"] = seed;
  j["split"] = {{"n", pr.plan.n}, {"m", pr.plan.m}, {"l", pr.plan.l}};
  nlohmann::json members = nlohmann::json::array();
  for (const auto& m : pr.members)
    members.push_back({{"descriptor", m.descriptor},
                       {"holdout_hinge", m.holdout_hinge},
                       {"converged", m.converged}});
  j["members"] = std::move(members);
  nlohmann::json ws = nlohmann::json::array();
  for (double w : pr.model.weights().w) ws.push_back(aew::full_precision(w));
  j["weights"] = std::move(ws);
  j["aggregate_holdout_hinge"] = pr.aggregate_holdout_hinge;
  j["min_member_holdout_hinge"] = pr.min_member_holdout_hinge;
  j["regret_bound"] = pr.min_member_holdout_hinge +
                      std::log(static_cast<double>(pr.members.size())) /
                          static_cast<double>(pr.plan.l);
  j["members_dropped"] = pr.members_dropped;
  j["excess_risk"] = aew::excess_risk(pr.model.sign_rule(), dist);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& rule : pr.model.rules()) best = std::min(best, aew::excess_risk(rule, dist));
  j["min_member_excess"] = best;
  j["weights_entropy"] = pr.model.weights().entropy();
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exponential-weights aggregation of classifiers"};
  app.require_subcommand(1);

  // ---- synth generate ----
  auto* synth = app.add_subcommand("synth", "synthetic benchmark distribution");
  synth->require_subcommand(1);
  auto* generate = synth->add_subcommand("generate", "sample a dataset to CSV");
  double g_alpha = 1.0;
  std::size_t g_n = 100;
  std::uint64_t g_seed = 0;
  std::string g_out;
  generate->add_option("--alpha", g_alpha, "margin exponent")->envname("AEW_ALPHA")->required();
  generate->add_option("--n", g_n, "sample size")->envname("AEW_N")->required();
  generate->add_option("--seed", g_seed, "random seed")->envname("AEW_SEED")->required();
  generate->add_option("--out", g_out, "output path (default stdout)")->envname("AEW_OUT");
  generate->callback([&] {
    const aew::Dataset data = aew::SyntheticDist(g_alpha).sample(g_n, g_seed);
    std::ostringstream buf;
    aew::write_dataset_csv(data, buf);
    write_text(g_out, buf.str());
  });

  // ---- grids ----
  auto* grids = app.add_subcommand("grids", "hyperparameter grids");
  grids->require_subcommand(1);
  std::size_t gr_l = 100;
  double gr_b0 = 0.5;
  int gr_d0 = 1;
  std::string gr_out;
  auto* glambda = grids->add_subcommand("lambda", "regularization grid CSV");
  glambda->add_option("--l", gr_l, "aggregation sample size")->envname("AEW_L")->required();
  glambda->add_option("--b0", gr_b0, "resolution exponent")->envname("AEW_B0")->required();
  glambda->add_option("--out", gr_out, "output path (default stdout)")->envname("AEW_OUT");
  glambda->callback([&] { write_text(gr_out, aew::lambda_grid(gr_l, gr_b0).to_csv()); });
  auto* gsl = grids->add_subcommand("sigma-lambda", "width/regularization grid CSV");
  gsl->add_option("--l", gr_l, "aggregation sample size")->envname("AEW_L")->required();
  gsl->add_option("--b0", gr_b0, "resolution exponent")->envname("AEW_B0")->required();
  gsl->add_option("--d0", gr_d0, "ambient dimension")->envname("AEW_D0");
  gsl->add_option("--out", gr_out, "output path (default stdout)")->envname("AEW_OUT");
  gsl->callback([&] { write_text(gr_out, aew::sigma_lambda_grid(gr_l, gr_b0, gr_d0).to_csv()); });

  // ---- svm fit ----
  auto* svm = app.add_subcommand("svm", "kernel machine");
  svm->require_subcommand(1);
  auto* fit = svm->add_subcommand("fit", "fit on a dataset CSV, print model JSON");
  std::string f_data, f_out;
  double f_sigma = 1.0, f_lambda = 0.1, f_tol = 1e-8;
  std::size_t f_max_updates = 10000;
  fit->add_option("--data", f_data, "dataset CSV path")->envname("AEW_DATA")->required();
  fit->add_option("--sigma", f_sigma, "kernel inverse width")->envname("AEW_SIGMA")->required();
  fit->add_option("--lambda", f_lambda, "regularization")->envname("AEW_LAMBDA")->required();
  fit->add_option("--tol", f_tol, "convergence tolerance")->envname("AEW_TOL");
  fit->add_option("--max-updates-per-point", f_max_updates, "update cap per data point")
      ->envname("AEW_MAX_UPDATES_PER_POINT");
  fit->add_option("--out", f_out, "output path (default stdout)")->envname("AEW_OUT");
  fit->callback([&] {
    const aew::Dataset data = aew::read_dataset_csv(f_data);
    aew::SolveOptions opts;
    opts.tol = f_tol;
    opts.max_updates_per_point = f_max_updates;
    const aew::SvmModel model = aew::solve_dual(data, aew::KernelSpec{f_sigma}, f_lambda, opts);
    write_text(f_out, dump_json(model.to_json()));
  });

  // ---- aggregate run ----
  auto* aggregate = app.add_subcommand("aggregate", "aggregate stored rules");
  aggregate->require_subcommand(1);
  auto* agg_run = aggregate->add_subcommand("run", "aggregate rule files over a dataset");
  std::string ar_rules, ar_data, ar_kind = "aew", ar_out;
  agg_run->add_option("--rules", ar_rules, "directory of rule JSON files")
      ->envname("AEW_RULES")
      ->required();
  agg_run->add_option("--data", ar_data, "dataset CSV path")->envname("AEW_DATA")->required();
  agg_run->add_option("--kind", ar_kind, "aew | recursive")->envname("AEW_KIND");
  agg_run->add_option("--out", ar_out, "output path (default stdout)")->envname("AEW_OUT");
  agg_run->callback([&] {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(ar_rules))
      if (entry.is_regular_file() && entry.path().extension() == ".json")
        files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error("no .json rule files in " + ar_rules);
    std::vector<aew::PredictionRule> rules;
    std::vector<std::string> refs;
    for (const auto& f : files) {
      rules.push_back(rule_from_json_file(f));
      refs.push_back(f.filename().string());
    }
    const aew::Dataset data = aew::read_dataset_csv(ar_data);
    aew::AggregateModel model =
        ar_kind == "recursive" ? aew::recursive_aggregate(rules, data)
                               : aew::aew_aggregate(rules, data);
    if (ar_kind != "recursive" && ar_kind != "aew")
      throw std::runtime_error("aggregate run: kind must be aew or recursive");
    nlohmann::json j = model.to_json(refs);
    j["empirical_hinge_risk"] = aew::empirical_hinge_risk(model.as_soft(), data);
    write_text(ar_out, dump_json(j));
  });

  // ---- pipeline ----
  auto* pipeline = app.add_subcommand("pipeline", "single split-fit-aggregate run");
  pipeline->require_subcommand(1);
  double p_alpha = 1.0, p_a = 1.0, p_b0 = 0.4, p_sigma = 4.0;
  std::size_t p_n = 256;
  std::uint64_t p_seed = 0;
  int p_depth = -1, p_d0 = 1;
  std::string p_out;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--alpha", p_alpha, "margin exponent")->envname("AEW_ALPHA")->required();
    cmd->add_option("--n", p_n, "sample size")->envname("AEW_N")->required();
    cmd->add_option("--seed", p_seed, "random seed")->envname("AEW_SEED")->required();
    cmd->add_option("--a", p_a, "split ratio knob")->envname("AEW_A");
    cmd->add_option("--out", p_out, "output path (default stdout)")->envname("AEW_OUT");
  };
  auto* p_sieve = pipeline->add_subcommand("sieve", "partition ladder members");
  add_common(p_sieve);
  p_sieve->add_option("--depth", p_depth, "ladder height (-1 = default)")->envname("AEW_DEPTH");
  p_sieve->callback([&] {
    const aew::SyntheticDist dist(p_alpha);
    const aew::Dataset data = dist.sample(p_n, p_seed);
    const auto pr = aew::pipeline_sieve(data, p_a, p_depth, aew::Box::symmetric(1));
    write_text(p_out, dump_json(pipeline_report("sieve", p_alpha, p_seed, pr, dist)));
  });
  auto* p_svml = pipeline->add_subcommand("svm-lambda", "kernel members, fixed width");
  add_common(p_svml);
  p_svml->add_option("--b0", p_b0, "grid resolution exponent")->envname("AEW_B0");
  p_svml->add_option("--sigma", p_sigma, "kernel inverse width")->envname("AEW_SIGMA");
  p_svml->callback([&] {
    const aew::SyntheticDist dist(p_alpha);
    const aew::Dataset data = dist.sample(p_n, p_seed);
    const auto pr = aew::pipeline_svm_lambda(data, p_a, p_b0, p_sigma);
    write_text(p_out, dump_json(pipeline_report("svm-lambda", p_alpha, p_seed, pr, dist)));
  });
  auto* p_svmg = pipeline->add_subcommand("svm-grid", "kernel members, width/regularization grid");
  add_common(p_svmg);
  p_svmg->add_option("--b0", p_b0, "grid resolution exponent")->envname("AEW_B0");
  p_svmg->add_option("--d0", p_d0, "ambient dimension")->envname("AEW_D0");
  p_svmg->callback([&] {
    const aew::SyntheticDist dist(p_alpha);
    const aew::Dataset data = dist.sample(p_n, p_seed);
    const auto pr = aew::pipeline_svm_sigma_lambda(data, p_a, p_b0, p_d0);
    write_text(p_out, dump_json(pipeline_report("svm-grid", p_alpha, p_seed, pr, dist)));
  });

  // ---- experiment rates ----
  auto* experiment = app.add_subcommand("experiment", "Monte-Carlo studies");
  experiment->require_subcommand(1);
  auto* rates = experiment->add_subcommand("rates", "excess-risk decay over sample sizes");
  std::string e_config;
  unsigned e_threads = 1;
  std::string e_csv_override, e_summary_override;
  rates->add_option("--config", e_config, "experiment config JSON path")
      ->envname("AEW_CONFIG")
      ->required();
  rates->add_option("--threads", e_threads, "worker threads (results identical for any count)")
      ->envname("AEW_THREADS");
  rates->add_option("--out-csv", e_csv_override, "override config out_csv")->envname("AEW_OUT_CSV");
  rates->add_option("--out-summary", e_summary_override, "override config out_summary")
      ->envname("AEW_OUT_SUMMARY");
  rates->callback([&] {
    std::ifstream in(e_config);
    if (!in) throw std::runtime_error("cannot open config: " + e_config);
    nlohmann::json j;
    in >> j;
    aew::ExperimentConfig cfg = aew::ExperimentConfig::from_json(j);
    if (!e_csv_override.empty()) cfg.out_csv = e_csv_override;
    if (!e_summary_override.empty()) cfg.out_summary = e_summary_override;
    const aew::ExperimentResult res = aew::run_rate_experiment(cfg, e_threads);
    if (!cfg.out_csv.empty()) write_text(cfg.out_csv, res.to_csv());
    if (!cfg.out_summary.empty()) write_text(cfg.out_summary, dump_json(res.summary_json()));
    if (cfg.out_csv.empty() && cfg.out_summary.empty()) {
      std::cout << res.to_csv();
      std::cout << dump_json(res.summary_json());
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
