#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "aew/experiment.hpp"

namespace {

namespace fs = std::filesystem;

aew::ExperimentConfig small_sieve_config() {
  aew::ExperimentConfig cfg;
  cfg.pipeline = aew::PipelineTag::sieve;
  cfg.alpha = 1.0;
  cfg.sizes = {16, 32};
  cfg.replications = 3;
  cfg.seed = 5;
  cfg.max_depth = 2;
  return cfg;
}

TEST(Tag, StringRoundTripAndAlias) {
  for (auto t : {aew::PipelineTag::sieve, aew::PipelineTag::svm_lambda,
                 aew::PipelineTag::svm_sigma_lambda, aew::PipelineTag::recursive,
                 aew::PipelineTag::split_average})
    EXPECT_EQ(aew::pipeline_tag_from_string(aew::to_string(t)), t);
  EXPECT_EQ(aew::pipeline_tag_from_string("svm-grid"), aew::PipelineTag::svm_sigma_lambda);
  EXPECT_THROW(aew::pipeline_tag_from_string("forest"), std::invalid_argument);
}

TEST(Config, JsonRoundTrip) {
  aew::ExperimentConfig cfg = small_sieve_config();
  cfg.out_csv = "runs.csv";
  cfg.rho = 0.25;
  const aew::ExperimentConfig back = aew::ExperimentConfig::from_json(cfg.to_json());
  EXPECT_EQ(back.to_json().dump(), cfg.to_json().dump());

  // defaults fill in for omitted optional keys
  nlohmann::json minimal{{"pipeline", "sieve"},
                         {"alpha", 1.0},
                         {"sizes", {16}},
                         {"replications", 1},
                         {"seed", 0}};
  const aew::ExperimentConfig filled = aew::ExperimentConfig::from_json(minimal);
  EXPECT_DOUBLE_EQ(filled.a, 1.0);
  EXPECT_DOUBLE_EQ(filled.b0, 0.4);
  EXPECT_EQ(filled.d0, 1);
  EXPECT_EQ(filled.splits, 5u);
  EXPECT_TRUE(filled.out_csv.empty());
}

TEST(Config, ValidationCatchesBadValues) {
  aew::ExperimentConfig cfg = small_sieve_config();
  EXPECT_NO_THROW(cfg.validate());
  cfg.alpha = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = small_sieve_config();
  cfg.sizes.clear();
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = small_sieve_config();
  cfg.sizes = {4};
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = small_sieve_config();
  cfg.replications = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = small_sieve_config();
  cfg.rho = 1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = small_sieve_config();
  cfg.b0 = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Run, RecordsComeBackInFixedOrder) {
  const aew::ExperimentResult res = aew::run_rate_experiment(small_sieve_config());
  ASSERT_EQ(res.records.size(), 6u);
  const std::size_t want_n[] = {16, 16, 16, 32, 32, 32};
  const std::size_t want_rep[] = {0, 1, 2, 0, 1, 2};
  for (std::size_t t = 0; t < res.records.size(); ++t) {
    EXPECT_EQ(res.records[t].n, want_n[t]);
    EXPECT_EQ(res.records[t].replication, want_rep[t]);
    EXPECT_TRUE(res.records[t].ok);
    EXPECT_GE(res.records[t].excess_risk, -1e-10);
    EXPECT_GE(res.records[t].min_member_excess, -1e-10);
  }
  EXPECT_EQ(res.failed, 0u);

  ASSERT_EQ(res.per_size.size(), 2u);
  std::size_t positive_means = 0;
  for (std::size_t si = 0; si < 2; ++si) {
    EXPECT_EQ(res.per_size[si].ok_count, 3u);
    double sum = 0.0;
    for (std::size_t rep = 0; rep < 3; ++rep) sum += res.records[si * 3 + rep].excess_risk;
    EXPECT_NEAR(res.per_size[si].mean_excess, sum / 3.0, 1e-15);
    EXPECT_GE(res.per_size[si].std_error, 0.0);
    if (res.per_size[si].mean_excess > 0.0) ++positive_means;
  }
  // slope needs two sizes with positive mean excess; the CI needs three sizes
  EXPECT_EQ(res.has_slope, positive_means == 2);
  EXPECT_FALSE(res.has_slope_ci);
}

TEST(Run, CsvShapeAndContent) {
  const aew::ExperimentResult res = aew::run_rate_experiment(small_sieve_config());
  const std::string csv = res.to_csv();
  std::istringstream in(csv);
  std::string line;
  ASSERT_TRUE(std::getline(in, line));
  EXPECT_EQ(line, "pipeline,n,replication,excess_risk,min_member_excess,weights_entropy");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(line.rfind("sieve,", 0), 0u);
    ++rows;
  }
  EXPECT_EQ(rows, 6u);
}

TEST(Run, WorkerCountDoesNotChangeBytes) {
  const aew::ExperimentResult seq = aew::run_rate_experiment(small_sieve_config(), 1);
  const aew::ExperimentResult par = aew::run_rate_experiment(small_sieve_config(), 4);
  EXPECT_EQ(seq.to_csv(), par.to_csv());
  EXPECT_EQ(seq.summary_json().dump(), par.summary_json().dump());
}

TEST(Run, SummaryJsonKeysAndTheoryExponent) {
  const aew::ExperimentResult res = aew::run_rate_experiment(small_sieve_config());
  const nlohmann::json j = res.summary_json();
  EXPECT_EQ(j.at("pipeline").get<std::string>(), "sieve");
  EXPECT_EQ(j.at("replications").get<std::size_t>(), 3u);
  EXPECT_EQ(j.at("failed_replications").get<std::size_t>(), 0u);
  ASSERT_EQ(j.at("per_n").size(), 2u);
  EXPECT_EQ(j.at("per_n").at(0).at("n").get<std::size_t>(), 16u);
  EXPECT_TRUE(j.at("per_n").at(0).contains("mean_excess"));
  EXPECT_EQ(j.at("slope").is_null(), !res.has_slope);
  EXPECT_TRUE(j.at("slope_ci").is_null());
  // sieve with rho = 0: kappa/(2 kappa - 1) = 2/3 at alpha = 1
  ASSERT_TRUE(j.at("theory_exponent").is_number());
  EXPECT_DOUBLE_EQ(j.at("theory_exponent").get<double>(), 2.0 / 3.0);
}

TEST(Run, TheoryExponentPolicyPerPipeline) {
  // gaussian grid pipeline: gamma = (alpha+1)/alpha = 2 exceeds the branch
  // point 3/2, so the exponent is 2*2*2/(2*2*3 + 7) = 8/19
  aew::ExperimentConfig cfg = small_sieve_config();
  cfg.pipeline = aew::PipelineTag::svm_sigma_lambda;
  cfg.sizes = {24};
  cfg.replications = 2;
  const aew::ExperimentResult gauss = aew::run_rate_experiment(cfg);
  ASSERT_TRUE(gauss.has_theory_exponent);
  EXPECT_DOUBLE_EQ(gauss.theory_exponent, 8.0 / 19.0);

  // fixed-width pipeline: absent without (p, beta), present with them
  cfg.pipeline = aew::PipelineTag::svm_lambda;
  const aew::ExperimentResult blank = aew::run_rate_experiment(cfg);
  EXPECT_FALSE(blank.has_theory_exponent);
  EXPECT_TRUE(blank.summary_json().at("theory_exponent").is_null());
  cfg.p = 1.0;
  cfg.beta = 1.0;
  const aew::ExperimentResult given = aew::run_rate_experiment(cfg);
  ASSERT_TRUE(given.has_theory_exponent);
  EXPECT_DOUBLE_EQ(given.theory_exponent, 4.0 / 7.0);
}

// ---- CLI smoke tests -------------------------------------------------------

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("aew_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // returns the exit code; stdout/stderr land in files under dir_
  int run_cli(const std::string& args, const std::string& tag) {
    const std::string cmd = std::string(AEW_CLI_PATH) + " " + args + " > " +
                            (dir_ / (tag + ".out")).string() + " 2> " +
                            (dir_ / (tag + ".err")).string();
    const int status = std::system(cmd.c_str());
    return status == -1 ? -1 : WEXITSTATUS(status);
  }

  std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  }

  fs::path dir_;
};

TEST_F(CliTest, SynthGenerateMatchesLibrarySampler) {
  const fs::path csv = dir_ / "sample.csv";
  ASSERT_EQ(run_cli("synth generate --alpha 1 --n 50 --seed 7 --out " + csv.string(), "synth"),
            0);
  const aew::Dataset data = aew::read_dataset_csv(csv.string());
  const aew::Dataset want = aew::SyntheticDist(1.0).sample(50, 7);
  ASSERT_EQ(data.size(), want.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    EXPECT_EQ(data[i].x[0], want[i].x[0]);
    EXPECT_EQ(data[i].y, want[i].y);
  }
}

TEST_F(CliTest, GridsLambdaPrintsWorkedExample) {
  ASSERT_EQ(run_cli("grids lambda --l 100 --b0 0.5", "grids"), 0);
  const std::string out = slurp(dir_ / "grids.out");
  EXPECT_EQ(out, aew::lambda_grid(100, 0.5).to_csv());
  EXPECT_NE(out.find("1,0.6,0.06309573444801933\n"), std::string::npos);
}

TEST_F(CliTest, SvmFitReproducesLibraryFit) {
  const fs::path csv = dir_ / "train.csv";
  const aew::Dataset data = aew::SyntheticDist(1.0).sample(20, 3);
  aew::write_dataset_csv(data, csv.string());
  const fs::path out = dir_ / "model.json";
  ASSERT_EQ(run_cli("svm fit --data " + csv.string() + " --sigma 1 --lambda 0.25 --out " +
                        out.string(),
                    "fit"),
            0);
  nlohmann::json j;
  std::ifstream in(out);
  in >> j;
  const aew::SvmModel cli_model = aew::SvmModel::from_json(j);
  const aew::SvmModel lib_model = aew::solve_dual(data, {1.0}, 0.25);
  EXPECT_EQ(cli_model.dual_value(), lib_model.dual_value());
  EXPECT_EQ(cli_model.updates(), lib_model.updates());
  ASSERT_EQ(cli_model.coeffs().size(), lib_model.coeffs().size());
  for (std::size_t i = 0; i < lib_model.coeffs().size(); ++i)
    EXPECT_EQ(cli_model.coeffs()[i], lib_model.coeffs()[i]);
}

TEST_F(CliTest, PipelineSieveReportsConsistentSplit) {
  ASSERT_EQ(run_cli("pipeline sieve --alpha 1 --n 64 --seed 3 --depth 3", "sieve"), 0);
  nlohmann::json j;
  std::istringstream in(slurp(dir_ / "sieve.out"));
  in >> j;
  const aew::SplitPlan plan = aew::make_split_plan(64, 1.0);
  EXPECT_EQ(j.at("split").at("m").get<std::size_t>(), plan.m);
  EXPECT_EQ(j.at("split").at("l").get<std::size_t>(), plan.l);
  ASSERT_EQ(j.at("members").size(), 4u);
  double total = 0.0;
  for (const auto& w : j.at("weights"))
    total += aew::parse_finite_double(w.get<std::string>());
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_LE(j.at("aggregate_holdout_hinge").get<double>(),
            j.at("regret_bound").get<double>() + 1e-10);
}

TEST_F(CliTest, AggregateRunOverStoredRules) {
  const fs::path rules = dir_ / "rules";
  fs::create_directories(rules);
  const aew::Dataset data = aew::SyntheticDist(1.0).sample(30, 11);
  {
    const aew::DyadicPartitionRule part =
        aew::erm_over_partition(data, 2, aew::Box::symmetric(1));
    std::ofstream out(rules / "a_part.json");
    out << part.to_json().dump();
  }
  {
    const aew::SvmModel m = aew::solve_dual(data, {1.0}, 0.1);
    std::ofstream out(rules / "b_svm.json");
    out << m.to_json().dump();
  }
  const fs::path csv = dir_ / "agg_data.csv";
  aew::write_dataset_csv(data, csv.string());
  ASSERT_EQ(run_cli("aggregate run --rules " + rules.string() + " --data " + csv.string(),
                    "agg"),
            0);
  nlohmann::json j;
  std::istringstream in(slurp(dir_ / "agg.out"));
  in >> j;
  EXPECT_EQ(j.at("kind").get<std::string>(), "aew");
  ASSERT_EQ(j.at("rules").size(), 2u);
  EXPECT_EQ(j.at("rules").at(0).get<std::string>(), "a_part.json");
  EXPECT_EQ(j.at("rules").at(1).get<std::string>(), "b_svm.json");
  EXPECT_TRUE(j.contains("empirical_hinge_risk"));
}

TEST_F(CliTest, ExperimentRatesIsThreadCountInvariant) {
  const fs::path cfg_path = dir_ / "cfg.json";
  {
    aew::ExperimentConfig cfg = small_sieve_config();
    std::ofstream out(cfg_path);
    out << cfg.to_json().dump();
  }
  const fs::path csv1 = dir_ / "r1.csv", sum1 = dir_ / "s1.json";
  const fs::path csv8 = dir_ / "r8.csv", sum8 = dir_ / "s8.json";
  ASSERT_EQ(run_cli("experiment rates --config " + cfg_path.string() + " --threads 1" +
                        " --out-csv " + csv1.string() + " --out-summary " + sum1.string(),
                    "exp1"),
            0);
  ASSERT_EQ(run_cli("experiment rates --config " + cfg_path.string() + " --threads 8" +
                        " --out-csv " + csv8.string() + " --out-summary " + sum8.string(),
                    "exp8"),
            0);
  const std::string c1 = slurp(csv1), c8 = slurp(csv8);
  EXPECT_FALSE(c1.empty());
  EXPECT_EQ(c1, c8);
  EXPECT_EQ(slurp(sum1), slurp(sum8));
  // and the files agree with the in-process runner
  EXPECT_EQ(c1, aew::run_rate_experiment(small_sieve_config()).to_csv());
}

TEST_F(CliTest, BadArgumentsFailNonZero) {
  EXPECT_NE(run_cli("synth generate --alpha -1 --n 10 --seed 0", "bad1"), 0);
  EXPECT_NE(run_cli("grids lambda --l 1 --b0 0.5", "bad2"), 0);
  EXPECT_NE(run_cli("nonsense", "bad3"), 0);
}

}  // namespace
