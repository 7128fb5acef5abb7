#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "aew/pipelines.hpp"
#include "aew/risk.hpp"
#include "aew/synth.hpp"

namespace {

TEST(Split, PlanValues) {
  // n = 100, a = 1: l = ceil(100 / ln 100) = 22, m = 78
  const aew::SplitPlan p = aew::make_split_plan(100, 1.0);
  EXPECT_EQ(p.l, 22u);
  EXPECT_EQ(p.m, 78u);
  // tiny n: the n/2 clamp keeps both halves populated
  const aew::SplitPlan q = aew::make_split_plan(4, 1.0);
  EXPECT_EQ(q.l, 2u);
  EXPECT_EQ(q.m, 2u);
  // large a saturates at n/2 as well
  EXPECT_EQ(aew::make_split_plan(100, 50.0).l, 50u);
  EXPECT_THROW(aew::make_split_plan(3, 1.0), std::invalid_argument);
  EXPECT_THROW(aew::make_split_plan(100, 0.0), std::invalid_argument);
}

TEST(Split, DatasetPartsPreserveOrder) {
  const aew::SyntheticDist dist(1.0);
  const aew::Dataset data = dist.sample(50, 3);
  const auto [dm, dl] = aew::split_dataset(data, 1.0);
  const aew::SplitPlan plan = aew::make_split_plan(50, 1.0);
  ASSERT_EQ(dm.size(), plan.m);
  ASSERT_EQ(dl.size(), plan.l);
  for (std::size_t i = 0; i < dm.size(); ++i) EXPECT_EQ(dm[i].x[0], data[i].x[0]);
  for (std::size_t i = 0; i < dl.size(); ++i) EXPECT_EQ(dl[i].x[0], data[plan.m + i].x[0]);
}

TEST(Sieve, HoldoutOracleInequalityIsExact) {
  const aew::SyntheticDist dist(1.0);
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    const aew::Dataset data = dist.sample(300, seed);
    const auto res = aew::pipeline_sieve(data, 1.0, 5, aew::Box::symmetric(1));
    ASSERT_EQ(res.members.size(), 6u);
    EXPECT_EQ(res.members_dropped, 0u);
    const double bound = res.min_member_holdout_hinge +
                         std::log(static_cast<double>(res.members.size())) /
                             static_cast<double>(res.plan.l);
    EXPECT_LE(res.aggregate_holdout_hinge, bound + 1e-10) << "seed " << seed;
    // reported member stats really are the holdout hinge risks
    const aew::Dataset dl = data.tail(res.plan.l);
    for (std::size_t j = 0; j < res.members.size(); ++j)
      EXPECT_DOUBLE_EQ(res.members[j].holdout_hinge,
                       aew::empirical_hinge_risk(res.model.rules()[j], dl));
  }
}

TEST(Sieve, WeightsDependOnlyOnHoldout) {
  // mutating estimation-part labels AFTER the ladder is fixed must not move
  // the weights: they are a function of the members and the suffix alone.
  // Equivalently: two datasets sharing a suffix give identical weights when
  // handed the same member rules. Run the full pipeline twice on data that
  // differ only in the prefix and compare member-for-member holdout risks.
  const aew::SyntheticDist dist(1.0);
  const aew::Dataset data = dist.sample(120, 17);
  const aew::SplitPlan plan = aew::make_split_plan(120, 1.0);

  std::vector<aew::LabeledSample> twisted = data.samples();
  for (std::size_t i = 0; i < plan.m; ++i) twisted[i].y = -twisted[i].y;
  const aew::Dataset mirror(twisted);

  const auto res_a = aew::pipeline_sieve(data, 1.0, 3, aew::Box::symmetric(1));
  const auto res_b = aew::pipeline_sieve(mirror, 1.0, 3, aew::Box::symmetric(1));
  // the ladders differ (prefix labels flipped), but each aggregate's weights
  // must reproduce from its own members' holdout risks alone
  for (const auto* res : {&res_a, &res_b}) {
    std::vector<double> exponents;
    for (const auto& m : res->members)
      exponents.push_back(-static_cast<double>(res->plan.l) * m.holdout_hinge);
    const aew::WeightVector rebuilt = aew::weights_from_exponents(exponents);
    ASSERT_EQ(rebuilt.size(), res->model.weights().size());
    for (std::size_t j = 0; j < rebuilt.size(); ++j)
      EXPECT_NEAR(res->model.weights()[j], rebuilt[j], 1e-12);
  }
}

TEST(Sieve, RecursiveKindUsesPrefixAverages) {
  const aew::SyntheticDist dist(1.0);
  const aew::Dataset data = dist.sample(80, 9);
  const auto res =
      aew::pipeline_sieve(data, 1.0, 3, aew::Box::symmetric(1), aew::AggregateKind::recursive);
  EXPECT_EQ(res.model.kind(), aew::AggregateKind::recursive);
  // recompute: recursive weights of the fitted rules over the suffix
  const aew::Dataset dl = data.tail(res.plan.l);
  const aew::WeightVector want = aew::recursive_weights(res.model.rules(), dl);
  for (std::size_t j = 0; j < want.size(); ++j)
    EXPECT_DOUBLE_EQ(res.model.weights()[j], want[j]);

  EXPECT_THROW(
      aew::pipeline_sieve(data, 1.0, 3, aew::Box::symmetric(1), aew::AggregateKind::erm),
      std::invalid_argument);
}

TEST(Sieve, DefaultDepthKicksIn) {
  const aew::SyntheticDist dist(1.0);
  const aew::Dataset data = dist.sample(64, 21);
  const auto res = aew::pipeline_sieve(data, 1.0, -1, aew::Box::symmetric(1));
  const aew::SplitPlan plan = aew::make_split_plan(64, 1.0);
  const int want_depth = aew::default_ladder_depth(plan.m, 1);
  EXPECT_EQ(res.members.size(), static_cast<std::size_t>(want_depth) + 1);
}

TEST(SvmLambda, SmallRunConvergesAndSatisfiesBound) {
  const aew::SyntheticDist dist(1.0);
  const aew::Dataset data = dist.sample(64, 12);
  const auto res = aew::pipeline_svm_lambda(data, 1.0, 0.5, 1.0);
  const aew::SplitPlan plan = aew::make_split_plan(64, 1.0);
  const aew::LambdaGrid grid = aew::lambda_grid(plan.l, 0.5);
  EXPECT_EQ(res.members.size() + res.members_dropped, grid.entries.size());
  EXPECT_GT(res.members.size(), 0u);
  for (const auto& m : res.members) EXPECT_TRUE(m.converged);
  const double bound = res.min_member_holdout_hinge +
                       std::log(static_cast<double>(res.members.size())) /
                           static_cast<double>(res.plan.l);
  EXPECT_LE(res.aggregate_holdout_hinge, bound + 1e-10);
  // descriptors identify each member's regularization
  for (const auto& m : res.members)
    EXPECT_EQ(m.descriptor.rfind("svm(sigma=", 0), 0u);
}

TEST(SvmLambda, WorkerCountDoesNotChangeBits) {
  const aew::SyntheticDist dist(1.0);
  const aew::Dataset data = dist.sample(64, 23);
  const auto seq = aew::pipeline_svm_lambda(data, 1.0, 0.5, 1.0, {}, 1);
  const auto par = aew::pipeline_svm_lambda(data, 1.0, 0.5, 1.0, {}, 4);
  ASSERT_EQ(seq.members.size(), par.members.size());
  EXPECT_EQ(seq.aggregate_holdout_hinge, par.aggregate_holdout_hinge);
  EXPECT_EQ(seq.min_member_holdout_hinge, par.min_member_holdout_hinge);
  for (std::size_t j = 0; j < seq.members.size(); ++j) {
    EXPECT_EQ(seq.members[j].holdout_hinge, par.members[j].holdout_hinge);
    EXPECT_EQ(seq.model.weights()[j], par.model.weights()[j]);
  }
}

TEST(SvmGrid, ProductGridRunKeepsSigmaBlocksContiguous) {
  const aew::SyntheticDist dist(1.0);
  const aew::Dataset data = dist.sample(80, 34);
  const auto res = aew::pipeline_svm_sigma_lambda(data, 1.0, 0.5, 1);
  const aew::SplitPlan plan = aew::make_split_plan(80, 1.0);
  const aew::SigmaLambdaGrid grid = aew::sigma_lambda_grid(plan.l, 0.5, 1);
  EXPECT_EQ(res.members.size() + res.members_dropped, grid.entries.size());
  const double bound = res.min_member_holdout_hinge +
                       std::log(static_cast<double>(res.members.size())) /
                           static_cast<double>(res.plan.l);
  EXPECT_LE(res.aggregate_holdout_hinge, bound + 1e-10);
  // when nothing is dropped, descriptors follow the grid's p1-major order
  if (res.members_dropped == 0) {
    for (std::size_t i = 0; i < grid.entries.size(); ++i) {
      const std::string want = "svm(sigma=" + aew::full_precision(grid.entries[i].sigma) +
                               ",lambda=" + aew::full_precision(grid.entries[i].lambda) + ")";
      EXPECT_EQ(res.members[i].descriptor, want);
    }
  }
}

TEST(SplitAverage, AveragesRotatedAggregates) {
  const aew::SyntheticDist dist(1.0);
  const aew::Dataset data = dist.sample(60, 77);
  const std::size_t k = 3;
  const auto res = aew::pipeline_split_average(data, 1.0, 2, aew::Box::symmetric(1), k);
  EXPECT_EQ(res.model.kind(), aew::AggregateKind::split_average);
  // K rotations x (depth 0..2) members
  ASSERT_EQ(res.model.rules().size(), k * 3u);
  double total = 0.0;
  for (std::size_t j = 0; j < res.model.weights().size(); ++j)
    total += res.model.weights()[j];
  EXPECT_NEAR(total, 1.0, 1e-12);

  // first block equals the unrotated single-split aggregate, scaled by 1/K
  const auto single = aew::pipeline_sieve(data, 1.0, 2, aew::Box::symmetric(1));
  const double scale = 1.0 / static_cast<double>(k);
  for (std::size_t j = 0; j < 3u; ++j)
    EXPECT_DOUBLE_EQ(res.model.weights()[j], scale * single.model.weights()[j]);

  EXPECT_THROW(aew::pipeline_split_average(data, 1.0, 2, aew::Box::symmetric(1), 0),
               std::invalid_argument);
}

}  // namespace
