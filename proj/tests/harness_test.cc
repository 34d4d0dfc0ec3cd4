// Copyright 2026 The FAQ Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "faq/harness.h"

#include <atomic>
#include <cmath>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "faq/errors.h"
#include "faq/factor_model.h"

namespace faq {
namespace {

ExperimentConfig SmallConfig() {
  ExperimentConfig cfg;
  cfg.bank.n_questions = 120;
  cfg.bank.n_old = 60;
  cfg.bank.n_test = 4;
  cfg.budget_fractions = {0.1, 0.2};
  cfg.methods = {"faq", "uniform", "pbar_neyman", "traditional"};
  cfg.seeds = 5;
  cfg.factor_max_iters = 200;
  return cfg;
}

std::string RawCsv(const ExperimentResult& r) {
  std::ostringstream out;
  WriteRawCsv(r.runs, out);
  return out.str();
}

TEST(GenerateBankTest, ShapesAndDeterminism) {
  SyntheticBankSpec spec;
  const auto a = GenerateBank(spec);
  EXPECT_EQ(a.history.n_models(), 300u);
  EXPECT_EQ(a.test.n_models(), 50u);
  EXPECT_EQ(a.history.n_questions(), 500u);
  EXPECT_EQ(a.planted.u.rows(), 350);
  EXPECT_EQ(a.history.CountObserved(), 300u * 500u);
  const auto b = GenerateBank(spec);
  EXPECT_EQ(a.history, b.history);
  EXPECT_EQ(a.test, b.test);
  EXPECT_EQ(a.planted.v, b.planted.v);
  for (std::size_t i = 0; i < 50; ++i) {
    const auto z = a.test.AnswerVector(i);
    double s = 0.0;
    for (auto x : z) s += x;
    EXPECT_DOUBLE_EQ(a.true_thetas[i], s / 500.0);
  }
}

TEST(GenerateBankTest, TinyScaleIsCoinFlips) {
  SyntheticBankSpec spec;
  spec.logit_scale = 1e-9;
  spec.n_questions = 400;
  spec.n_old = 200;
  const auto bank = GenerateBank(spec);
  const double n = 200.0 * 400.0;
  const double mean = static_cast<double>(
      [&] {
        std::size_t c = 0;
        for (std::size_t i = 0; i < 200; ++i) {
          for (std::size_t j = 0; j < 400; ++j) c += bank.history.at(i, j) == Outcome::kCorrect;
        }
        return c;
      }()) / n;
  EXPECT_LT(std::abs(mean - 0.5), 3 * std::sqrt(0.25 / n));
}

TEST(GenerateBankTest, LargeScaleIsBimodal) {
  SyntheticBankSpec spec;
  spec.logit_scale = 4.0;
  spec.n_questions = 1000;
  const auto bank = GenerateBank(spec);
  const Eigen::MatrixXd logits = bank.planted.u * bank.planted.v.transpose();
  // Var_j of per-cell probabilities p_ij, pooled over models.
  double pooled = 0.0, pooled_mean = 0.0;
  for (int i = 0; i < logits.rows(); ++i) {
    for (int j = 0; j < 1000; ++j) {
      const double p = Sigmoid(logits(i, j));
      pooled += p * p;
      pooled_mean += p;
    }
  }
  const double cells = static_cast<double>(logits.size());
  pooled_mean /= cells;
  EXPECT_GT(pooled / cells - pooled_mean * pooled_mean, 0.1);
  EXPECT_THROW(GenerateBank(SyntheticBankSpec{.logit_scale = 0.0}), ArgumentError);
}

TEST(ParallelForTest, VisitsEveryIndexOnceAndRethrows) {
  std::vector<std::atomic<int>> hits(1000);
  ParallelFor(1000, 4, [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(ParallelFor(10, 3,
                           [](std::size_t i) {
                             if (i == 7) throw DataError("boom");
                           }),
               DataError);
}

TEST(ParseMethodTest, Names) {
  auto m = ParseMethod("pbar_neyman", 0.25);
  EXPECT_EQ(m.kind, MethodSpec::Kind::kStream);
  EXPECT_EQ(m.base, BaselinePredictor::kDifficultyMeans);
  EXPECT_EQ(m.rule, LabelRule::kNeyman);
  m = ParseMethod("zero_minrule@0.5", 0.25);
  EXPECT_EQ(m.base, BaselinePredictor::kZero);
  EXPECT_EQ(m.rule, LabelRule::kMinRule);
  EXPECT_EQ(m.tau, 0.5);
  EXPECT_EQ(ParseMethod("faq_worep", 0.25).kind, MethodSpec::Kind::kFaqWithoutReplacement);
  EXPECT_EQ(ParseMethod("traditional@0.1", 0.25).tau, 0.1);
  EXPECT_THROW(ParseMethod("faq@0.5", 0.25), ArgumentError);
  EXPECT_THROW(ParseMethod("pbar_median", 0.25), ArgumentError);
  EXPECT_THROW(ParseMethod("oracle", 0.25), ArgumentError);
  EXPECT_THROW(ParseMethod("uniform@1.5", 0.25), ArgumentError);
}

TEST(ConfigTest, ParseAndRoundTrip) {
  std::istringstream in(
      "# comment\n"
      "bank.n_questions = 200\n"
      "budget_fractions = 0.025, 0.25\n"
      "methods = faq, uniform, pbar_minrule\n"
      "seeds = 7\n"
      "tune_policy = true\n"
      "grid.tau = 0.05,0.5\n"
      "policy.beta0 = 0.75\n");
  const ExperimentConfig cfg = ParseExperimentConfig(in);
  EXPECT_EQ(cfg.bank.n_questions, 200);
  EXPECT_EQ(cfg.budget_fractions, (std::vector<double>{0.025, 0.25}));
  EXPECT_EQ(cfg.methods, (std::vector<std::string>{"faq", "uniform", "pbar_minrule"}));
  EXPECT_EQ(cfg.seeds, 7);
  EXPECT_TRUE(cfg.tune_policy);
  EXPECT_EQ(cfg.grid.tau, (std::vector<double>{0.05, 0.5}));
  EXPECT_EQ(cfg.beta0, 0.75);

  std::ostringstream first;
  WriteExperimentConfig(cfg, first);
  std::istringstream again(first.str());
  std::ostringstream second;
  WriteExperimentConfig(ParseExperimentConfig(again), second);
  EXPECT_EQ(first.str(), second.str());
}

TEST(ConfigTest, UnknownKeyIsError) {
  std::istringstream in("seeds = 3\nbudget_fraction = 0.1\n");
  EXPECT_THROW(ParseExperimentConfig(in), ParseError);
  std::istringstream bad("seeds = three\n");
  EXPECT_THROW(ParseExperimentConfig(bad), ParseError);
}

TEST(ConfigTest, Validation) {
  ExperimentConfig cfg;
  cfg.budget_fractions = {0.0};
  EXPECT_THROW(cfg.Validate(), ArgumentError);
  cfg = {};
  cfg.seeds = 0;
  EXPECT_THROW(cfg.Validate(), ArgumentError);
  cfg = {};
  cfg.alpha = 1.0;
  EXPECT_THROW(cfg.Validate(), ArgumentError);
  cfg = {};
  cfg.methods = {"faq", "nope"};
  EXPECT_THROW(cfg.Validate(), ArgumentError);
}

TEST(TunePolicyTest, SinglePointGridAndTableSize) {
  const auto bank = GenerateBank({.n_questions = 100, .n_old = 40, .n_test = 2});
  const GaussianBelief prior = EmpiricalPrior(bank.planted.u.topRows(40));
  std::vector<std::vector<std::uint8_t>> val = {bank.test.AnswerVector(0),
                                                bank.test.AnswerVector(1)};
  PolicyGrid one{{0.25}, {0.05}, {0.5}, {0.75}};
  auto r = TunePolicy(val, bank.planted.v, prior, one, {10}, 2, 0.05, 1, 1);
  ASSERT_EQ(r.best.size(), 1u);
  EXPECT_EQ(r.best[0].rho, 0.25);
  EXPECT_EQ(r.best[0].gamma, 0.05);
  EXPECT_EQ(r.best[0].beta0, 0.5);
  EXPECT_EQ(r.best[0].tau, 0.75);
  EXPECT_EQ(r.queries_spent, 2u * 2u * 10u);

  EXPECT_EQ(PolicyGrid{}.size(), 400u);
  r = TunePolicy(val, bank.planted.v, prior, PolicyGrid{}, {5, 10}, 1, 0.05, 1, 2);
  EXPECT_EQ(r.table.size(), 800u);
  PolicyGrid empty;
  empty.tau.clear();
  EXPECT_THROW(TunePolicy(val, bank.planted.v, prior, empty, {10}, 1, 0.05, 1, 1), ArgumentError);
}

TEST(TunePolicyTest, TunedWidthNotWorseThanReference) {
  const auto bank = GenerateBank({.n_questions = 200, .n_old = 100, .n_test = 6});
  const GaussianBelief prior = EmpiricalPrior(bank.planted.u.topRows(100));
  std::vector<std::vector<std::uint8_t>> val;
  for (std::size_t i = 0; i < 6; ++i) val.push_back(bank.test.AnswerVector(i));
  PolicyGrid grid{{0.05, 0.5}, {0.05, 0.5}, {0.5, 1.0}, {0.05, 0.75}};
  const auto r = TunePolicy(val, bank.planted.v, prior, grid, {20}, 5, 0.05, 3, 1);
  double best = 0.0, reference = 0.0;
  for (const auto& c : r.table) {
    if (c.config.rho == r.best[0].rho && c.config.gamma == r.best[0].gamma &&
        c.config.beta0 == r.best[0].beta0 && c.config.tau == r.best[0].tau) {
      best = c.mean_width;
    }
    if (c.config.rho == 0.5 && c.config.gamma == 0.5 && c.config.beta0 == 1.0 &&
        c.config.tau == 0.75) {
      reference = c.mean_width;
    }
  }
  EXPECT_GT(reference, 0.0);
  EXPECT_LE(best, reference);
}

TEST(RunExperimentTest, ThreadCountDoesNotChangeOutput) {
  const ExperimentConfig cfg = SmallConfig();
  const auto a = RunExperiment(cfg, 1);
  const auto b = RunExperiment(cfg, 3);
  EXPECT_EQ(RawCsv(a), RawCsv(b));
  EXPECT_EQ(a.budgets, (std::vector<int>{12, 24}));
  EXPECT_EQ(a.runs.size(), 2u * 4u * 4u * 5u);
}

TEST(RunExperimentTest, AggregatesMatchIndependentRecomputation) {
  const auto result = RunExperiment(SmallConfig(), 2);
  std::istringstream raw(RawCsv(result));
  const auto runs = ReadRawCsv(raw);
  ASSERT_EQ(runs.size(), result.runs.size());

  std::map<std::pair<int, int>, std::pair<double, int>> uniform;  // (budget, model) -> sum, n
  for (const auto& r : runs) {
    if (r.method == "uniform" && r.ok()) {
      auto& u = uniform[{r.budget, r.model}];
      u.first += r.report.estimator_variance;
      u.second += 1;
    }
  }
  for (const auto& row : result.metrics) {
    double cov = 0.0, width = 0.0, sq = 0.0;
    int n = 0;
    std::map<int, std::pair<double, int>> per_model;
    for (const auto& r : runs) {
      if (r.method != row.method || r.budget != row.budget || !r.ok()) continue;
      cov += r.covered;
      width += r.report.ci_high - r.report.ci_low;
      sq += (r.report.theta_hat - r.theta) * (r.report.theta_hat - r.theta);
      auto& pm = per_model[r.model];
      pm.first += r.report.estimator_variance;
      pm.second += 1;
      ++n;
    }
    ASSERT_EQ(static_cast<std::size_t>(n), row.runs);
    EXPECT_NEAR(row.coverage, cov / n, 1e-12);
    EXPECT_NEAR(row.width, width / n, 1e-12);
    EXPECT_NEAR(row.rmse, std::sqrt(sq / n), 1e-12);
    double ratio_sum = 0.0;
    for (const auto& [model, v] : per_model) {
      const auto& u = uniform.at({row.budget, model});
      ratio_sum += row.budget * (u.first / u.second) / (v.first / v.second);
    }
    EXPECT_NEAR(row.n_eff, ratio_sum / static_cast<double>(per_model.size()), 1e-9);
    if (row.method == "uniform") EXPECT_NEAR(row.n_eff, row.budget, 1e-9);
  }
}

TEST(RunExperimentTest, UniformCoverageAndSelfEss) {
  ExperimentConfig cfg;  // default bank: 500 questions, 50 test models
  cfg.methods = {"uniform"};
  cfg.seeds = 40;
  cfg.factor_max_iters = 20;
  const auto r = RunExperiment(cfg, 2);
  ASSERT_EQ(r.metrics.size(), 1u);
  const auto& m = r.metrics[0];
  EXPECT_EQ(m.budget, 50);
  EXPECT_EQ(m.runs, 2000u);
  EXPECT_GE(m.coverage, 0.92);
  EXPECT_LE(m.coverage, 0.97);
  // Per-run n_eff scatters around n_b.
  double mean = 0.0;
  for (const auto& run : r.runs) mean += *run.report.n_eff / 2000.0;
  EXPECT_NEAR(mean, 50.0, 2.5);
}

TEST(RunExperimentTest, PosthocBestPicksLargestEss) {
  std::vector<MetricsRow> rows(4);
  rows[0].method = "uniform";
  rows[0].n_eff = 10;
  rows[1].method = "pbar_neyman";
  rows[1].n_eff = 12;
  rows[2].method = "zero_minrule@0.5";
  rows[2].n_eff = 14;
  rows[3].method = "faq";
  rows[3].n_eff = 20;
  AppendPosthocBest(rows);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[4].method, "best_baseline(zero_minrule@0.5)");
  EXPECT_EQ(rows[4].n_eff, 14);
}

TEST(CoverageAuditTest, Examples) {
  std::vector<double> keys = {0.3, 0.1, 0.7, 0.5, 0.9};
  std::vector<double> cov = {0.9, 0.95, 1.0, 0.85, 0.92};
  auto rows = CoverageAudit(keys, cov, 1);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(rows[i].model, static_cast<int>(i));
    EXPECT_EQ(rows[i].smoothed, cov[i]);
    EXPECT_EQ(rows[i].sd, 0.0);
  }
  rows = CoverageAudit(keys, std::vector<double>(5, 0.95), 3);
  for (const auto& r : rows) {
    EXPECT_NEAR(r.smoothed, 0.95, 1e-15);
    EXPECT_NEAR(r.sd, 0.0, 1e-15);
  }
  EXPECT_THROW(CoverageAudit(keys, cov, 2), ArgumentError);
  EXPECT_THROW(CoverageAudit(keys, cov, 7), ArgumentError);
  EXPECT_THROW(CoverageAudit(keys, {0.5}, 1), DimensionError);
}

TEST(CoverageAuditTest, LargeWindowKeepsOneRowPerModel) {
  std::vector<double> keys(2200), cov(2200);
  for (int i = 0; i < 2200; ++i) {
    keys[i] = std::fmod(i * 0.618033988749895, 1.0);
    cov[i] = 0.9 + 0.1 * keys[i];
  }
  const auto rows = CoverageAudit(keys, cov, 501);
  ASSERT_EQ(rows.size(), 2200u);
  for (const auto& r : rows) {
    EXPECT_GE(r.smoothed, 0.9);
    EXPECT_LE(r.smoothed, 1.0);
  }
}

}  // namespace
}  // namespace faq
