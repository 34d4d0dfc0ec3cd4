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

// Experiment orchestration: synthetic banks, policy tuning on validation
// models, (method, budget, model, seed) sweeps, aggregation and coverage
// audits. Every task is seeded from its own coordinates, so results do not
// depend on the number of worker threads.

#ifndef FAQ_HARNESS_H_
#define FAQ_HARNESS_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "faq/belief.h"
#include "faq/estimators.h"
#include "faq/factor_model.h"
#include "faq/outcome_matrix.h"
#include "faq/policy.h"

namespace faq {

struct SyntheticBankSpec {
  int n_questions = 500;
  int n_old = 300;
  int n_test = 50;
  int k_true = 4;
  double logit_scale = 2.0;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct SyntheticBank {
  OutcomeMatrix history;  // fully observed, before any masking
  OutcomeMatrix test;     // fully observed answer vectors
  std::vector<double> true_thetas;
  FactorSet planted;      // u holds n_old + n_test rows
};

// Planted U, V with i.i.d. N(0, s^2) entries, s^2 = logit_scale / sqrt(k),
// so logits u.v have standard deviation logit_scale. Each outcome is drawn
// once from Bernoulli(sigmoid(u.v)) and frozen.
SyntheticBank GenerateBank(const SyntheticBankSpec& spec);

// Worker count from FAQ_THREADS (default: hardware concurrency, min 1).
int WorkerCount();

// Runs fn(i) for i in [0, n) on `threads` workers. fn must only write to
// slot i of its outputs.
void ParallelFor(std::size_t n, int threads,
                 const std::function<void(std::size_t)>& fn);

struct PolicyGrid {
  std::vector<double> rho = {0.0, 0.05, 0.25, 0.5, 0.75};
  std::vector<double> gamma = {0.0, 0.05, 0.25, 0.5, 0.75};
  std::vector<double> beta0 = {0.25, 0.5, 0.75, 1.0};
  std::vector<double> tau = {0.05, 0.25, 0.5, 0.75};

  std::size_t size() const {
    return rho.size() * gamma.size() * beta0.size() * tau.size();
  }
};

struct TuningCell {
  int budget = 0;
  PolicyConfig config;
  double mean_width = 0.0;
};

struct TuningResult {
  std::vector<PolicyConfig> best;  // one per budget, in input order
  std::vector<TuningCell> table;
  // Queries spent on validation models (reported separately).
  std::size_t queries_spent = 0;
};

// Grid search minimizing mean Wald width across validation models and
// seeds; ties go to the larger tau.
TuningResult TunePolicy(const std::vector<std::vector<std::uint8_t>>& val_answers,
                        const Eigen::MatrixXd& v, const GaussianBelief& prior,
                        const PolicyGrid& grid, const std::vector<int>& budgets,
                        int seeds, double alpha, std::uint64_t seed, int threads);

// A method in a sweep: faq, faq_worep, uniform, traditional, or a stream
// baseline <zero|pbar>_<bernoulli|neyman|minrule>; baselines and traditional
// take an optional "@tau" suffix.
struct MethodSpec {
  enum class Kind { kFaq, kFaqWithoutReplacement, kStream, kTraditional };
  Kind kind = Kind::kFaq;
  BaselinePredictor base = BaselinePredictor::kZero;
  LabelRule rule = LabelRule::kBernoulli;
  double tau = 0.25;
  std::string name;
};

MethodSpec ParseMethod(const std::string& text, double default_tau);

struct ExperimentConfig {
  // Data: either files or a synthetic bank.
  std::string history_path;
  std::string test_path;
  std::string metadata_path;  // optional `model_id,release_ordinal`
  // When > 0 and test_path is empty, history_path is sorted by release
  // ordinal and split into this many historical rows plus test rows.
  std::size_t split_first = 0;
  SyntheticBankSpec bank;

  std::size_t n_full_obs = 0;
  double p_obs = 1.0;

  std::vector<double> budget_fractions = {0.1};
  std::vector<std::string> methods = {"faq", "uniform"};
  int seeds = 10;
  int max_test_models = 0;  // 0 = all
  double alpha = 0.05;
  std::uint64_t seed = 0;

  int factor_k = 4;
  double factor_weight_decay = 1e-3;
  double factor_learning_rate = 1e-2;
  int factor_max_iters = 2000;
  std::uint64_t factor_seed = 0;
  std::string factors_dir;  // load U.csv/V.csv instead of fitting

  double rho = 0.5;
  double gamma = 0.5;
  double beta0 = 1.0;
  double tau = 0.25;
  double baseline_tau = 0.25;

  bool tune_policy = false;
  double val_fraction = 0.2;
  int tune_seeds = 5;
  PolicyGrid grid;

  void Validate() const;
};

ExperimentConfig ParseExperimentConfig(std::istream& in);
ExperimentConfig LoadExperimentConfig(const std::string& path);
void WriteExperimentConfig(const ExperimentConfig& cfg, std::ostream& out);

struct RunRecord {
  std::string method;
  int seed = 0;  // seed index within the sweep
  int budget = 0;
  int model = 0;
  std::string model_id;
  double theta = 0.0;
  EstimateReport report;
  bool covered = false;
  std::string error;  // empty on success

  bool ok() const { return error.empty(); }
};

struct MetricsRow {
  std::string method;
  int budget = 0;
  std::size_t runs = 0;
  std::size_t failures = 0;
  std::size_t models = 0;
  double coverage = 0.0;
  double coverage_se = 0.0;
  double width = 0.0;
  double width_se = 0.0;
  // Mean over models of budget * mean uniform variance / mean method variance.
  double n_eff = 0.0;
  double n_eff_se = 0.0;
  double rmse = 0.0;
  double rmse_se = 0.0;
};

struct ExperimentResult {
  std::vector<RunRecord> runs;
  std::vector<MetricsRow> metrics;
  std::vector<int> budgets;
  TuningResult tuning;
};

// Prepared data shared by the CLI subcommands.
struct PreparedData {
  OutcomeMatrix full_history;  // before masking
  OutcomeMatrix history;       // after masking
  OutcomeMatrix test;
  std::vector<double> true_thetas;
};

PreparedData PrepareData(const ExperimentConfig& cfg);

ExperimentResult RunExperiment(const ExperimentConfig& cfg, int threads);

// Fills n_eff on every successful record against the uniform runs with the
// same (budget, model). Records without a uniform reference keep no n_eff.
void AssignEffectiveSampleSizes(std::vector<RunRecord>& runs);

std::vector<MetricsRow> Aggregate(const std::vector<RunRecord>& runs);

// Adds one "best_baseline" row per budget: the stream/traditional method with
// the highest n_eff, chosen after the fact.
void AppendPosthocBest(std::vector<MetricsRow>& metrics);

void WriteRawCsv(const std::vector<RunRecord>& runs, std::ostream& out);
std::vector<RunRecord> ReadRawCsv(std::istream& in);
void WriteMetricsCsv(const std::vector<MetricsRow>& rows, std::ostream& out);

struct AuditRow {
  int model = 0;
  double key = 0.0;
  double coverage = 0.0;
  double smoothed = 0.0;
  double sd = 0.0;
};

// Locally weighted coverage: for each model, a Gaussian-kernel mean and SD
// over its K nearest neighbours in `keys`; bandwidth is the distance to the
// K-th neighbour.
std::vector<AuditRow> CoverageAudit(const std::vector<double>& keys,
                                    const std::vector<double>& coverage, int k);

void WriteAuditCsv(const std::vector<AuditRow>& rows, std::ostream& out);

}  // namespace faq

#endif  // FAQ_HARNESS_H_
