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

// Evaluation runs and their estimators.
//
// A direct-selection run draws I_t ~ q_t over the whole bank for n_b rounds
// and averages the per-round increments
//
//   phi_t = sum_j p_j / N + (z_{I_t} - p_{I_t}) / (N q_t(I_t)),
//
// where p are the factor-model predictions before round t. The increments are
// martingale differences around the bank accuracy, which gives unbiasedness
// and a Wald interval. Stream baselines walk the bank in order and flip a
// label coin per item instead.

#ifndef FAQ_ESTIMATORS_H_
#define FAQ_ESTIMATORS_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "faq/belief.h"
#include "faq/policy.h"

namespace faq {

struct QueryRecord {
  int t = 0;            // 1-based round
  int index = 0;        // queried question
  double q_sel = 0.0;   // q_t(I_t) before any without-replacement restriction
  int z = 0;            // observed outcome
  double p_sel = 0.0;   // prediction for I_t before the update
  double pred_sum = 0.0;  // sum of all predictions before the update
};

struct QueryTrace {
  std::vector<QueryRecord> rounds;
  int n_questions = 0;
  std::uint64_t seed = 0;
  ReplacementMode mode = ReplacementMode::kWithReplacement;
  // Rounds whose policy fell back to uniform.
  int degenerate_rounds = 0;
};

struct EstimateReport {
  std::string method;
  std::uint64_t seed = 0;
  int budget = 0;
  double theta_hat = 0.0;
  // Reported so that the interval half-width is z * sigma_hat / sqrt(budget)
  // for every method.
  double sigma_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  // sigma_hat^2 / budget: the variance the ESS ratio compares.
  double estimator_variance = 0.0;
  int labels_used = 0;
  // Filled in against a uniform reference by the experiment runner.
  std::optional<double> n_eff;
};

// z_{1-p} for the standard normal; accurate to ~1e-15 on (0, 1).
double NormalQuantile(double p);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

// [theta +- z_{1-alpha/2} sigma / sqrt(n)] intersected with [0, 1].
Interval WaldCi(double theta_hat, double sigma_hat, int budget, double alpha);
// Same with an explicit standard error.
Interval WaldCiFromSe(double theta_hat, double std_error, double alpha);

double PaiEstimate(const QueryTrace& trace);
// Unfloored variance (the difference form can dip below zero by rounding).
double PaiVarianceRaw(const QueryTrace& trace);
double PaiVariance(const QueryTrace& trace);

// Builds the report (estimate, variance, interval) from a finished trace.
EstimateReport PaiReport(const QueryTrace& trace, double alpha,
                         const std::string& method = "faq");

struct PaiRun {
  QueryTrace trace;
  EstimateReport report;
};

// Full direct-selection run against a fixed answer vector.
PaiRun RunPai(std::span<const std::uint8_t> answers, const Eigen::MatrixXd& v,
              const GaussianBelief& prior, const PolicyConfig& cfg,
              std::uint64_t seed, double alpha = 0.05);

// Same loop but with predictions fixed to `constant` for every question and
// no belief updates; used to check model-free coverage.
PaiRun RunPaiConstant(std::span<const std::uint8_t> answers, double constant,
                      const PolicyConfig& cfg, std::uint64_t seed,
                      double alpha = 0.05);

void WriteTrace(const QueryTrace& trace, std::ostream& out);
QueryTrace ReadTrace(std::istream& in, int n_questions);

enum class BaselinePredictor { kZero, kDifficultyMeans };

// Stream AIPW baseline. Labels are drawn with BudgetStabilized probabilities
// so no more than `budget` labels are used; each labeled item is weighted by
// its exact marginal inclusion probability.
EstimateReport RunAipwStream(std::span<const std::uint8_t> answers,
                             std::span<const double> difficulty,
                             BaselinePredictor base, LabelRule rule, int budget,
                             double tau, std::uint64_t seed, double alpha = 0.05);

// Stream active inference driven by the factor model: pi_t proportional to
// min(p_t, 1 - p_t) under the current belief, tau-mixed, budget-stabilized;
// the belief is updated on every labeled item.
EstimateReport RunTraditionalActiveInference(std::span<const std::uint8_t> answers,
                                             const Eigen::MatrixXd& v,
                                             const GaussianBelief& prior,
                                             double tau, int budget,
                                             std::uint64_t seed,
                                             double alpha = 0.05);

// Plug-in variance of a stream estimate from its labeled residuals and their
// inclusion probabilities. Budget stabilization makes the label count
// (nearly) fixed, so this uses the fixed-size approximation
//   m/(m-1) * sum (1 - pi)(r/pi - c)^2 / N^2,  c = (1-pi)-weighted mean of r/pi,
// which reduces to the SRS variance under equal pi. Fewer than two labels
// fall back to sum r^2 (1 - pi) / pi^2 / N^2.
double StreamVariance(std::span<const double> resid, std::span<const double> incl,
                      std::size_t n);

// (v_uniform / v_method) * budget; +inf when v_method is 0.
double EffectiveSampleSize(double v_method, double v_uniform, int budget);

// Inverse-CDF draw from `probs` with a uniform in [0, 1). Never returns an
// index of zero probability.
std::size_t SampleIndex(std::span<const double> probs, double u);

}  // namespace faq

#endif  // FAQ_ESTIMATORS_H_
