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

// Sampling policies. Direct-selection rounds mix a variance-minimizing score
// sqrt(p(1-p)) with an active-learning score on a schedule, temper the mix,
// and floor it with uniform mass. Stream baselines get per-item label
// probabilities and a budget-tracking wrapper.

#ifndef FAQ_POLICY_H_
#define FAQ_POLICY_H_

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "faq/belief.h"
#include "faq/outcome_matrix.h"

namespace faq {

enum class ReplacementMode { kWithReplacement, kWithoutReplacementAdHoc };

std::string ToString(ReplacementMode mode);
ReplacementMode ParseReplacementMode(const std::string& s);

struct PolicyConfig {
  double rho = 0.5;    // exploration-to-exploitation governor
  double gamma = 0.5;  // tempering governor
  double beta0 = 1.0;  // maximum tempering exponent
  double tau = 0.25;   // uniform-mixing strength
  int budget = 1;
  ReplacementMode mode = ReplacementMode::kWithReplacement;

  // rho and gamma may be 0 (degenerate schedules); tau must lie in (0, 1].
  void Validate() const;
};

struct SamplingDistribution {
  std::vector<double> probs;
  int round = 0;
  // Set when both scores carried no mass and the uniform fallback was used.
  bool degenerate = false;
};

std::vector<double> OracleScore(const PredictionVector& p);

// d(j) = w_j (v_j^T S g)^2 / (1 + w_j v_j^T S v_j), g = mean_j' w_j' v_j',
// w_j = p_j (1 - p_j) with unclamped p. O(n_questions k^2).
std::vector<double> ActiveLearningScore(const GaussianBelief& b,
                                        const Eigen::MatrixXd& v);

struct Schedule {
  double alpha = 0.0;
  double beta = 0.0;
};

// alpha_t = max(0, 1 - t / (rho n_b)), beta_t = beta0 min(1, t / (gamma n_b));
// rho = 0 gives alpha = 0 and gamma = 0 gives beta = beta0.
Schedule ScheduleAt(int t, const PolicyConfig& cfg);

// Mix, temper and tau-floor the two score vectors. `excluded` (optional)
// marks already-queried items for the ad-hoc without-replacement variant:
// they get probability 0 and the floor spreads over the remaining items.
SamplingDistribution HybridPolicy(std::span<const double> oracle,
                                  std::span<const double> active, double alpha,
                                  double beta, double tau,
                                  std::span<const std::uint8_t> excluded = {});

enum class LabelRule { kBernoulli, kNeyman, kMinRule };

std::string ToString(LabelRule rule);

// Scales nonnegative weights so they sum to `total` with every entry capped
// at 1 (water-filling). Requires total <= number of entries.
std::vector<double> WaterFill(std::span<const double> weights, double total);

// Per-item label probabilities in stream order, summing to `budget`.
std::vector<double> StreamLabelProbs(std::span<const double> difficulty,
                                     LabelRule rule, int budget, double tau);
inline std::vector<double> StreamLabelProbs(const DifficultyVector& d,
                                            LabelRule rule, int budget,
                                            double tau) {
  return StreamLabelProbs(d.values, rule, budget, tau);
}

// clip(pi * (budget - used) / expected_remaining, 0, 1); 0 once the budget
// is spent.
double BudgetStabilized(double pi, int labels_used, int budget,
                        double expected_remaining);

// Marginal probability that each item is labeled when `plan` is walked in
// order with BudgetStabilized draws. Exact, by dynamic programming over the
// number of labels used.
std::vector<double> StabilizedInclusionProbs(std::span<const double> plan,
                                             int budget);

}  // namespace faq

#endif  // FAQ_POLICY_H_
