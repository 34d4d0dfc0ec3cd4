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

// Logistic latent-factor model P(H_ij = 1) = sigmoid(u_i . v_j), fitted on the
// observed cells of a historical outcome matrix.

#ifndef FAQ_FACTOR_MODEL_H_
#define FAQ_FACTOR_MODEL_H_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "faq/belief.h"
#include "faq/outcome_matrix.h"

namespace faq {

struct FactorSet {
  Eigen::MatrixXd u;  // n_models x k
  Eigen::MatrixXd v;  // n_questions x k

  int k() const { return static_cast<int>(u.cols()); }
};

struct FitConfig {
  double weight_decay = 1e-3;
  double learning_rate = 1e-2;
  int max_iters = 2000;
  double init_scale = 0.1;
  std::uint64_t seed = 0;
  // Stop when the relative objective change over `window` iterations drops
  // below this value.
  double convergence_tol = 1e-6;
  int window = 10;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void Validate() const;
};

struct FitResult {
  FactorSet factors;
  // objective_trace[0] is the loss at initialization; entry t is the loss
  // after t optimizer steps.
  std::vector<double> objective_trace;
  int iterations = 0;

  double initial_objective() const { return objective_trace.front(); }
  double final_objective() const { return objective_trace.back(); }
};

struct FactorGradient {
  Eigen::MatrixXd du;
  Eigen::MatrixXd dv;
};

double MaskedNll(const FactorSet& f, const OutcomeMatrix& h);
FactorGradient MaskedNllGrad(const FactorSet& f, const OutcomeMatrix& h);

// Full-batch AdamW on the masked negative log-likelihood.
FitResult Fit(const OutcomeMatrix& h, int k, const FitConfig& cfg);

// Held-out accuracy (threshold 0.5) of `f` on cells where `mask` is set.
double HoldoutAccuracy(const FactorSet& f, const OutcomeMatrix& truth,
                       const std::vector<std::uint8_t>& mask);

struct CvCell {
  int k = 0;
  double weight_decay = 0.0;
  double mean_accuracy = 0.0;
  double std_error = 0.0;
  std::vector<double> fold_accuracy;
};

struct CvResult {
  int k = 0;
  double weight_decay = 0.0;
  std::vector<CvCell> table;
};

// Grid search with MCAR holdouts (1/folds of observed cells per fold) and
// the one-standard-error rule: among cells whose mean accuracy is at least
// best mean minus best's SE, pick the smallest k, then the largest decay.
CvResult CrossValidate(const OutcomeMatrix& h_train, const std::vector<int>& k_grid,
                       const std::vector<double>& decay_grid, int folds,
                       std::uint64_t seed, const FitConfig& base = {});

// Mean and sample covariance of model factors plus a small ridge
// 1e-6 * mean(diag) (or 1e-6 when the diagonal is zero).
GaussianBelief EmpiricalPrior(const Eigen::MatrixXd& u_hist);

// U.csv, V.csv and fit.json in `dir`.
void SaveFactors(const FactorSet& f, const std::string& dir, double weight_decay,
                 std::uint64_t seed, double final_objective);
FactorSet LoadFactors(const std::string& dir);

void SaveDenseCsv(const Eigen::MatrixXd& m, const std::string& path);
Eigen::MatrixXd LoadDenseCsv(const std::string& path);

}  // namespace faq

#endif  // FAQ_FACTOR_MODEL_H_
