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

// Gaussian belief over a new model's latent factor and the online Laplace
// update that folds in one Bernoulli answer at a time.

#ifndef FAQ_BELIEF_H_
#define FAQ_BELIEF_H_

#include <cmath>
#include <string>

#include <Eigen/Dense>

namespace faq {

inline constexpr double kProbClamp = 1e-6;

struct GaussianBelief {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  int dim() const { return static_cast<int>(mean.size()); }
};

// Per-question correctness predictions, clamped to [1e-6, 1 - 1e-6].
struct PredictionVector {
  Eigen::VectorXd values;
  double sum = 0.0;
};

// Unclamped logistic sigmoid.
inline double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow.
inline double Softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// Throws ArgumentError on shape mismatch or non-finite entries.
void ValidateBelief(const GaussianBelief& b);

PredictionVector Predict(const GaussianBelief& b, const Eigen::MatrixXd& v);

// One-observation Laplace update linearized at the prior mean:
//   w = p(1-p),  S' = S - w S v v^T S / (1 + w v^T S v),  m' = m + S'(z-p)v.
// S' is symmetrized and checked by Cholesky; one 1e-10 I re-jitter is tried
// before throwing NumericalError.
GaussianBelief LaplaceUpdate(const GaussianBelief& b, const Eigen::VectorXd& v,
                             int z);

struct LaplaceCheck {
  // max |m_post - argmax log posterior|.
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Diagnostic: compares the Laplace mean against the mode of the exact
// one-observation log posterior, found by damped Newton from the prior mean
// (at most 50 iterations). Not used on the estimation path.
LaplaceCheck PosteriorNllCheck(const GaussianBelief& prior,
                               const Eigen::VectorXd& v, int z,
                               const GaussianBelief& post);

// Row 0: mean; rows 1..k: covariance.
void SaveBelief(const GaussianBelief& b, const std::string& path);
GaussianBelief LoadBelief(const std::string& path);

}  // namespace faq

#endif  // FAQ_BELIEF_H_
