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

#include "faq/belief.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "faq/errors.h"
#include "faq/text.h"

namespace faq {

namespace {

constexpr double kRejitter = 1e-10;
constexpr int kNewtonMaxIters = 50;

bool IsSpd(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  return llt.info() == Eigen::Success;
}

double LogPosterior(const GaussianBelief& prior, const Eigen::MatrixXd& prec,
                    const Eigen::VectorXd& v, int z, const Eigen::VectorXd& u) {
  const double x = u.dot(v);
  const Eigen::VectorXd d = u - prior.mean;
  return z * x - Softplus(x) - 0.5 * d.dot(prec * d);
}

}  // namespace

void ValidateBelief(const GaussianBelief& b) {
  const auto k = b.mean.size();
  if (k < 1) throw ArgumentError("belief dimension must be >= 1");
  if (b.cov.rows() != k || b.cov.cols() != k) {
    throw ArgumentError("belief covariance shape does not match mean");
  }
  if (!b.mean.allFinite() || !b.cov.allFinite()) {
    throw ArgumentError("belief has non-finite entries");
  }
}

PredictionVector Predict(const GaussianBelief& b, const Eigen::MatrixXd& v) {
  if (v.cols() != b.mean.size()) {
    throw ArgumentError("question factor width " + std::to_string(v.cols()) +
                        " != belief dimension " +
                        std::to_string(b.mean.size()));
  }
  PredictionVector p;
  p.values = v * b.mean;
  for (Eigen::Index j = 0; j < p.values.size(); ++j) {
    p.values[j] = std::clamp(Sigmoid(p.values[j]), kProbClamp, 1.0 - kProbClamp);
  }
  p.sum = p.values.sum();
  return p;
}

GaussianBelief LaplaceUpdate(const GaussianBelief& b, const Eigen::VectorXd& v,
                             int z) {
  if (v.size() != b.mean.size()) {
    throw ArgumentError("question factor length does not match belief");
  }
  if (!v.allFinite()) throw ArgumentError("question factor is not finite");
  if (z != 0 && z != 1) throw ArgumentError("outcome must be 0 or 1");

  const double p = Sigmoid(b.mean.dot(v));
  const double w = p * (1.0 - p);
  const Eigen::VectorXd sv = b.cov * v;
  const double denom = 1.0 + w * v.dot(sv);

  GaussianBelief out;
  out.cov = b.cov - (w / denom) * sv * sv.transpose();
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  if (!IsSpd(out.cov)) {
    out.cov.diagonal().array() += kRejitter;
    if (!IsSpd(out.cov)) {
      throw NumericalError("Laplace update produced a non-SPD covariance");
    }
  }
  out.mean = b.mean + out.cov * v * (z - p);
  return out;
}

LaplaceCheck PosteriorNllCheck(const GaussianBelief& prior,
                               const Eigen::VectorXd& v, int z,
                               const GaussianBelief& post) {
  LaplaceCheck check;
  const Eigen::LLT<Eigen::MatrixXd> prior_llt(prior.cov);
  if (prior_llt.info() != Eigen::Success) {
    throw NumericalError("prior covariance is not SPD");
  }
  const Eigen::MatrixXd prec =
      prior_llt.solve(Eigen::MatrixXd::Identity(prior.dim(), prior.dim()));

  Eigen::VectorXd u = prior.mean;
  double f = LogPosterior(prior, prec, v, z, u);
  for (int it = 0; it < kNewtonMaxIters; ++it) {
    const double s = Sigmoid(u.dot(v));
    const Eigen::VectorXd grad = (z - s) * v - prec * (u - prior.mean);
    if (grad.lpNorm<Eigen::Infinity>() < 1e-13) {
      check.converged = true;
      break;
    }
    const Eigen::MatrixXd neg_hess = prec + s * (1.0 - s) * v * v.transpose();
    const Eigen::VectorXd step = neg_hess.ldlt().solve(grad);

    // Backtracking keeps the objective increasing.
    double t = 1.0;
    Eigen::VectorXd next = u + step;
    double f_next = LogPosterior(prior, prec, v, z, next);
    while (f_next < f && t > 1e-12) {
      t *= 0.5;
      next = u + t * step;
      f_next = LogPosterior(prior, prec, v, z, next);
    }
    if (!next.allFinite()) throw NumericalError("Newton solve diverged");
    check.iterations = it + 1;
    const double moved = (next - u).lpNorm<Eigen::Infinity>();
    u = next;
    f = f_next;
    if (moved < 1e-14) {
      check.converged = true;
      break;
    }
  }
  check.residual = (post.mean - u).lpNorm<Eigen::Infinity>();
  return check;
}

void SaveBelief(const GaussianBelief& b, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write " + path);
  auto write_row = [&](auto&& row) {
    for (Eigen::Index j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      out << FormatDouble(row[j]);
    }
    out << '\n';
  };
  write_row(b.mean);
  for (Eigen::Index i = 0; i < b.cov.rows(); ++i) {
    write_row(Eigen::VectorXd(b.cov.row(i).transpose()));
  }
}

GaussianBelief LoadBelief(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (Trim(line).empty()) continue;
    rows.push_back(ParseDoubleList(line, "belief entry"));
  }
  if (rows.empty()) throw DimensionError("belief file is empty");
  const auto k = static_cast<Eigen::Index>(rows[0].size());
  if (static_cast<Eigen::Index>(rows.size()) != k + 1) {
    throw DimensionError("belief file must have k + 1 rows");
  }
  GaussianBelief b;
  b.mean = Eigen::Map<const Eigen::VectorXd>(rows[0].data(), k);
  b.cov.resize(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (static_cast<Eigen::Index>(rows[i + 1].size()) != k) {
      throw DimensionError("ragged belief covariance row");
    }
    for (Eigen::Index j = 0; j < k; ++j) b.cov(i, j) = rows[i + 1][j];
  }
  ValidateBelief(b);
  return b;
}

}  // namespace faq
