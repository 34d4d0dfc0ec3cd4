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

#include "faq/policy.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "faq/errors.h"

namespace faq {

namespace {

constexpr double kLogFloor = 1e-300;

double Sum(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0);
}

}  // namespace

std::string ToString(ReplacementMode mode) {
  return mode == ReplacementMode::kWithReplacement ? "with_replacement"
                                                   : "without_replacement_adhoc";
}

ReplacementMode ParseReplacementMode(const std::string& s) {
  if (s == "with_replacement") return ReplacementMode::kWithReplacement;
  if (s == "without_replacement_adhoc") {
    return ReplacementMode::kWithoutReplacementAdHoc;
  }
  throw ArgumentError("unknown replacement mode '" + s + "'");
}

std::string ToString(LabelRule rule) {
  switch (rule) {
    case LabelRule::kBernoulli: return "bernoulli";
    case LabelRule::kNeyman: return "neyman";
    case LabelRule::kMinRule: return "minrule";
  }
  return "?";
}

void PolicyConfig::Validate() const {
  if (!(rho >= 0.0 && rho < 1.0)) throw ArgumentError("rho must lie in [0, 1)");
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw ArgumentError("gamma must lie in [0, 1)");
  }
  if (!(beta0 > 0.0 && beta0 <= 1.0)) {
    throw ArgumentError("beta0 must lie in (0, 1]");
  }
  if (!(tau > 0.0 && tau <= 1.0)) throw ArgumentError("tau must lie in (0, 1]");
  if (budget < 1) throw ArgumentError("budget must be >= 1");
}

std::vector<double> OracleScore(const PredictionVector& p) {
  std::vector<double> s(p.values.size());
  for (std::size_t j = 0; j < s.size(); ++j) {
    const double pj = p.values[static_cast<Eigen::Index>(j)];
    s[j] = std::sqrt(pj * (1.0 - pj));
  }
  return s;
}

std::vector<double> ActiveLearningScore(const GaussianBelief& b,
                                        const Eigen::MatrixXd& v) {
  if (v.cols() != b.mean.size()) {
    throw ArgumentError("question factors do not match belief dimension");
  }
  const Eigen::Index nq = v.rows();
  Eigen::VectorXd w = v * b.mean;
  for (Eigen::Index j = 0; j < nq; ++j) {
    const double p = Sigmoid(w[j]);
    w[j] = p * (1.0 - p);
  }
  const Eigen::VectorXd g = v.transpose() * w / static_cast<double>(nq);
  const Eigen::VectorXd cross = v * (b.cov * g);
  const Eigen::VectorXd quad = (v * b.cov).cwiseProduct(v).rowwise().sum();

  std::vector<double> d(static_cast<std::size_t>(nq));
  for (Eigen::Index j = 0; j < nq; ++j) {
    d[j] = w[j] * cross[j] * cross[j] / (1.0 + w[j] * quad[j]);
  }
  return d;
}

Schedule ScheduleAt(int t, const PolicyConfig& cfg) {
  const double nb = cfg.budget;
  Schedule s;
  s.alpha = cfg.rho > 0.0 ? std::max(0.0, 1.0 - t / (cfg.rho * nb)) : 0.0;
  s.beta = cfg.gamma > 0.0 ? cfg.beta0 * std::min(1.0, t / (cfg.gamma * nb))
                           : cfg.beta0;
  return s;
}

SamplingDistribution HybridPolicy(std::span<const double> oracle,
                                  std::span<const double> active, double alpha,
                                  double beta, double tau,
                                  std::span<const std::uint8_t> excluded) {
  const std::size_t n = oracle.size();
  if (n == 0 || active.size() != n) {
    throw ArgumentError("score vectors must be nonempty and equally long");
  }
  if (!excluded.empty() && excluded.size() != n) {
    throw ArgumentError("exclusion mask length mismatch");
  }
  if (!(tau >= 0.0 && tau <= 1.0)) throw ArgumentError("tau must lie in [0, 1]");
  auto is_excluded = [&](std::size_t j) {
    return !excluded.empty() && excluded[j] != 0;
  };
  const std::size_t remaining = static_cast<std::size_t>(
      std::count_if(excluded.begin(), excluded.end(),
                    [](std::uint8_t e) { return e == 0; }));
  const std::size_t n_live = excluded.empty() ? n : remaining;
  if (n_live == 0) throw ArgumentError("every item is excluded");

  SamplingDistribution dist;
  dist.probs.assign(n, 0.0);
  const double so = Sum(oracle);
  const double sa = Sum(active);

  std::vector<double> h(n, 0.0);
  if (!(so > 0.0) && !(sa > 0.0)) {
    dist.degenerate = true;
    h.assign(n, 1.0);
  } else {
    // A component without mass hands its weight to the other one.
    const double a = !(sa > 0.0) ? 0.0 : (!(so > 0.0) ? 1.0 : alpha);
    for (std::size_t j = 0; j < n; ++j) {
      const double ho = so > 0.0 ? oracle[j] / so : 0.0;
      const double ha = sa > 0.0 ? active[j] / sa : 0.0;
      const double mix = (1.0 - a) * ho + a * ha;
      if (beta == 0.0) {
        h[j] = 1.0;
      } else {
        h[j] = mix > 0.0 ? std::exp(beta * std::log(std::max(mix, kLogFloor))) : 0.0;
      }
    }
  }

  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (!is_excluded(j)) total += h[j];
  }
  if (!(total > 0.0)) {
    // Every live item had zero tempered mass; spread uniformly.
    dist.degenerate = true;
    for (std::size_t j = 0; j < n; ++j) h[j] = is_excluded(j) ? 0.0 : 1.0;
    total = static_cast<double>(n_live);
  }
  const double floor = tau / static_cast<double>(n_live);
  for (std::size_t j = 0; j < n; ++j) {
    if (is_excluded(j)) continue;
    dist.probs[j] = floor + (1.0 - tau) * h[j] / total;
  }
  return dist;
}

std::vector<double> WaterFill(std::span<const double> weights, double total) {
  const std::size_t n = weights.size();
  if (total > static_cast<double>(n) + 1e-9) {
    throw ArgumentError("water-fill total exceeds number of items");
  }
  std::vector<double> out(n, 0.0);
  std::vector<std::uint8_t> capped(n, 0);
  std::size_t n_capped = 0;
  while (true) {
    double free_mass = 0.0;
    std::size_t n_free = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (capped[j]) continue;
      free_mass += weights[j];
      ++n_free;
    }
    const double left = total - static_cast<double>(n_capped);
    if (n_free == 0) break;
    bool changed = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (capped[j]) continue;
      out[j] = free_mass > 0.0 ? weights[j] * left / free_mass
                               : left / static_cast<double>(n_free);
      if (out[j] >= 1.0) {
        out[j] = 1.0;
        capped[j] = 1;
        ++n_capped;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return out;
}

std::vector<double> StreamLabelProbs(std::span<const double> difficulty,
                                     LabelRule rule, int budget, double tau) {
  const std::size_t n = difficulty.size();
  if (n == 0) throw ArgumentError("empty difficulty vector");
  if (budget < 0 || static_cast<std::size_t>(budget) > n) {
    throw ArgumentError("budget must lie in [0, number of questions]");
  }
  if (!(tau >= 0.0 && tau <= 1.0)) throw ArgumentError("tau must lie in [0, 1]");
  const double nd = static_cast<double>(n);
  if (rule == LabelRule::kBernoulli) {
    return std::vector<double>(n, budget / nd);
  }
  std::vector<double> raw(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double p = std::clamp(difficulty[j], 0.0, 1.0);
    raw[j] = rule == LabelRule::kNeyman ? std::sqrt(p * (1.0 - p))
                                        : std::min(p, 1.0 - p);
  }
  const double mass = Sum(raw);
  std::vector<double> mixed(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double norm = mass > 0.0 ? raw[j] / mass : 1.0 / nd;
    mixed[j] = tau / nd + (1.0 - tau) * norm;
  }
  return WaterFill(mixed, budget);
}

double BudgetStabilized(double pi, int labels_used, int budget,
                        double expected_remaining) {
  if (labels_used >= budget || !(pi > 0.0)) return 0.0;
  if (!(expected_remaining > 0.0)) return 0.0;
  return std::clamp(pi * (budget - labels_used) / expected_remaining, 0.0, 1.0);
}

std::vector<double> StabilizedInclusionProbs(std::span<const double> plan,
                                             int budget) {
  const std::size_t n = plan.size();
  std::vector<double> suffix(n + 1, 0.0);
  for (std::size_t t = n; t-- > 0;) suffix[t] = suffix[t + 1] + plan[t];

  std::vector<double> used(static_cast<std::size_t>(budget) + 1, 0.0);
  used[0] = 1.0;
  std::vector<double> next(used.size());
  std::vector<double> inclusion(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    std::fill(next.begin(), next.end(), 0.0);
    double p_label = 0.0;
    for (int l = 0; l <= budget; ++l) {
      const double mass = used[l];
      if (mass == 0.0) continue;
      const double pi = BudgetStabilized(plan[t], l, budget, suffix[t]);
      p_label += mass * pi;
      next[l] += mass * (1.0 - pi);
      if (pi > 0.0) next[l + 1] += mass * pi;
    }
    inclusion[t] = p_label;
    used.swap(next);
  }
  return inclusion;
}

}  // namespace faq
