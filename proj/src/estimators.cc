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

#include "faq/estimators.h"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>

#include "faq/errors.h"
#include "faq/random.h"
#include "faq/text.h"

namespace faq {

namespace {

void CheckAnswers(std::span<const std::uint8_t> answers, std::size_t n) {
  if (answers.size() != n) {
    throw ArgumentError("answer vector length " + std::to_string(answers.size()) +
                        " != number of questions " + std::to_string(n));
  }
  for (auto a : answers) {
    if (a > 1) throw ArgumentError("answers must be 0 or 1");
  }
}

void CheckBudget(int budget, std::size_t n) {
  if (budget < 1 || static_cast<std::size_t>(budget) > n) {
    throw ArgumentError("budget must lie in [1, number of questions]");
  }
}

std::vector<double> Suffix(std::span<const double> x) {
  std::vector<double> s(x.size() + 1, 0.0);
  for (std::size_t t = x.size(); t-- > 0;) s[t] = s[t + 1] + x[t];
  return s;
}

EstimateReport StreamReport(double sum, const std::vector<double>& resid,
                            const std::vector<double>& incl, std::size_t n, int budget,
                            double alpha) {
  EstimateReport r;
  const double nd = static_cast<double>(n);
  r.budget = budget;
  r.theta_hat = sum / nd;
  r.estimator_variance = StreamVariance(resid, incl, n);
  r.sigma_hat = std::sqrt(r.estimator_variance * budget);
  const Interval ci = WaldCiFromSe(r.theta_hat, std::sqrt(r.estimator_variance), alpha);
  r.ci_low = ci.low;
  r.ci_high = ci.high;
  r.labels_used = static_cast<int>(resid.size());
  return r;
}

// Label plan of the factor-model stream ablation under current predictions.
std::vector<double> MinRulePlan(const PredictionVector& pred, int budget,
                                double tau) {
  std::vector<double> p(pred.values.data(), pred.values.data() + pred.values.size());
  return StreamLabelProbs(p, LabelRule::kMinRule, budget, tau);
}

// Core loop shared by the factor-model and constant-prediction variants.
template <typename PredictFn, typename UpdateFn, typename ActiveFn>
QueryTrace PaiLoop(std::span<const std::uint8_t> answers, const PolicyConfig& cfg,
                   std::uint64_t seed, PredictFn predict, ActiveFn active,
                   UpdateFn update) {
  const std::size_t n = answers.size();
  QueryTrace trace;
  trace.n_questions = static_cast<int>(n);
  trace.seed = seed;
  trace.mode = cfg.mode;
  trace.rounds.reserve(static_cast<std::size_t>(cfg.budget));
  const bool without = cfg.mode == ReplacementMode::kWithoutReplacementAdHoc;
  std::vector<std::uint8_t> queried(without ? n : 0, 0);
  const CounterRng root(seed);
  std::vector<double> zeros(n, 0.0);

  for (int t = 1; t <= cfg.budget; ++t) {
    const PredictionVector pred = predict();
    const std::vector<double> so = OracleScore(pred);
    const Schedule sched = ScheduleAt(t, cfg);
    const std::vector<double> sa = sched.alpha > 0.0 ? active() : zeros;
    const SamplingDistribution dist =
        HybridPolicy(so, sa, sched.alpha, sched.beta, cfg.tau, queried);
    if (dist.degenerate) ++trace.degenerate_rounds;

    CounterRng rng = root.Split(static_cast<std::uint64_t>(t));
    const std::size_t idx = SampleIndex(dist.probs, rng.Uniform());
    QueryRecord rec;
    rec.t = t;
    rec.index = static_cast<int>(idx);
    // The ad-hoc variant draws from the restricted distribution but keeps
    // the unrestricted q_t(I_t) in the estimator.
    rec.q_sel = without ? HybridPolicy(so, sa, sched.alpha, sched.beta, cfg.tau).probs[idx]
                        : dist.probs[idx];
    rec.z = answers[idx];
    rec.p_sel = pred.values[static_cast<Eigen::Index>(idx)];
    rec.pred_sum = pred.sum;
    trace.rounds.push_back(rec);

    try {
      update(idx, rec.z);
    } catch (const NumericalError& e) {
      throw NumericalError("round " + std::to_string(t) + ": " + e.what());
    }
    if (without) queried[idx] = 1;
  }
  return trace;
}

void CheckPolicy(const PolicyConfig& cfg, std::size_t n) {
  cfg.Validate();
  CheckBudget(cfg.budget, n);
}

}  // namespace

double NormalQuantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    throw ArgumentError("quantile level must lie in [0, 1]");
  }
  // Acklam's rational approximation followed by one Halley step on erfc.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00, 2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

Interval WaldCiFromSe(double theta_hat, double std_error, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
  if (!(std_error >= 0.0)) throw ArgumentError("standard error must be >= 0");
  const double half = NormalQuantile(1.0 - alpha / 2.0) * std_error;
  Interval ci{std::clamp(theta_hat - half, 0.0, 1.0),
              std::clamp(theta_hat + half, 0.0, 1.0)};
  return ci;
}

Interval WaldCi(double theta_hat, double sigma_hat, int budget, double alpha) {
  if (budget < 1) throw ArgumentError("budget must be >= 1");
  return WaldCiFromSe(theta_hat, sigma_hat / std::sqrt(static_cast<double>(budget)),
                      alpha);
}

double PaiEstimate(const QueryTrace& trace) {
  if (trace.rounds.empty()) throw ArgumentError("empty trace");
  const double nq = trace.n_questions;
  double sum = 0.0;
  for (const auto& r : trace.rounds) {
    sum += r.pred_sum / nq + (r.z - r.p_sel) / (nq * r.q_sel);
  }
  return sum / static_cast<double>(trace.rounds.size());
}

double PaiVarianceRaw(const QueryTrace& trace) {
  if (trace.rounds.empty()) throw ArgumentError("empty trace");
  const double nq = trace.n_questions;
  const double nb = static_cast<double>(trace.rounds.size());
  double ht_total = 0.0;
  for (const auto& r : trace.rounds) ht_total += r.z / r.q_sel;
  ht_total /= nb;
  double first = 0.0;
  double second = 0.0;
  for (const auto& r : trace.rounds) {
    const double resid = (r.z - r.p_sel) / r.q_sel;
    first += resid * resid;
    const double gap = ht_total - r.pred_sum;
    second += gap * gap;
  }
  return (first - second) / (nb * nq * nq);
}

double PaiVariance(const QueryTrace& trace) {
  return std::max(0.0, PaiVarianceRaw(trace));
}

EstimateReport PaiReport(const QueryTrace& trace, double alpha,
                         const std::string& method) {
  EstimateReport r;
  r.method = method;
  r.seed = trace.seed;
  r.budget = static_cast<int>(trace.rounds.size());
  r.theta_hat = PaiEstimate(trace);
  const double var = PaiVariance(trace);
  r.sigma_hat = std::sqrt(var);
  r.estimator_variance = var / r.budget;
  const Interval ci = WaldCi(r.theta_hat, r.sigma_hat, r.budget, alpha);
  r.ci_low = ci.low;
  r.ci_high = ci.high;
  r.labels_used = r.budget;
  return r;
}

std::size_t SampleIndex(std::span<const double> probs, double u) {
  double total = 0.0;
  for (double p : probs) total += p;
  const double target = u * total;
  double cum = 0.0;
  std::size_t last_positive = probs.size();
  for (std::size_t j = 0; j < probs.size(); ++j) {
    if (!(probs[j] > 0.0)) continue;
    cum += probs[j];
    last_positive = j;
    if (cum > target) return j;
  }
  if (last_positive == probs.size()) {
    throw ArgumentError("sampling distribution has no positive mass");
  }
  return last_positive;
}

PaiRun RunPai(std::span<const std::uint8_t> answers, const Eigen::MatrixXd& v,
              const GaussianBelief& prior, const PolicyConfig& cfg,
              std::uint64_t seed, double alpha) {
  const std::size_t n = static_cast<std::size_t>(v.rows());
  CheckAnswers(answers, n);
  CheckPolicy(cfg, n);
  ValidateBelief(prior);
  if (prior.dim() != v.cols()) {
    throw ArgumentError("prior dimension does not match question factors");
  }

  GaussianBelief belief = prior;
  PaiRun run;
  run.trace = PaiLoop(
      answers, cfg, seed, [&] { return Predict(belief, v); },
      [&] { return ActiveLearningScore(belief, v); },
      [&](std::size_t idx, int z) {
        belief = LaplaceUpdate(belief, v.row(static_cast<Eigen::Index>(idx)).transpose(), z);
      });
  run.report = PaiReport(run.trace, alpha,
                         cfg.mode == ReplacementMode::kWithReplacement ? "faq" : "faq_worep");
  return run;
}

PaiRun RunPaiConstant(std::span<const std::uint8_t> answers, double constant,
                      const PolicyConfig& cfg, std::uint64_t seed, double alpha) {
  const std::size_t n = answers.size();
  CheckAnswers(answers, n);
  CheckPolicy(cfg, n);
  if (!(constant > 0.0 && constant < 1.0)) {
    throw ArgumentError("constant prediction must lie in (0, 1)");
  }
  PredictionVector pred;
  pred.values = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), constant);
  pred.sum = pred.values.sum();
  const std::vector<double> zeros(n, 0.0);
  PaiRun run;
  run.trace = PaiLoop(
      answers, cfg, seed, [&] { return pred; }, [&] { return zeros; },
      [](std::size_t, int) {});
  run.report = PaiReport(run.trace, alpha, "faq_constant");
  return run;
}

void WriteTrace(const QueryTrace& trace, std::ostream& out) {
  out << "t,I_t,q_sel,z,p_sel,pred_sum\n";
  for (const auto& r : trace.rounds) {
    out << r.t << ',' << r.index << ',' << FormatDouble(r.q_sel) << ',' << r.z << ','
        << FormatDouble(r.p_sel) << ',' << FormatDouble(r.pred_sum) << '\n';
  }
}

QueryTrace ReadTrace(std::istream& in, int n_questions) {
  QueryTrace trace;
  trace.n_questions = n_questions;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (Trim(line).empty()) continue;
    if (header) {
      header = false;
      if (Trim(line) != "t,I_t,q_sel,z,p_sel,pred_sum") {
        throw ParseError("unexpected trace header");
      }
      continue;
    }
    const auto cells = SplitCsvLine(Trim(line));
    if (cells.size() != 6) throw DimensionError("trace rows need 6 cells");
    QueryRecord r;
    r.t = static_cast<int>(ParseInt(cells[0], "t"));
    r.index = static_cast<int>(ParseInt(cells[1], "I_t"));
    r.q_sel = ParseDouble(cells[2], "q_sel");
    r.z = static_cast<int>(ParseInt(cells[3], "z"));
    r.p_sel = ParseDouble(cells[4], "p_sel");
    r.pred_sum = ParseDouble(cells[5], "pred_sum");
    trace.rounds.push_back(r);
  }
  return trace;
}

EstimateReport RunAipwStream(std::span<const std::uint8_t> answers,
                             std::span<const double> difficulty,
                             BaselinePredictor base, LabelRule rule, int budget,
                             double tau, std::uint64_t seed, double alpha) {
  const std::size_t n = answers.size();
  CheckAnswers(answers, difficulty.size());
  CheckBudget(budget, n);
  const std::vector<double> plan = StreamLabelProbs(difficulty, rule, budget, tau);
  const std::vector<double> suffix = Suffix(plan);
  const std::vector<double> inclusion = StabilizedInclusionProbs(plan, budget);

  const CounterRng root(seed);
  double sum = 0.0;
  std::vector<double> resids, incls;
  for (std::size_t t = 0; t < n; ++t) {
    const int labels = static_cast<int>(resids.size());
    const double pi = BudgetStabilized(plan[t], labels, budget, suffix[t]);
    CounterRng rng = root.Split(t);
    const bool label = pi > 0.0 && rng.Uniform() < pi;
    const double pb = base == BaselinePredictor::kZero ? 0.0 : difficulty[t];
    sum += pb;
    if (!label) continue;
    const double incl = inclusion[t];
    assert(incl > 0.0);
    const double resid = answers[t] - pb;
    sum += resid / incl;
    resids.push_back(resid);
    incls.push_back(incl);
  }
  EstimateReport r = StreamReport(sum, resids, incls, n, budget, alpha);
  r.seed = seed;
  r.method = std::string(base == BaselinePredictor::kZero ? "zero_" : "pbar_") +
             ToString(rule);
  return r;
}

EstimateReport RunTraditionalActiveInference(std::span<const std::uint8_t> answers,
                                             const Eigen::MatrixXd& v,
                                             const GaussianBelief& prior,
                                             double tau, int budget,
                                             std::uint64_t seed, double alpha) {
  const std::size_t n = static_cast<std::size_t>(v.rows());
  CheckAnswers(answers, n);
  CheckBudget(budget, n);
  ValidateBelief(prior);

  GaussianBelief belief = prior;
  PredictionVector pred = Predict(belief, v);
  std::vector<double> plan = MinRulePlan(pred, budget, tau);
  std::vector<double> suffix = Suffix(plan);

  const CounterRng root(seed);
  double sum = 0.0;
  std::vector<double> resids, incls;
  for (std::size_t t = 0; t < n; ++t) {
    const auto ti = static_cast<Eigen::Index>(t);
    const int labels = static_cast<int>(resids.size());
    const double pi = BudgetStabilized(plan[t], labels, budget, suffix[t]);
    CounterRng rng = root.Split(t);
    const bool label = pi > 0.0 && rng.Uniform() < pi;
    const double pt = pred.values[ti];
    sum += pt;
    if (!label) continue;
    const int z = answers[t];
    const double resid = z - pt;
    sum += resid / pi;
    resids.push_back(resid);
    incls.push_back(pi);
    try {
      belief = LaplaceUpdate(belief, v.row(ti).transpose(), z);
    } catch (const NumericalError& e) {
      throw NumericalError("stream item " + std::to_string(t) + ": " + e.what());
    }
    pred = Predict(belief, v);
    plan = MinRulePlan(pred, budget, tau);
    suffix = Suffix(plan);
  }
  EstimateReport r = StreamReport(sum, resids, incls, n, budget, alpha);
  r.seed = seed;
  r.method = "traditional";
  return r;
}

double StreamVariance(std::span<const double> resid, std::span<const double> incl,
                      std::size_t n) {
  if (resid.size() != incl.size()) throw DimensionError("residual and weight lengths differ");
  const double nd = static_cast<double>(n);
  const std::size_t m = resid.size();
  if (m < 2) {
    double v = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      v += resid[i] * resid[i] * (1.0 - incl[i]) / (incl[i] * incl[i]);
    }
    return v / (nd * nd);
  }
  // Centre the expanded residuals at their (1 - pi)-weighted mean; for equal
  // pi this is the finite-population SRS variance.
  double wsum = 0.0;
  double center = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    wsum += 1.0 - incl[i];
    center += (1.0 - incl[i]) * resid[i] / incl[i];
  }
  if (!(wsum > 0.0)) return 0.0;
  center /= wsum;
  double v = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double d = resid[i] / incl[i] - center;
    v += (1.0 - incl[i]) * d * d;
  }
  const double md = static_cast<double>(m);
  return md / (md - 1.0) * v / (nd * nd);
}

double EffectiveSampleSize(double v_method, double v_uniform, int budget) {
  if (!(v_uniform > 0.0)) throw ArgumentError("uniform variance must be > 0");
  if (v_method < 0.0) throw ArgumentError("method variance must be >= 0");
  if (v_method == 0.0) return std::numeric_limits<double>::infinity();
  return v_uniform / v_method * budget;
}

}  // namespace faq
