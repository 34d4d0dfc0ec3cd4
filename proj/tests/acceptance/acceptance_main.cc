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

// Acceptance suite: one PASS/FAIL line per criterion. Oracles live here and
// share no code with the library beyond the function under test.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "faq/belief.h"
#include "faq/errors.h"
#include "faq/estimators.h"
#include "faq/factor_model.h"
#include "faq/harness.h"
#include "faq/outcome_matrix.h"
#include "faq/policy.h"
#include "faq/random.h"

namespace {

using faq::CounterRng;
using Clock = std::chrono::steady_clock;

int g_failures = 0;
int g_threads = 1;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void Report(int id, bool pass, const std::string& what, const std::string& detail,
            double secs) {
  std::printf("%s  C%-2d %s: %s [%.1f s]\n", pass ? "PASS" : "FAIL", id, what.c_str(),
              detail.c_str(), secs);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

void Info(const std::string& text) {
  std::printf("      info: %s\n", text.c_str());
  std::fflush(stdout);
}

std::string Fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

struct Stats {
  double mean = 0.0;
  double var = 0.0;  // sample variance
  std::size_t n = 0;
  double se() const { return std::sqrt(var / static_cast<double>(n)); }
};

Stats Summarize(const std::vector<double>& x) {
  Stats s;
  s.n = x.size();
  for (double v : x) s.mean += v;
  s.mean /= static_cast<double>(s.n);
  for (double v : x) s.var += (v - s.mean) * (v - s.mean);
  s.var /= static_cast<double>(s.n - 1);
  return s;
}

std::uint64_t RunSeed(std::uint64_t criterion, std::size_t model, std::size_t seed) {
  return CounterRng(0xACCE97).Split(criterion).Split(model).Split(seed).key();
}

// ---------------------------------------------------------------- C1

// Naive masked NLL in extended precision: the finite-difference target.
long double NaiveNll(const Eigen::MatrixXd& u, const Eigen::MatrixXd& v,
                     const faq::OutcomeMatrix& h) {
  long double total = 0.0L;
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    for (Eigen::Index j = 0; j < v.rows(); ++j) {
      const auto o = h.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      if (o == faq::Outcome::kUnobserved) continue;
      long double x = 0.0L;
      for (Eigen::Index d = 0; d < u.cols(); ++d) {
        x += static_cast<long double>(u(i, d)) * static_cast<long double>(v(j, d));
      }
      const long double y = o == faq::Outcome::kCorrect ? 1.0L : 0.0L;
      total += std::log1p(std::exp(x)) - y * x;
    }
  }
  return total;
}

void GradientOracle() {
  const auto start = Clock::now();
  CounterRng r(101);
  double worst = 0.0;
  int entries = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const int n = 1 + static_cast<int>(r.UniformInt(10));
    const int q = 1 + static_cast<int>(r.UniformInt(10));
    const int k = 1 + static_cast<int>(r.UniformInt(4));
    faq::OutcomeMatrix h(static_cast<std::size_t>(n), static_cast<std::size_t>(q));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < q; ++j) {
        if (r.Uniform() < 0.3) continue;
        h.set(i, j, r.Bernoulli(0.5) ? faq::Outcome::kCorrect : faq::Outcome::kIncorrect);
      }
    }
    h.set(0, 0, faq::Outcome::kCorrect);
    faq::FactorSet f{Eigen::MatrixXd(n, k), Eigen::MatrixXd(q, k)};
    for (int i = 0; i < n * k; ++i) f.u.data()[i] = r.Normal();
    for (int i = 0; i < q * k; ++i) f.v.data()[i] = r.Normal();
    const auto g = faq::MaskedNllGrad(f, h);

    // Richardson-extrapolated central differences, O(h^4) truncation.
    auto fd = [&](Eigen::MatrixXd& m, int idx) {
      auto central = [&](double step) {
        const double keep = m.data()[idx];
        m.data()[idx] = keep + step;
        const long double up = NaiveNll(f.u, f.v, h);
        m.data()[idx] = keep - step;
        const long double down = NaiveNll(f.u, f.v, h);
        m.data()[idx] = keep;
        return static_cast<double>((up - down) / (2.0L * step));
      };
      const double h1 = 1e-3, h2 = 5e-4;
      return (4.0 * central(h2) - central(h1)) / 3.0;
    };
    auto check = [&](Eigen::MatrixXd& m, const Eigen::MatrixXd& grad) {
      for (int idx = 0; idx < m.size(); ++idx) {
        const double num = fd(m, idx);
        const double ana = grad.data()[idx];
        const double denom = std::max(std::abs(num), std::abs(ana));
        if (denom == 0.0) continue;  // parameter touches no observed cell
        worst = std::max(worst, std::abs(num - ana) / denom);
        ++entries;
      }
    };
    check(f.u, g.du);
    check(f.v, g.dv);
  }
  const double secs = Seconds(start);
  Report(1, worst < 1e-5 && secs < 10.0, "gradient vs finite differences",
         "max rel err " + Fmt("%.2e", worst) + " over " + std::to_string(entries) +
             " entries (< 1e-05)",
         secs);
}

// ---------------------------------------------------------------- C2

void ShermanMorrisonOracle() {
  const auto start = Clock::now();
  CounterRng r(202);
  double worst = 0.0;
  for (int k : {1, 2, 4, 8}) {
    for (int rep = 0; rep < 250; ++rep) {
      Eigen::MatrixXd a(k, k);
      for (int i = 0; i < k * k; ++i) a.data()[i] = r.Normal();
      faq::GaussianBelief prior{Eigen::VectorXd(k),
                                a * a.transpose() / k + 0.2 * Eigen::MatrixXd::Identity(k, k)};
      Eigen::VectorXd v(k);
      for (int i = 0; i < k; ++i) {
        prior.mean(i) = r.Normal();
        v(i) = r.Normal();
      }
      const int z = r.Bernoulli(0.5) ? 1 : 0;
      const auto post = faq::LaplaceUpdate(prior, v, z);

      const double p = 1.0 / (1.0 + std::exp(-prior.mean.dot(v)));
      const double w = p * (1.0 - p);
      const Eigen::MatrixXd cov = (prior.cov.inverse() + w * v * v.transpose()).inverse();
      const Eigen::VectorXd mean = prior.mean + cov * v * (z - p);
      worst = std::max(worst, (post.cov - cov).cwiseAbs().maxCoeff());
      worst = std::max(worst, (post.mean - mean).cwiseAbs().maxCoeff());
    }
  }
  const double secs = Seconds(start);
  Report(2, worst < 1e-10 && secs < 5.0, "rank-one update vs explicit inverse",
         "max abs err " + Fmt("%.2e", worst) + " over 1000 draws (< 1e-10)", secs);
}

// ---------------------------------------------------------------- C3

void OptimalPolicyBruteForce() {
  const auto start = Clock::now();
  const double p[3] = {0.2, 0.5, 0.9};
  double best = std::numeric_limits<double>::infinity();
  double arg[3] = {0.0, 0.0, 0.0};
  for (int a = 1; a < 1000; ++a) {
    for (int b = 1; a + b < 1000; ++b) {
      const double q[3] = {a * 1e-3, b * 1e-3, (1000 - a - b) * 1e-3};
      double obj = 0.0;
      for (int j = 0; j < 3; ++j) obj += p[j] * (1.0 - p[j]) / q[j];
      if (obj < best) {
        best = obj;
        std::copy(q, q + 3, arg);
      }
    }
  }
  faq::PredictionVector pv;
  pv.values = Eigen::Vector3d(p[0], p[1], p[2]);
  pv.sum = pv.values.sum();
  const auto s = faq::OracleScore(pv);
  const double total = s[0] + s[1] + s[2];
  double gap = 0.0;
  for (int j = 0; j < 3; ++j) gap = std::max(gap, std::abs(arg[j] - s[j] / total));
  const double secs = Seconds(start);
  Report(3, gap <= 2e-3 && secs < 30.0, "square-root rule is the grid minimizer",
         "L-inf gap " + Fmt("%.2e", gap) + " (<= 2e-03)", secs);
}

// ---------------------------------------------------------------- C4

// Delta-method Var(theta*) before minus after a hypothetical label on j,
// with the post-label covariance from an explicit inverse.
std::vector<double> DirectReduction(const faq::GaussianBelief& b, const Eigen::MatrixXd& v) {
  const Eigen::Index n = v.rows();
  Eigen::VectorXd w(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double p = 1.0 / (1.0 + std::exp(-v.row(j).dot(b.mean)));
    w(j) = p * (1.0 - p);
  }
  const Eigen::VectorXd grad = v.transpose() * w / static_cast<double>(n);
  const double before = grad.dot(b.cov * grad);
  const Eigen::MatrixXd precision = b.cov.inverse();
  std::vector<double> out(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::VectorXd vj = v.row(j).transpose();
    const Eigen::MatrixXd post = (precision + w(j) * vj * vj.transpose()).inverse();
    out[static_cast<std::size_t>(j)] = before - grad.dot(post * grad);
  }
  return out;
}

void ActiveScoreOracle() {
  const auto start = Clock::now();
  CounterRng r(404);
  double worst = 0.0;
  int argmax_mismatch = 0;
  for (int inst = 0; inst < 200; ++inst) {
    const int k = 1 + static_cast<int>(r.UniformInt(4));
    const int n = 2 + static_cast<int>(r.UniformInt(19));
    Eigen::MatrixXd v(n, k), a(k, k);
    for (int i = 0; i < n * k; ++i) v.data()[i] = r.Normal();
    for (int i = 0; i < k * k; ++i) a.data()[i] = r.Normal();
    faq::GaussianBelief b{Eigen::VectorXd(k),
                          a * a.transpose() / k + 0.1 * Eigen::MatrixXd::Identity(k, k)};
    for (int i = 0; i < k; ++i) b.mean(i) = r.Normal();
    const auto d = faq::ActiveLearningScore(b, v);
    const auto oracle = DirectReduction(b, v);
    for (int j = 0; j < n; ++j) worst = std::max(worst, std::abs(d[j] - oracle[j]));
    if (std::max_element(d.begin(), d.end()) - d.begin() !=
        std::max_element(oracle.begin(), oracle.end()) - oracle.begin()) {
      ++argmax_mismatch;
    }
  }
  Report(4, worst < 1e-10 && argmax_mismatch == 0, "active-learning score vs direct reduction",
         std::to_string(argmax_mismatch) + " argmax mismatches, max abs err " +
             Fmt("%.2e", worst) + " (< 1e-10)",
         Seconds(start));
}

// ---------------------------------------------------------------- shared bank

struct Bank {
  faq::SyntheticBank bank;
  faq::FactorSet fitted;
  faq::GaussianBelief prior;
  std::vector<double> pbar;
  std::vector<std::vector<std::uint8_t>> answers;
};

Bank MakeDefaultBank() {
  Bank b;
  b.bank = faq::GenerateBank(faq::SyntheticBankSpec{});
  b.fitted = faq::Fit(b.bank.history, 4, faq::FitConfig{}).factors;
  b.prior = faq::EmpiricalPrior(b.fitted.u);
  b.pbar = faq::DifficultyMeans(b.bank.history).values;
  for (std::size_t i = 0; i < b.bank.test.n_models(); ++i) {
    b.answers.push_back(b.bank.test.AnswerVector(i));
  }
  return b;
}

faq::PolicyConfig Policy(int budget,
                         faq::ReplacementMode mode = faq::ReplacementMode::kWithReplacement) {
  faq::PolicyConfig cfg;
  cfg.budget = budget;
  cfg.mode = mode;
  return cfg;
}

template <typename Fn>
std::vector<faq::EstimateReport> Runs(std::size_t n, Fn fn) {
  std::vector<faq::EstimateReport> out(n);
  faq::ParallelFor(n, g_threads, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

// ---------------------------------------------------------------- C5

void Unbiasedness(const Bank& b) {
  const auto start = Clock::now();
  const std::size_t m = 0;
  const double theta = b.bank.true_thetas[m];
  const int nb = 50, seeds = 2000;
  struct Method {
    std::string name;
    std::function<faq::EstimateReport(std::uint64_t)> run;
  };
  const std::vector<Method> methods = {
      {"faq",
       [&](std::uint64_t s) {
         return faq::RunPai(b.answers[m], b.fitted.v, b.prior, Policy(nb), s).report;
       }},
      {"uniform",
       [&](std::uint64_t s) {
         return faq::RunAipwStream(b.answers[m], b.pbar, faq::BaselinePredictor::kZero,
                                   faq::LabelRule::kBernoulli, nb, 0.25, s);
       }},
      {"neyman",
       [&](std::uint64_t s) {
         return faq::RunAipwStream(b.answers[m], b.pbar, faq::BaselinePredictor::kDifficultyMeans,
                                   faq::LabelRule::kNeyman, nb, 0.25, s);
       }},
      {"minrule",
       [&](std::uint64_t s) {
         return faq::RunAipwStream(b.answers[m], b.pbar, faq::BaselinePredictor::kDifficultyMeans,
                                   faq::LabelRule::kMinRule, nb, 0.25, s);
       }},
      {"traditional",
       [&](std::uint64_t s) {
         return faq::RunTraditionalActiveInference(b.answers[m], b.fitted.v, b.prior, 0.25, nb, s);
       }},
  };
  bool pass = true;
  std::string detail;
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    const auto reports =
        Runs(seeds, [&](std::size_t s) { return methods[mi].run(RunSeed(5, mi, s)); });
    std::vector<double> est;
    for (const auto& r : reports) est.push_back(r.theta_hat);
    const Stats st = Summarize(est);
    const double z = std::abs(st.mean - theta) / st.se();
    pass = pass && z < 3.0;
    detail += methods[mi].name + " " + Fmt("%.2f", z) + " SE; ";
  }
  Report(5, pass, "unbiasedness at n_b=50, 2000 seeds", detail + "(all < 3)", Seconds(start));
}

// ---------------------------------------------------------------- C6

double Coverage(const std::vector<faq::EstimateReport>& reports, const std::vector<double>& theta,
                std::size_t per_model) {
  double hits = 0.0;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const double t = theta[i / per_model];
    hits += (t >= reports[i].ci_low && t <= reports[i].ci_high) ? 1.0 : 0.0;
  }
  return hits / static_cast<double>(reports.size());
}

void CoverageCheck(const Bank& b) {
  const auto start = Clock::now();
  const std::size_t models = b.answers.size(), per_model = 2000 / models;
  const int nb = 50;
  faq::GaussianBelief corrupted = b.prior;
  corrupted.mean = -b.prior.mean;
  corrupted.cov = 0.01 * b.prior.cov;

  auto sweep = [&](const faq::GaussianBelief& prior, std::uint64_t tag) {
    return Runs(models * per_model, [&](std::size_t i) {
      const std::size_t m = i / per_model;
      return faq::RunPai(b.answers[m], b.fitted.v, prior, Policy(nb), RunSeed(tag, m, i % per_model))
          .report;
    });
  };
  const double good = Coverage(sweep(b.prior, 61), b.bank.true_thetas, per_model);
  const double bad = Coverage(sweep(corrupted, 62), b.bank.true_thetas, per_model);
  const auto constant = Runs(models * per_model, [&](std::size_t i) {
    const std::size_t m = i / per_model;
    const double c = 0.05 + 0.9 * CounterRng(63).Split(m).Uniform();
    return faq::RunPaiConstant(b.answers[m], c, Policy(nb), RunSeed(63, m, i % per_model)).report;
  });
  const double flat = Coverage(constant, b.bank.true_thetas, per_model);
  auto in = [](double c) { return c >= 0.92 && c <= 0.97; };
  Report(6, in(good) && in(bad), "FAQ coverage at n_b=50, 2000 runs",
         "fitted prior " + Fmt("%.4f", good) + ", corrupted prior " + Fmt("%.4f", bad) +
             " (in [0.92, 0.97])",
         Seconds(start));
  Info("constant-prediction coverage " + Fmt("%.4f", flat));
}

// ---------------------------------------------------------------- C7

void VarianceConsistency(const Bank& b) {
  const auto start = Clock::now();
  const std::size_t m = 0;
  const int nb = 100, seeds = 5000;
  const auto reports = Runs(seeds, [&](std::size_t s) {
    return faq::RunPai(b.answers[m], b.fitted.v, b.prior, Policy(nb), RunSeed(7, m, s)).report;
  });
  std::vector<double> est;
  double mean_var = 0.0;
  for (const auto& r : reports) {
    est.push_back(r.theta_hat);
    mean_var += r.sigma_hat * r.sigma_hat / nb / seeds;
  }
  const double empirical = Summarize(est).var;
  const double rel = std::abs(mean_var / empirical - 1.0);
  Report(7, rel < 0.15, "variance estimator at n_b=100, 5000 seeds",
         "mean sigma^2/n_b " + Fmt("%.3e", mean_var) + " vs empirical " +
             Fmt("%.3e", empirical) + ", rel diff " + Fmt("%.3f", rel) + " (< 0.15)",
         Seconds(start));
}

// ---------------------------------------------------------------- C8

void Efficiency(const Bank& b) {
  const auto start = Clock::now();
  {
    // Default bank for reference: model 0, n_b = 50.
    const int nb = 50;
    const auto f = Runs(500, [&](std::size_t s) {
      return faq::RunPai(b.answers[0], b.fitted.v, b.prior, Policy(nb), RunSeed(80, 0, s)).report;
    });
    const auto u = Runs(500, [&](std::size_t s) {
      return faq::RunAipwStream(b.answers[0], b.pbar, faq::BaselinePredictor::kZero,
                                faq::LabelRule::kBernoulli, nb, 0.25, RunSeed(81, 0, s));
    });
    double vf = 0.0, vu = 0.0;
    for (std::size_t s = 0; s < 500; ++s) {
      vf += f[s].estimator_variance;
      vu += u[s].estimator_variance;
    }
    Info("default bank (500 questions), model 0: n_eff(FAQ)/n_b " + Fmt("%.2f", vu / vf));
  }

  faq::ExperimentConfig cfg;
  cfg.bank.n_questions = 5000;
  cfg.bank.n_old = 500;
  cfg.bank.n_test = 20;
  cfg.bank.logit_scale = 2.0;
  cfg.bank.seed = 8;
  cfg.budget_fractions = {0.1};
  cfg.methods = {"faq",          "zero_neyman", "zero_minrule", "pbar_bernoulli",
                 "pbar_neyman", "pbar_minrule", "traditional"};
  cfg.seeds = 10;
  cfg.seed = 8;
  cfg.tune_policy = true;
  cfg.val_fraction = 0.02;
  cfg.tune_seeds = 2;
  cfg.grid.rho = {0.0, 0.05, 0.25};
  cfg.grid.gamma = {0.0, 0.05, 0.25};
  cfg.grid.beta0 = {1.0};
  cfg.grid.tau = {0.05, 0.25};
  const auto result = faq::RunExperiment(cfg, g_threads);

  const faq::MetricsRow* faq_row = nullptr;
  const faq::MetricsRow* best = nullptr;
  for (const auto& row : result.metrics) {
    if (row.method == "faq") {
      faq_row = &row;
    } else if (row.method != "traditional" && row.method != "uniform" &&
               (best == nullptr || row.n_eff > best->n_eff)) {
      best = &row;
    } else if (row.method == "traditional") {
      Info("traditional ablation n_eff/n_b " + Fmt("%.2f", row.n_eff / row.budget));
    }
  }
  const double nb = faq_row->budget;
  const double ratio = faq_row->n_eff / nb;
  const double gap = faq_row->n_eff - best->n_eff;
  const double se = std::hypot(faq_row->n_eff_se, best->n_eff_se);
  const auto& tuned = result.tuning.best.front();
  Info("tuned policy rho " + Fmt("%g", tuned.rho) + " gamma " + Fmt("%g", tuned.gamma) +
       " beta0 " + Fmt("%g", tuned.beta0) + " tau " + Fmt("%g", tuned.tau) + "; tuning queries " +
       std::to_string(result.tuning.queries_spent));
  Report(8, ratio >= 1.5 && gap >= 3.0 * se,
         "efficiency on 5000-question bank at 10% budget",
         "n_eff(FAQ)/n_b " + Fmt("%.2f", ratio) + " (>= 1.5); best baseline " + best->method +
             " " + Fmt("%.2f", best->n_eff / nb) + ", gap " + Fmt("%.1f", gap / se) +
             " SE (>= 3)",
         Seconds(start));
}

// ---------------------------------------------------------------- C9

void ReplacementAblation(const Bank& b) {
  const auto start = Clock::now();
  const std::size_t models = b.answers.size(), per_model = 2000 / models;
  const int n = static_cast<int>(b.fitted.v.rows());
  struct Cell {
    double coverage = 0.0;
    double rmse = 0.0;
  };
  auto sweep = [&](int nb, faq::ReplacementMode mode) {
    const auto reports = Runs(models * per_model, [&](std::size_t i) {
      const std::size_t m = i / per_model;
      return faq::RunPai(b.answers[m], b.fitted.v, b.prior, Policy(nb, mode),
                         RunSeed(9, m, i % per_model))
          .report;
    });
    Cell c;
    c.coverage = Coverage(reports, b.bank.true_thetas, per_model);
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const double e = reports[i].theta_hat - b.bank.true_thetas[i / per_model];
      c.rmse += e * e / static_cast<double>(reports.size());
    }
    c.rmse = std::sqrt(c.rmse);
    return c;
  };
  const int large = static_cast<int>(std::lround(0.25 * n));
  const int small = static_cast<int>(std::lround(0.025 * n));
  const Cell lw = sweep(large, faq::ReplacementMode::kWithReplacement);
  const Cell lo = sweep(large, faq::ReplacementMode::kWithoutReplacementAdHoc);
  const Cell sw = sweep(small, faq::ReplacementMode::kWithReplacement);
  const Cell so = sweep(small, faq::ReplacementMode::kWithoutReplacementAdHoc);
  const double deficit = lw.coverage - lo.coverage;
  const double agree = std::abs(sw.coverage - so.coverage);
  const double rmse_large = std::abs(lo.rmse - lw.rmse) / lw.rmse;
  const double rmse_small = std::abs(so.rmse - sw.rmse) / sw.rmse;
  Report(9, deficit > 0.02 && agree < 0.02 && rmse_large < 0.1 && rmse_small < 0.1,
         "without-replacement ablation, 2000 runs per cell",
         "n_b=" + std::to_string(large) + " coverage " + Fmt("%.4f", lw.coverage) + " vs " +
             Fmt("%.4f", lo.coverage) + " (deficit > 0.02); n_b=" + std::to_string(small) +
             " " + Fmt("%.4f", sw.coverage) + " vs " + Fmt("%.4f", so.coverage) +
             " (|diff| < 0.02); RMSE rel diff " + Fmt("%.3f", rmse_large) + ", " +
             Fmt("%.3f", rmse_small) + " (< 0.1)",
         Seconds(start));
}

// ---------------------------------------------------------------- C10

void BudgetContract(const Bank& b) {
  const auto start = Clock::now();
  const int nb = 50, seeds = 5000;
  const std::size_t m = 0;
  bool pass = true;
  std::string detail;
  std::size_t mi = 0;
  for (auto base : {faq::BaselinePredictor::kZero, faq::BaselinePredictor::kDifficultyMeans}) {
    for (auto rule : {faq::LabelRule::kBernoulli, faq::LabelRule::kNeyman,
                      faq::LabelRule::kMinRule}) {
      const auto reports = Runs(seeds, [&](std::size_t s) {
        return faq::RunAipwStream(b.answers[m], b.pbar, base, rule, nb, 0.25, RunSeed(10, mi, s));
      });
      int worst = 0;
      double mean = 0.0;
      for (const auto& r : reports) {
        worst = std::max(worst, r.labels_used);
        mean += r.labels_used / static_cast<double>(seeds);
      }
      pass = pass && worst <= nb && std::abs(mean / nb - 1.0) < 0.02;
      detail += reports.front().method + " max " + std::to_string(worst) + " mean " +
                Fmt("%.2f", mean) + "; ";
      ++mi;
    }
  }
  const auto trad = Runs(seeds, [&](std::size_t s) {
    return faq::RunTraditionalActiveInference(b.answers[m], b.fitted.v, b.prior, 0.25, nb,
                                              RunSeed(10, mi, s));
  });
  int worst = 0;
  double mean = 0.0;
  for (const auto& r : trad) {
    worst = std::max(worst, r.labels_used);
    mean += r.labels_used / static_cast<double>(seeds);
  }
  pass = pass && worst <= nb && std::abs(mean / nb - 1.0) < 0.02;
  detail += "traditional max " + std::to_string(worst) + " mean " + Fmt("%.2f", mean) + "; ";

  int pai_bad = 0;
  for (auto mode :
       {faq::ReplacementMode::kWithReplacement, faq::ReplacementMode::kWithoutReplacementAdHoc}) {
    for (int budget : {1, 13, 50, 125, 500}) {
      for (std::size_t s = 0; s < 20; ++s) {
        const auto run =
            faq::RunPai(b.answers[s], b.fitted.v, b.prior, Policy(budget, mode), RunSeed(11, 0, s));
        if (static_cast<int>(run.trace.rounds.size()) != budget ||
            run.report.labels_used != budget) {
          ++pai_bad;
        }
      }
    }
  }
  pass = pass && pai_bad == 0;
  Report(10, pass, "label budget", detail + "PAI runs off-budget: " + std::to_string(pai_bad),
         Seconds(start));
}

// ---------------------------------------------------------------- C11

void Determinism() {
  const auto start = Clock::now();
  const std::string text =
      "budget_fractions = 0.025, 0.1\n"
      "methods = faq, faq_worep, zero_minrule, pbar_neyman, traditional\n"
      "seeds = 4\n"
      "max_test_models = 10\n"
      "seed = 11\n";
  auto once = [&](int threads) {
    std::istringstream in(text);
    const auto cfg = faq::ParseExperimentConfig(in);
    std::ostringstream out;
    faq::WriteRawCsv(faq::RunExperiment(cfg, threads).runs, out);
    return out.str();
  };
  const std::string a = once(1);
  const std::string b = once(std::max(2, g_threads + 1));
  Report(11, a == b && !a.empty(), "byte-identical raw CSV across executions",
         std::to_string(a.size()) + " bytes, " + (a == b ? "identical" : "different"),
         Seconds(start));
}

// ---------------------------------------------------------------- C12

void RealData() {
  const char* dir = std::getenv("FAQ_REAL_DATA");
  if (dir == nullptr || *dir == '\0') {
    std::printf("SKIP  C12 real-data path: set FAQ_REAL_DATA to a directory with "
                "history.csv and test.csv\n");
    return;
  }
  const auto start = Clock::now();
  namespace fs = std::filesystem;
  faq::ExperimentConfig cfg;
  cfg.history_path = (fs::path(dir) / "history.csv").string();
  cfg.test_path = (fs::path(dir) / "test.csv").string();
  if (fs::exists(fs::path(dir) / "metadata.csv")) {
    cfg.metadata_path = (fs::path(dir) / "metadata.csv").string();
  }
  cfg.budget_fractions = {0.125};
  cfg.methods = {"faq"};
  cfg.seeds = 10;
  cfg.max_test_models = 10;
  cfg.factor_k = 16;
  cfg.tune_policy = true;
  cfg.val_fraction = 0.05;
  cfg.tune_seeds = 2;
  cfg.grid.rho = {0.0, 0.05, 0.25};
  cfg.grid.gamma = {0.0, 0.05, 0.25};
  cfg.grid.beta0 = {1.0};
  cfg.grid.tau = {0.05, 0.25};
  try {
    const auto result = faq::RunExperiment(cfg, g_threads);
    for (const auto& row : result.metrics) {
      if (row.method != "faq") continue;
      const double mult = row.n_eff / row.budget;
      Report(12, mult >= 2.0, "real-data ESS multiplier at 12.5% budget",
             Fmt("%.2f", mult) + " (>= 2)", Seconds(start));
    }
  } catch (const faq::Error& e) {
    Report(12, false, "real-data ESS multiplier at 12.5% budget", e.what(), Seconds(start));
  }
}

}  // namespace

int main() {
  g_threads = faq::WorkerCount();
  std::printf("faq acceptance suite (%d worker threads)\n", g_threads);
  GradientOracle();
  ShermanMorrisonOracle();
  OptimalPolicyBruteForce();
  ActiveScoreOracle();

  const auto start = Clock::now();
  const Bank bank = MakeDefaultBank();
  Info("default bank built and factors fitted in " + Fmt("%.1f", Seconds(start)) + " s");
  Unbiasedness(bank);
  CoverageCheck(bank);
  VarianceConsistency(bank);
  Efficiency(bank);
  ReplacementAblation(bank);
  BudgetContract(bank);
  Determinism();
  RealData();
  std::printf("%s: %d failing criteria\n", g_failures == 0 ? "OK" : "FAILED", g_failures);
  return g_failures == 0 ? 0 : 1;
}
