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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>
#include <utility>

#include "faq/errors.h"
#include "faq/random.h"
#include "faq/text.h"

namespace faq {

namespace {

constexpr std::uint64_t kTaskSalt = 0x7A5C;
constexpr std::uint64_t kMaskSalt = 0x3D1;

// FNV-1a; stable across platforms.
std::uint64_t HashName(const std::string& s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

double Mean(const std::vector<double>& x) {
  return x.empty() ? std::numeric_limits<double>::quiet_NaN()
                   : std::accumulate(x.begin(), x.end(), 0.0) /
                         static_cast<double>(x.size());
}

// Standard error of the mean (sample SD / sqrt(n)); 0 for n < 2.
double StdError(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  const double m = Mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
}

std::string Sanitize(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

std::vector<double> RowMeans(const OutcomeMatrix& m) {
  std::vector<double> out(m.n_models());
  for (std::size_t i = 0; i < m.n_models(); ++i) {
    const auto z = m.AnswerVector(i);
    out[i] = std::accumulate(z.begin(), z.end(), 0.0) / static_cast<double>(z.size());
  }
  return out;
}

bool IsBaselineKind(MethodSpec::Kind k) {
  return k == MethodSpec::Kind::kStream || k == MethodSpec::Kind::kTraditional;
}

}  // namespace

void SyntheticBankSpec::Validate() const {
  if (n_questions < 1 || n_old < 1 || n_test < 1 || k_true < 1) {
    throw ArgumentError("synthetic bank counts must be >= 1");
  }
  if (!(logit_scale > 0.0)) throw ArgumentError("logit_scale must be > 0");
}

SyntheticBank GenerateBank(const SyntheticBankSpec& spec) {
  spec.Validate();
  const int k = spec.k_true;
  const int rows = spec.n_old + spec.n_test;
  const double scale = std::sqrt(spec.logit_scale / std::sqrt(static_cast<double>(k)));
  const CounterRng root(spec.seed);

  SyntheticBank bank;
  bank.planted.u.resize(rows, k);
  bank.planted.v.resize(spec.n_questions, k);
  CounterRng ru = root.Split(0);
  for (int i = 0; i < rows; ++i) {
    for (int d = 0; d < k; ++d) bank.planted.u(i, d) = scale * ru.Normal();
  }
  CounterRng rv = root.Split(1);
  for (int j = 0; j < spec.n_questions; ++j) {
    for (int d = 0; d < k; ++d) bank.planted.v(j, d) = scale * rv.Normal();
  }

  OutcomeMatrix all(static_cast<std::size_t>(rows),
                    static_cast<std::size_t>(spec.n_questions));
  const CounterRng outcomes = root.Split(2);
  const Eigen::MatrixXd logits = bank.planted.u * bank.planted.v.transpose();
  for (int i = 0; i < rows; ++i) {
    CounterRng rng = outcomes.Split(static_cast<std::uint64_t>(i));
    for (int j = 0; j < spec.n_questions; ++j) {
      all.set(i, j, rng.Bernoulli(Sigmoid(logits(i, j))) ? Outcome::kCorrect
                                                         : Outcome::kIncorrect);
    }
  }
  std::vector<std::int64_t> ordinals(static_cast<std::size_t>(rows));
  std::iota(ordinals.begin(), ordinals.end(), std::int64_t{0});
  all.set_release_ordinals(ordinals);

  std::vector<std::size_t> hist_rows(spec.n_old);
  std::iota(hist_rows.begin(), hist_rows.end(), std::size_t{0});
  std::vector<std::size_t> test_rows(spec.n_test);
  std::iota(test_rows.begin(), test_rows.end(), static_cast<std::size_t>(spec.n_old));
  bank.history = all.SelectRows(hist_rows);
  bank.test = all.SelectRows(test_rows);
  bank.true_thetas = RowMeans(bank.test);
  return bank;
}

int WorkerCount() {
  if (const char* env = std::getenv("FAQ_THREADS")) {
    try {
      return static_cast<int>(std::max<std::int64_t>(1, ParseInt(env, "FAQ_THREADS")));
    } catch (const ParseError&) {
      throw ArgumentError("FAQ_THREADS must be a positive integer");
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void ParallelFor(std::size_t n, int threads,
                 const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mu);
          if (!failure) failure = std::current_exception();
          next.store(n);
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

TuningResult TunePolicy(const std::vector<std::vector<std::uint8_t>>& val_answers,
                        const Eigen::MatrixXd& v, const GaussianBelief& prior,
                        const PolicyGrid& grid, const std::vector<int>& budgets,
                        int seeds, double alpha, std::uint64_t seed, int threads) {
  if (grid.size() == 0) throw ArgumentError("policy grid is empty");
  if (val_answers.empty()) throw ArgumentError("no validation models");
  if (seeds < 1) throw ArgumentError("tuning needs >= 1 seed");

  std::vector<PolicyConfig> configs;
  for (double rho : grid.rho) {
    for (double gamma : grid.gamma) {
      for (double beta0 : grid.beta0) {
        for (double tau : grid.tau) {
          PolicyConfig c;
          c.rho = rho;
          c.gamma = gamma;
          c.beta0 = beta0;
          c.tau = tau;
          configs.push_back(c);
        }
      }
    }
  }

  const std::size_t n_models = val_answers.size();
  const std::size_t per_config = n_models * static_cast<std::size_t>(seeds);
  const CounterRng root(seed);
  TuningResult result;
  for (std::size_t bi = 0; bi < budgets.size(); ++bi) {
    std::vector<double> widths(configs.size() * per_config);
    ParallelFor(widths.size(), threads, [&](std::size_t task) {
      const std::size_t ci = task / per_config;
      const std::size_t rest = task % per_config;
      const std::size_t m = rest / static_cast<std::size_t>(seeds);
      const std::size_t s = rest % static_cast<std::size_t>(seeds);
      PolicyConfig cfg = configs[ci];
      cfg.budget = budgets[bi];
      // Common random numbers across configurations.
      const std::uint64_t run_seed = root.Split(bi).Split(m).Split(s).key();
      try {
        const auto run = RunPai(val_answers[m], v, prior, cfg, run_seed, alpha);
        widths[task] = run.report.ci_high - run.report.ci_low;
      } catch (const NumericalError&) {
        widths[task] = 1.0;
      }
    });

    std::size_t best = 0;
    for (std::size_t ci = 0; ci < configs.size(); ++ci) {
      const auto first = widths.begin() + static_cast<std::ptrdiff_t>(ci * per_config);
      const double mean =
          std::accumulate(first, first + static_cast<std::ptrdiff_t>(per_config), 0.0) /
          static_cast<double>(per_config);
      TuningCell cell;
      cell.budget = budgets[bi];
      cell.config = configs[ci];
      cell.config.budget = budgets[bi];
      cell.mean_width = mean;
      result.table.push_back(cell);
      const TuningCell& incumbent = result.table[result.table.size() - 1 - (ci - best)];
      if (ci == 0) continue;
      if (mean < incumbent.mean_width ||
          (mean == incumbent.mean_width && cell.config.tau > incumbent.config.tau)) {
        best = ci;
      }
    }
    result.best.push_back(result.table[result.table.size() - configs.size() + best].config);
    result.queries_spent += configs.size() * per_config * static_cast<std::size_t>(budgets[bi]);
  }
  return result;
}

MethodSpec ParseMethod(const std::string& text, double default_tau) {
  MethodSpec m;
  m.name = text;
  std::string base = text;
  m.tau = default_tau;
  if (const auto at = text.find('@'); at != std::string::npos) {
    base = text.substr(0, at);
    m.tau = ParseDouble(text.substr(at + 1), "method tau");
  }
  if (base == "faq") {
    m.kind = MethodSpec::Kind::kFaq;
  } else if (base == "faq_worep") {
    m.kind = MethodSpec::Kind::kFaqWithoutReplacement;
  } else if (base == "traditional") {
    m.kind = MethodSpec::Kind::kTraditional;
  } else if (base == "uniform") {
    m.kind = MethodSpec::Kind::kStream;
    m.base = BaselinePredictor::kZero;
    m.rule = LabelRule::kBernoulli;
  } else {
    const auto us = base.find('_');
    if (us == std::string::npos) throw ArgumentError("unknown method '" + text + "'");
    const std::string pred = base.substr(0, us);
    const std::string rule = base.substr(us + 1);
    m.kind = MethodSpec::Kind::kStream;
    if (pred == "zero") {
      m.base = BaselinePredictor::kZero;
    } else if (pred == "pbar") {
      m.base = BaselinePredictor::kDifficultyMeans;
    } else {
      throw ArgumentError("unknown method '" + text + "'");
    }
    if (rule == "bernoulli") {
      m.rule = LabelRule::kBernoulli;
    } else if (rule == "neyman") {
      m.rule = LabelRule::kNeyman;
    } else if (rule == "minrule") {
      m.rule = LabelRule::kMinRule;
    } else {
      throw ArgumentError("unknown method '" + text + "'");
    }
  }
  if (text.find('@') != std::string::npos && !IsBaselineKind(m.kind)) {
    throw ArgumentError("'@tau' applies to baselines only: '" + text + "'");
  }
  if (!(m.tau >= 0.0 && m.tau <= 1.0)) throw ArgumentError("method tau must lie in [0, 1]");
  return m;
}

void ExperimentConfig::Validate() const {
  if (history_path.empty()) bank.Validate();
  if (budget_fractions.empty()) throw ArgumentError("no budget fractions");
  for (double f : budget_fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw ArgumentError("budget fractions must lie in (0, 1]");
  }
  if (methods.empty()) throw ArgumentError("no methods");
  if (seeds < 1) throw ArgumentError("seeds must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
  if (!(p_obs >= 0.0 && p_obs <= 1.0)) throw ArgumentError("p_obs must lie in [0, 1]");
  if (factor_k < 1) throw ArgumentError("factor_k must be >= 1");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw ArgumentError("val_fraction must lie in (0, 1)");
  }
  PolicyConfig p;
  p.rho = rho;
  p.gamma = gamma;
  p.beta0 = beta0;
  p.tau = tau;
  p.Validate();
  for (const auto& m : methods) ParseMethod(m, baseline_tau);
}

PreparedData PrepareData(const ExperimentConfig& cfg) {
  PreparedData data;
  if (cfg.history_path.empty()) {
    SyntheticBank bank = GenerateBank(cfg.bank);
    data.full_history = std::move(bank.history);
    data.test = std::move(bank.test);
    data.true_thetas = std::move(bank.true_thetas);
  } else {
    OutcomeMatrix h = LoadMatrix(cfg.history_path);
    if (!cfg.metadata_path.empty()) {
      AttachReleaseOrdinals(h, LoadReleaseOrdinals(cfg.metadata_path));
    }
    if (!cfg.test_path.empty()) {
      data.full_history = std::move(h);
      data.test = LoadMatrix(cfg.test_path);
    } else {
      if (cfg.split_first == 0) {
        throw ArgumentError("need test_path or split_first to define test models");
      }
      std::vector<std::int64_t> order = h.release_ordinals();
      if (order.empty()) {
        order.resize(h.n_models());
        std::iota(order.begin(), order.end(), std::int64_t{0});
      }
      auto [left, right] = SplitRows(h, order, cfg.split_first);
      data.full_history = std::move(left);
      data.test = std::move(right);
    }
    if (data.test.n_questions() != data.full_history.n_questions()) {
      throw DimensionError("history and test matrices have different question counts");
    }
    data.true_thetas = RowMeans(data.test);
  }
  if (data.full_history.n_models() == 0 || data.test.n_models() == 0) {
    throw DataError("need at least one historical and one test model");
  }
  data.history = cfg.p_obs < 1.0
                     ? InduceMissingness(data.full_history, cfg.n_full_obs, cfg.p_obs,
                                         CounterRng(cfg.seed).Split(kMaskSalt).key())
                     : data.full_history;
  return data;
}

ExperimentResult RunExperiment(const ExperimentConfig& cfg, int threads) {
  cfg.Validate();
  const PreparedData data = PrepareData(cfg);
  const int nq = static_cast<int>(data.test.n_questions());

  ExperimentResult result;
  for (double f : cfg.budget_fractions) {
    result.budgets.push_back(std::clamp(static_cast<int>(std::lround(f * nq)), 1, nq));
  }

  FitConfig fit_cfg;
  fit_cfg.weight_decay = cfg.factor_weight_decay;
  fit_cfg.learning_rate = cfg.factor_learning_rate;
  fit_cfg.max_iters = cfg.factor_max_iters;
  fit_cfg.seed = cfg.factor_seed;

  std::vector<PolicyConfig> faq_policies;
  {
    PolicyConfig p;
    p.rho = cfg.rho;
    p.gamma = cfg.gamma;
    p.beta0 = cfg.beta0;
    p.tau = cfg.tau;
    faq_policies.assign(result.budgets.size(), p);
  }
  if (cfg.tune_policy) {
    const std::size_t n_hist = data.history.n_models();
    const std::size_t n_val = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::lround(cfg.val_fraction * static_cast<double>(n_hist))),
        1, n_hist - 1);
    std::vector<std::size_t> train_rows(n_hist - n_val);
    std::iota(train_rows.begin(), train_rows.end(), std::size_t{0});
    std::vector<std::size_t> val_rows(n_val);
    std::iota(val_rows.begin(), val_rows.end(), n_hist - n_val);
    const auto train_fit = Fit(data.history.SelectRows(train_rows), cfg.factor_k, fit_cfg);
    const OutcomeMatrix val = data.full_history.SelectRows(val_rows);
    std::vector<std::vector<std::uint8_t>> val_answers;
    for (std::size_t i = 0; i < val.n_models(); ++i) val_answers.push_back(val.AnswerVector(i));
    result.tuning = TunePolicy(val_answers, train_fit.factors.v,
                               EmpiricalPrior(train_fit.factors.u), cfg.grid, result.budgets,
                               cfg.tune_seeds, cfg.alpha, cfg.seed, threads);
    faq_policies = result.tuning.best;
  }

  FactorSet factors;
  if (!cfg.factors_dir.empty()) {
    factors = LoadFactors(cfg.factors_dir);
    if (factors.v.rows() != nq) throw DimensionError("loaded V does not match question count");
  } else {
    factors = Fit(data.history, cfg.factor_k, fit_cfg).factors;
  }
  const GaussianBelief prior = EmpiricalPrior(factors.u);
  const DifficultyVector pbar = DifficultyMeans(data.history);

  std::vector<MethodSpec> methods;
  bool has_uniform = false;
  for (const auto& name : cfg.methods) {
    methods.push_back(ParseMethod(name, cfg.baseline_tau));
    has_uniform = has_uniform || name == "uniform";
  }
  if (!has_uniform) methods.insert(methods.begin(), ParseMethod("uniform", cfg.baseline_tau));

  const std::size_t n_models =
      cfg.max_test_models > 0
          ? std::min<std::size_t>(data.test.n_models(), static_cast<std::size_t>(cfg.max_test_models))
          : data.test.n_models();
  std::vector<std::vector<std::uint8_t>> answers(n_models);
  for (std::size_t m = 0; m < n_models; ++m) answers[m] = data.test.AnswerVector(m);

  const std::size_t n_seeds = static_cast<std::size_t>(cfg.seeds);
  const std::size_t per_method = n_models * n_seeds;
  const std::size_t per_budget = methods.size() * per_method;
  result.runs.resize(result.budgets.size() * per_budget);
  const CounterRng root = CounterRng(cfg.seed).Split(kTaskSalt);

  ParallelFor(result.runs.size(), threads, [&](std::size_t task) {
    const std::size_t bi = task / per_budget;
    const std::size_t mi = (task % per_budget) / per_method;
    const std::size_t m = (task % per_method) / n_seeds;
    const std::size_t s = task % n_seeds;
    const MethodSpec& method = methods[mi];
    const int budget = result.budgets[bi];
    const std::uint64_t run_seed =
        root.Split(bi).Split(m).Split(s).Split(HashName(method.name)).key();

    RunRecord& rec = result.runs[task];
    rec.method = method.name;
    rec.seed = static_cast<int>(s);
    rec.budget = budget;
    rec.model = static_cast<int>(m);
    rec.model_id = data.test.model_ids()[m];
    rec.theta = data.true_thetas[m];
    try {
      switch (method.kind) {
        case MethodSpec::Kind::kFaq:
        case MethodSpec::Kind::kFaqWithoutReplacement: {
          PolicyConfig p = faq_policies[bi];
          p.budget = budget;
          p.mode = method.kind == MethodSpec::Kind::kFaq
                       ? ReplacementMode::kWithReplacement
                       : ReplacementMode::kWithoutReplacementAdHoc;
          rec.report = RunPai(answers[m], factors.v, prior, p, run_seed, cfg.alpha).report;
          break;
        }
        case MethodSpec::Kind::kStream:
          rec.report = RunAipwStream(answers[m], pbar.values, method.base, method.rule,
                                     budget, method.tau, run_seed, cfg.alpha);
          break;
        case MethodSpec::Kind::kTraditional:
          rec.report = RunTraditionalActiveInference(answers[m], factors.v, prior,
                                                     method.tau, budget, run_seed, cfg.alpha);
          break;
      }
      rec.report.method = method.name;
      rec.covered = rec.theta >= rec.report.ci_low && rec.theta <= rec.report.ci_high;
    } catch (const Error& e) {
      rec.error = e.what();
    }
  });

  AssignEffectiveSampleSizes(result.runs);
  result.metrics = Aggregate(result.runs);
  return result;
}

void AssignEffectiveSampleSizes(std::vector<RunRecord>& runs) {
  std::map<std::pair<int, int>, std::vector<double>> uniform;
  for (const auto& r : runs) {
    if (r.ok() && r.method == "uniform") {
      uniform[{r.budget, r.model}].push_back(r.report.estimator_variance);
    }
  }
  for (auto& r : runs) {
    r.report.n_eff.reset();
    if (!r.ok()) continue;
    const auto it = uniform.find({r.budget, r.model});
    if (it == uniform.end()) continue;
    const double ref = Mean(it->second);
    if (!(ref > 0.0)) continue;
    r.report.n_eff = EffectiveSampleSize(r.report.estimator_variance, ref, r.budget);
  }
}

std::vector<MetricsRow> Aggregate(const std::vector<RunRecord>& runs) {
  // (budget, model) -> mean uniform variance.
  std::map<std::pair<int, int>, std::vector<double>> uniform;
  for (const auto& r : runs) {
    if (r.ok() && r.method == "uniform") {
      uniform[{r.budget, r.model}].push_back(r.report.estimator_variance);
    }
  }

  std::vector<std::pair<std::string, int>> keys;
  std::map<std::pair<std::string, int>, std::vector<const RunRecord*>> groups;
  for (const auto& r : runs) {
    const auto key = std::make_pair(r.method, r.budget);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) keys.push_back(key);
    it->second.push_back(&r);
  }

  std::vector<MetricsRow> out;
  for (const auto& key : keys) {
    const auto& group = groups[key];
    MetricsRow row;
    row.method = key.first;
    row.budget = key.second;
    std::vector<double> covered, width, sq_err;
    std::map<int, std::vector<double>> by_model;
    for (const RunRecord* r : group) {
      if (!r->ok()) {
        ++row.failures;
        continue;
      }
      covered.push_back(r->covered ? 1.0 : 0.0);
      width.push_back(r->report.ci_high - r->report.ci_low);
      const double e = r->report.theta_hat - r->theta;
      sq_err.push_back(e * e);
      by_model[r->model].push_back(r->report.estimator_variance);
    }
    row.runs = covered.size();
    row.models = by_model.size();
    row.coverage = Mean(covered);
    row.coverage_se = StdError(covered);
    row.width = Mean(width);
    row.width_se = StdError(width);
    const double mse = Mean(sq_err);
    row.rmse = std::sqrt(mse);
    row.rmse_se = row.rmse > 0.0 ? StdError(sq_err) / (2.0 * row.rmse) : 0.0;

    std::vector<double> ratios;
    for (const auto& [model, vars] : by_model) {
      const auto it = uniform.find({row.budget, model});
      if (it == uniform.end()) continue;
      const double ref = Mean(it->second);
      const double mine = Mean(vars);
      if (ref > 0.0 && mine > 0.0) ratios.push_back(row.budget * ref / mine);
    }
    row.n_eff = Mean(ratios);
    row.n_eff_se = StdError(ratios);
    out.push_back(row);
  }
  return out;
}

void AppendPosthocBest(std::vector<MetricsRow>& metrics) {
  std::map<int, const MetricsRow*> best;
  std::vector<int> order;
  for (const auto& row : metrics) {
    const std::string base = row.method.substr(0, row.method.find('@'));
    if (base == "faq" || base == "faq_worep" || base == "uniform") continue;
    if (row.method.rfind("best_baseline", 0) == 0) continue;
    if (!std::isfinite(row.n_eff)) continue;
    auto [it, inserted] = best.try_emplace(row.budget, &row);
    if (inserted) {
      order.push_back(row.budget);
    } else if (row.n_eff > it->second->n_eff) {
      it->second = &row;
    }
  }
  std::vector<MetricsRow> extra;
  for (int b : order) {
    MetricsRow r = *best[b];
    r.method = "best_baseline(" + r.method + ")";
    extra.push_back(r);
  }
  metrics.insert(metrics.end(), extra.begin(), extra.end());
}

void WriteRawCsv(const std::vector<RunRecord>& runs, std::ostream& out) {
  out << "method,seed,n_b,theta_hat,sigma_hat,ci_low,ci_high,covered,n_eff,"
         "model,model_id,theta,variance,labels,error\n";
  for (const auto& r : runs) {
    const auto& e = r.report;
    out << r.method << ',' << r.seed << ',' << r.budget << ',' << FormatDouble(e.theta_hat)
        << ',' << FormatDouble(e.sigma_hat) << ',' << FormatDouble(e.ci_low) << ','
        << FormatDouble(e.ci_high) << ',' << (r.covered ? 1 : 0) << ','
        << (e.n_eff ? FormatDouble(*e.n_eff) : std::string("NA")) << ',' << r.model << ','
        << r.model_id << ',' << FormatDouble(r.theta) << ','
        << FormatDouble(e.estimator_variance) << ',' << e.labels_used << ','
        << Sanitize(r.error) << '\n';
  }
}

std::vector<RunRecord> ReadRawCsv(std::istream& in) {
  std::vector<RunRecord> runs;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.rfind("method,seed,n_b,", 0) != 0) throw ParseError("unexpected raw CSV header");
      continue;
    }
    const auto c = SplitCsvLine(line);
    if (c.size() != 15) throw DimensionError("raw CSV rows need 15 cells");
    RunRecord r;
    r.method = c[0];
    r.seed = static_cast<int>(ParseInt(c[1], "seed"));
    r.budget = static_cast<int>(ParseInt(c[2], "n_b"));
    r.report.method = r.method;
    r.report.seed = static_cast<std::uint64_t>(r.seed);
    r.report.budget = r.budget;
    r.report.theta_hat = ParseDouble(c[3], "theta_hat");
    r.report.sigma_hat = ParseDouble(c[4], "sigma_hat");
    r.report.ci_low = ParseDouble(c[5], "ci_low");
    r.report.ci_high = ParseDouble(c[6], "ci_high");
    r.covered = ParseInt(c[7], "covered") != 0;
    if (c[8] != "NA") r.report.n_eff = ParseDouble(c[8], "n_eff");
    r.model = static_cast<int>(ParseInt(c[9], "model"));
    r.model_id = c[10];
    r.theta = ParseDouble(c[11], "theta");
    r.report.estimator_variance = ParseDouble(c[12], "variance");
    r.report.labels_used = static_cast<int>(ParseInt(c[13], "labels"));
    r.error = c[14];
    runs.push_back(std::move(r));
  }
  return runs;
}

void WriteMetricsCsv(const std::vector<MetricsRow>& rows, std::ostream& out) {
  out << "method,n_b,runs,failures,models,coverage,coverage_se,width,width_se,"
         "n_eff,n_eff_se,rmse,rmse_se\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.budget << ',' << r.runs << ',' << r.failures << ','
        << r.models << ',' << FormatDouble(r.coverage) << ',' << FormatDouble(r.coverage_se)
        << ',' << FormatDouble(r.width) << ',' << FormatDouble(r.width_se) << ','
        << FormatDouble(r.n_eff) << ',' << FormatDouble(r.n_eff_se) << ','
        << FormatDouble(r.rmse) << ',' << FormatDouble(r.rmse_se) << '\n';
  }
}

std::vector<AuditRow> CoverageAudit(const std::vector<double>& keys,
                                    const std::vector<double>& coverage, int k) {
  const std::size_t n = keys.size();
  if (coverage.size() != n) throw DimensionError("keys and coverage lengths differ");
  if (k < 1 || k % 2 == 0) throw ArgumentError("window K must be odd and >= 1");
  if (static_cast<std::size_t>(k) > n) throw ArgumentError("window K exceeds model count");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });

  std::vector<AuditRow> out(n);
  for (std::size_t p = 0; p < n; ++p) {
    const double center = keys[order[p]];
    // Grow [lo, hi) around p to K members, taking the nearer side first.
    std::size_t lo = p;
    std::size_t hi = p + 1;
    while (hi - lo < static_cast<std::size_t>(k)) {
      if (lo == 0) {
        ++hi;
      } else if (hi == n) {
        --lo;
      } else if (center - keys[order[lo - 1]] <= keys[order[hi]] - center) {
        --lo;
      } else {
        ++hi;
      }
    }
    double bandwidth = 0.0;
    for (std::size_t q = lo; q < hi; ++q) {
      bandwidth = std::max(bandwidth, std::abs(keys[order[q]] - center));
    }
    double wsum = 0.0;
    double mean = 0.0;
    for (std::size_t q = lo; q < hi; ++q) {
      const double d = bandwidth > 0.0 ? (keys[order[q]] - center) / bandwidth : 0.0;
      const double w = std::exp(-0.5 * d * d);
      wsum += w;
      mean += w * coverage[order[q]];
    }
    mean /= wsum;
    double var = 0.0;
    for (std::size_t q = lo; q < hi; ++q) {
      const double d = bandwidth > 0.0 ? (keys[order[q]] - center) / bandwidth : 0.0;
      const double w = std::exp(-0.5 * d * d);
      var += w * (coverage[order[q]] - mean) * (coverage[order[q]] - mean);
    }
    AuditRow& row = out[order[p]];
    row.model = static_cast<int>(order[p]);
    row.key = center;
    row.coverage = coverage[order[p]];
    row.smoothed = mean;
    row.sd = std::sqrt(std::max(0.0, var / wsum));
  }
  return out;
}

void WriteAuditCsv(const std::vector<AuditRow>& rows, std::ostream& out) {
  out << "model,key,coverage,smoothed,sd\n";
  for (const auto& r : rows) {
    out << r.model << ',' << FormatDouble(r.key) << ',' << FormatDouble(r.coverage) << ','
        << FormatDouble(r.smoothed) << ',' << FormatDouble(r.sd) << '\n';
  }
}

}  // namespace faq
