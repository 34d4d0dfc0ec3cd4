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

// faq: fit factor models, tune policies, run sweeps, aggregate results.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "faq/errors.h"
#include "faq/factor_model.h"
#include "faq/harness.h"
#include "faq/outcome_matrix.h"
#include "faq/text.h"

namespace fs = std::filesystem;

namespace {

std::ofstream OpenOut(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw faq::ArgumentError("cannot write '" + path.string() + "'");
  return out;
}

std::ifstream OpenIn(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw faq::ArgumentError("cannot open '" + path.string() + "'");
  return in;
}

void WriteTuning(const faq::TuningResult& t, const fs::path& path) {
  auto out = OpenOut(path);
  out << "n_b,rho,gamma,beta0,tau,mean_width,selected\n";
  for (const auto& cell : t.table) {
    bool selected = false;
    for (const auto& b : t.best) {
      selected = selected || (b.budget == cell.budget && b.rho == cell.config.rho &&
                              b.gamma == cell.config.gamma && b.beta0 == cell.config.beta0 &&
                              b.tau == cell.config.tau);
    }
    out << cell.budget << ',' << faq::FormatDouble(cell.config.rho) << ','
        << faq::FormatDouble(cell.config.gamma) << ',' << faq::FormatDouble(cell.config.beta0)
        << ',' << faq::FormatDouble(cell.config.tau) << ','
        << faq::FormatDouble(cell.mean_width) << ',' << (selected ? 1 : 0) << '\n';
  }
}

void WriteRunOutputs(const faq::ExperimentConfig& cfg, const faq::ExperimentResult& r,
                     const fs::path& dir) {
  fs::create_directories(dir);
  {
    auto out = OpenOut(dir / "config.cfg");
    faq::WriteExperimentConfig(cfg, out);
  }
  {
    auto out = OpenOut(dir / "raw.csv");
    faq::WriteRawCsv(r.runs, out);
  }
  {
    auto out = OpenOut(dir / "metrics.csv");
    faq::WriteMetricsCsv(r.metrics, out);
  }
  if (cfg.tune_policy) {
    WriteTuning(r.tuning, dir / "tuning.csv");
    std::cout << "tuning queries spent on validation models: " << r.tuning.queries_spent
              << '\n';
  }
}

void PrintMetrics(const std::vector<faq::MetricsRow>& rows) {
  faq::WriteMetricsCsv(rows, std::cout);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Factorized active querying for model evaluation"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: FAQ_THREADS or all cores)");

  // fit
  std::string fit_history, fit_out;
  int fit_k = 16;
  faq::FitConfig fit_cfg;
  auto* fit = app.add_subcommand("fit", "Fit the logistic factor model");
  fit->add_option("--history", fit_history)->required();
  fit->add_option("--k", fit_k);
  fit->add_option("--weight-decay", fit_cfg.weight_decay);
  fit->add_option("--learning-rate", fit_cfg.learning_rate);
  fit->add_option("--max-iters", fit_cfg.max_iters);
  fit->add_option("--seed", fit_cfg.seed);
  fit->add_option("--out", fit_out)->required();

  // tune-factors
  std::string tf_history, tf_out;
  int tf_folds = 5;
  std::vector<int> tf_k = {2, 4, 8, 16};
  std::vector<double> tf_decay = {1e-4, 1e-3, 1e-2};
  std::uint64_t tf_seed = 0;
  auto* tune_factors = app.add_subcommand("tune-factors", "Cross-validate k and weight decay");
  tune_factors->add_option("--history", tf_history)->required();
  tune_factors->add_option("--folds", tf_folds);
  tune_factors->add_option("--k-grid", tf_k)->delimiter(',');
  tune_factors->add_option("--decay-grid", tf_decay)->delimiter(',');
  tune_factors->add_option("--seed", tf_seed);
  tune_factors->add_option("--out", tf_out)->required();

  // tune-policy
  std::string tp_config, tp_out;
  auto* tune_policy = app.add_subcommand("tune-policy", "Grid-search policy settings");
  tune_policy->add_option("--config", tp_config)->required();
  tune_policy->add_option("--out", tp_out)->required();

  // run
  std::string run_config, run_out;
  auto* run = app.add_subcommand("run", "Run an experiment sweep");
  run->add_option("--config", run_config)->required();
  run->add_option("--out", run_out)->required();

  // ablate-replacement
  std::string ab_config, ab_out;
  std::vector<double> ab_budgets = {0.025, 0.25};
  auto* ablate = app.add_subcommand("ablate-replacement",
                                    "Compare with- and without-replacement querying");
  ablate->add_option("--config", ab_config)->required();
  ablate->add_option("--budgets", ab_budgets)->delimiter(',');
  ablate->add_option("--out", ab_out)->required();

  // audit
  std::string au_dir, au_group = "accuracy", au_method = "faq", au_metadata, au_out;
  int au_k = 501;
  int au_budget = 0;
  auto* audit = app.add_subcommand("audit", "Per-model coverage with kernel smoothing");
  audit->add_option("results", au_dir)->required();
  audit->add_option("--group", au_group)->check(CLI::IsMember({"accuracy", "release_ordinal"}));
  audit->add_option("--k", au_k);
  audit->add_option("--method", au_method);
  audit->add_option("--budget", au_budget, "n_b to audit (default: smallest in the run)");
  audit->add_option("--metadata", au_metadata, "model_id,release_ordinal CSV (default: test row order)");
  audit->add_option("--out", au_out);

  // report
  std::string rp_dir, rp_out;
  bool rp_posthoc = false;
  auto* report = app.add_subcommand("report", "Aggregate raw.csv into metrics.csv");
  report->add_option("results", rp_dir)->required();
  report->add_flag("--posthoc-best", rp_posthoc,
                   "Add the best stream baseline per budget, chosen after the fact");
  report->add_option("--out", rp_out);

  CLI11_PARSE(app, argc, argv);
  if (threads <= 0) threads = faq::WorkerCount();

  try {
    if (*fit) {
      const auto h = faq::LoadMatrix(fit_history);
      const auto result = faq::Fit(h, fit_k, fit_cfg);
      faq::SaveFactors(result.factors, fit_out, fit_cfg.weight_decay, fit_cfg.seed,
                       result.final_objective());
      std::cout << "iterations " << result.iterations << ", objective "
                << faq::FormatDouble(result.final_objective()) << '\n';
    } else if (*tune_factors) {
      const auto h = faq::LoadMatrix(tf_history);
      const auto cv = faq::CrossValidate(h, tf_k, tf_decay, tf_folds, tf_seed);
      fs::create_directories(tf_out);
      {
        auto out = OpenOut(fs::path(tf_out) / "cv.csv");
        out << "k,weight_decay,mean_accuracy,std_error\n";
        for (const auto& c : cv.table) {
          out << c.k << ',' << faq::FormatDouble(c.weight_decay) << ','
              << faq::FormatDouble(c.mean_accuracy) << ',' << faq::FormatDouble(c.std_error)
              << '\n';
        }
      }
      faq::FitConfig cfg;
      cfg.weight_decay = cv.weight_decay;
      cfg.seed = tf_seed;
      const auto result = faq::Fit(h, cv.k, cfg);
      faq::SaveFactors(result.factors, tf_out, cv.weight_decay, tf_seed,
                       result.final_objective());
      std::cout << "selected k=" << cv.k << " weight_decay=" << faq::FormatDouble(cv.weight_decay)
                << '\n';
    } else if (*tune_policy) {
      auto cfg = faq::LoadExperimentConfig(tp_config);
      cfg.tune_policy = true;
      cfg.methods = {"faq"};
      cfg.seeds = 1;
      cfg.max_test_models = 1;
      // A minimal sweep carries the tuning step; only tuning.csv is written.
      const auto result = faq::RunExperiment(cfg, threads);
      fs::create_directories(tp_out);
      WriteTuning(result.tuning, fs::path(tp_out) / "tuning.csv");
      std::cout << "tuning queries spent on validation models: "
                << result.tuning.queries_spent << '\n';
    } else if (*run) {
      const auto cfg = faq::LoadExperimentConfig(run_config);
      const auto result = faq::RunExperiment(cfg, threads);
      WriteRunOutputs(cfg, result, run_out);
      PrintMetrics(result.metrics);
    } else if (*ablate) {
      auto cfg = faq::LoadExperimentConfig(ab_config);
      cfg.methods = {"faq", "faq_worep"};
      cfg.budget_fractions = ab_budgets;
      const auto result = faq::RunExperiment(cfg, threads);
      WriteRunOutputs(cfg, result, ab_out);
      PrintMetrics(result.metrics);
    } else if (*audit) {
      auto in = OpenIn(fs::path(au_dir) / "raw.csv");
      const auto runs = faq::ReadRawCsv(in);
      int budget = au_budget;
      if (budget == 0) {
        for (const auto& r : runs) {
          if (r.method == au_method && (budget == 0 || r.budget < budget)) budget = r.budget;
        }
      }
      std::map<int, std::pair<double, double>> by_model;  // model -> (hits, runs)
      std::map<int, const faq::RunRecord*> first;
      for (const auto& r : runs) {
        if (r.method != au_method || r.budget != budget || !r.ok()) continue;
        auto& acc = by_model[r.model];
        acc.first += r.covered ? 1.0 : 0.0;
        acc.second += 1.0;
        first.try_emplace(r.model, &r);
      }
      if (by_model.empty()) {
        throw faq::ArgumentError("no successful '" + au_method + "' runs at that budget");
      }
      std::map<std::string, std::int64_t> ordinals;
      if (au_group == "release_ordinal") {
        if (!au_metadata.empty()) ordinals = faq::LoadReleaseOrdinals(au_metadata);
      }
      std::vector<double> keys, coverage;
      for (const auto& [model, acc] : by_model) {
        const auto* rec = first[model];
        if (au_group == "accuracy") {
          keys.push_back(rec->theta);
        } else if (ordinals.empty()) {
          // Test rows are already in release order.
          keys.push_back(static_cast<double>(model));
        } else {
          const auto it = ordinals.find(rec->model_id);
          if (it == ordinals.end()) {
            throw faq::DataError("no release ordinal for '" + rec->model_id + "'");
          }
          keys.push_back(static_cast<double>(it->second));
        }
        coverage.push_back(acc.first / acc.second);
      }
      const auto rows = faq::CoverageAudit(keys, coverage, au_k);
      const fs::path out_path =
          fs::path(au_out.empty() ? au_dir : au_out) / ("audit_" + au_group + ".csv");
      auto out = OpenOut(out_path);
      faq::WriteAuditCsv(rows, out);
      std::cout << "wrote " << rows.size() << " rows to " << out_path.string() << '\n';
    } else if (*report) {
      auto in = OpenIn(fs::path(rp_dir) / "raw.csv");
      auto runs = faq::ReadRawCsv(in);
      auto metrics = faq::Aggregate(runs);
      if (rp_posthoc) faq::AppendPosthocBest(metrics);
      const fs::path out_path = fs::path(rp_out.empty() ? rp_dir : rp_out) / "metrics.csv";
      auto out = OpenOut(out_path);
      faq::WriteMetricsCsv(metrics, out);
      PrintMetrics(metrics);
    }
  } catch (const faq::Error& e) {
    std::cerr << "faq: " << e.what() << '\n';
    return 1;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "faq: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
