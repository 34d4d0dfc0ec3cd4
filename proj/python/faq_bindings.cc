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

#include <sstream>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "faq/belief.h"
#include "faq/errors.h"
#include "faq/estimators.h"
#include "faq/factor_model.h"
#include "faq/harness.h"
#include "faq/outcome_matrix.h"
#include "faq/policy.h"

namespace py = pybind11;

namespace {

using IntArray = py::array_t<int, py::array::c_style | py::array::forcecast>;

// Outcome matrices cross the boundary as int arrays with -1 for missing.
faq::OutcomeMatrix ToMatrix(const IntArray& a) {
  if (a.ndim() != 2) throw faq::DimensionError("outcome matrix must be 2-D");
  const auto r = a.unchecked<2>();
  std::vector<std::vector<int>> rows(static_cast<std::size_t>(r.shape(0)));
  for (py::ssize_t i = 0; i < r.shape(0); ++i) {
    rows[i].resize(static_cast<std::size_t>(r.shape(1)));
    for (py::ssize_t j = 0; j < r.shape(1); ++j) rows[i][j] = r(i, j);
  }
  return faq::OutcomeMatrix::FromRows(rows);
}

IntArray FromMatrix(const faq::OutcomeMatrix& m) {
  IntArray out({static_cast<py::ssize_t>(m.n_models()), static_cast<py::ssize_t>(m.n_questions())});
  auto w = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < m.n_models(); ++i) {
    for (std::size_t j = 0; j < m.n_questions(); ++j) {
      const auto o = m.at(i, j);
      w(i, j) = o == faq::Outcome::kUnobserved ? -1 : (o == faq::Outcome::kCorrect ? 1 : 0);
    }
  }
  return out;
}

std::vector<std::uint8_t> ToAnswers(const std::vector<int>& z) {
  std::vector<std::uint8_t> out(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (z[j] != 0 && z[j] != 1) throw faq::ArgumentError("answers must be 0 or 1");
    out[j] = static_cast<std::uint8_t>(z[j]);
  }
  return out;
}

faq::LabelRule ParseRule(const std::string& s) {
  if (s == "bernoulli") return faq::LabelRule::kBernoulli;
  if (s == "neyman") return faq::LabelRule::kNeyman;
  if (s == "minrule") return faq::LabelRule::kMinRule;
  throw faq::ArgumentError("unknown label rule '" + s + "'");
}

faq::BaselinePredictor ParseBase(const std::string& s) {
  if (s == "zero") return faq::BaselinePredictor::kZero;
  if (s == "pbar") return faq::BaselinePredictor::kDifficultyMeans;
  throw faq::ArgumentError("unknown baseline predictor '" + s + "'");
}

py::dict ReportDict(const faq::EstimateReport& r) {
  py::dict d;
  d["method"] = r.method;
  d["n_b"] = r.budget;
  d["theta_hat"] = r.theta_hat;
  d["sigma_hat"] = r.sigma_hat;
  d["ci_low"] = r.ci_low;
  d["ci_high"] = r.ci_high;
  d["variance"] = r.estimator_variance;
  d["labels"] = r.labels_used;
  return d;
}

}  // namespace

PYBIND11_MODULE(_faq, m) {
  m.doc() = "Factorized active querying: label-efficient accuracy estimation.";

  // Translators are tried newest first, so the base class goes first.
  py::register_exception<faq::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<faq::ArgumentError>(m, "ArgumentError", PyExc_ValueError);
  py::register_exception<faq::ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<faq::DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<faq::DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<faq::NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def(
      "generate_bank",
      [](int n_questions, int n_old, int n_test, int k_true, double logit_scale,
         std::uint64_t seed) {
        faq::SyntheticBankSpec spec{n_questions, n_old, n_test, k_true, logit_scale, seed};
        const auto bank = faq::GenerateBank(spec);
        py::dict d;
        d["history"] = FromMatrix(bank.history);
        d["test"] = FromMatrix(bank.test);
        d["true_thetas"] = bank.true_thetas;
        d["u"] = bank.planted.u;
        d["v"] = bank.planted.v;
        return d;
      },
      py::arg("n_questions") = 500, py::arg("n_old") = 300, py::arg("n_test") = 50,
      py::arg("k_true") = 4, py::arg("logit_scale") = 2.0, py::arg("seed") = 0);

  m.def(
      "induce_missingness",
      [](const IntArray& full, std::size_t n_full_obs, double p_obs, std::uint64_t seed) {
        return FromMatrix(faq::InduceMissingness(ToMatrix(full), n_full_obs, p_obs, seed));
      },
      py::arg("full"), py::arg("n_full_obs"), py::arg("p_obs"), py::arg("seed") = 0);

  m.def(
      "difficulty_means",
      [](const IntArray& h) { return faq::DifficultyMeans(ToMatrix(h)).values; },
      py::arg("history"));

  m.def(
      "masked_nll",
      [](const IntArray& h, const Eigen::MatrixXd& u, const Eigen::MatrixXd& v) {
        return faq::MaskedNll(faq::FactorSet{u, v}, ToMatrix(h));
      },
      py::arg("history"), py::arg("u"), py::arg("v"));

  m.def(
      "masked_nll_grad",
      [](const IntArray& h, const Eigen::MatrixXd& u, const Eigen::MatrixXd& v) {
        const auto g = faq::MaskedNllGrad(faq::FactorSet{u, v}, ToMatrix(h));
        return py::make_tuple(g.du, g.dv);
      },
      py::arg("history"), py::arg("u"), py::arg("v"));

  m.def(
      "fit",
      [](const IntArray& h, int k, double weight_decay, double learning_rate, int max_iters,
         std::uint64_t seed) {
        faq::FitConfig cfg;
        cfg.weight_decay = weight_decay;
        cfg.learning_rate = learning_rate;
        cfg.max_iters = max_iters;
        cfg.seed = seed;
        faq::FitResult r;
        {
          py::gil_scoped_release release;
          r = faq::Fit(ToMatrix(h), k, cfg);
        }
        py::dict d;
        d["u"] = r.factors.u;
        d["v"] = r.factors.v;
        d["objective_trace"] = r.objective_trace;
        d["iterations"] = r.iterations;
        return d;
      },
      py::arg("history"), py::arg("k"), py::arg("weight_decay") = 1e-3,
      py::arg("learning_rate") = 1e-2, py::arg("max_iters") = 2000, py::arg("seed") = 0);

  m.def(
      "empirical_prior",
      [](const Eigen::MatrixXd& u) {
        const auto b = faq::EmpiricalPrior(u);
        return py::make_tuple(b.mean, b.cov);
      },
      py::arg("u"));

  m.def(
      "predict",
      [](const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, const Eigen::MatrixXd& v) {
        return faq::Predict(faq::GaussianBelief{mean, cov}, v).values;
      },
      py::arg("mean"), py::arg("cov"), py::arg("v"));

  m.def(
      "laplace_update",
      [](const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, const Eigen::VectorXd& v,
         int z) {
        const auto b = faq::LaplaceUpdate(faq::GaussianBelief{mean, cov}, v, z);
        return py::make_tuple(b.mean, b.cov);
      },
      py::arg("mean"), py::arg("cov"), py::arg("v"), py::arg("z"));

  m.def(
      "oracle_score",
      [](const Eigen::VectorXd& p) {
        faq::PredictionVector pv;
        pv.values = p;
        pv.sum = p.sum();
        return faq::OracleScore(pv);
      },
      py::arg("p"));

  m.def(
      "active_learning_score",
      [](const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, const Eigen::MatrixXd& v) {
        return faq::ActiveLearningScore(faq::GaussianBelief{mean, cov}, v);
      },
      py::arg("mean"), py::arg("cov"), py::arg("v"));

  m.def(
      "hybrid_policy",
      [](const std::vector<double>& oracle, const std::vector<double>& active, double alpha,
         double beta, double tau) {
        return faq::HybridPolicy(oracle, active, alpha, beta, tau).probs;
      },
      py::arg("oracle"), py::arg("active"), py::arg("alpha"), py::arg("beta"), py::arg("tau"));

  m.def(
      "stream_label_probs",
      [](const std::vector<double>& difficulty, const std::string& rule, int budget, double tau) {
        return faq::StreamLabelProbs(difficulty, ParseRule(rule), budget, tau);
      },
      py::arg("difficulty"), py::arg("rule"), py::arg("budget"), py::arg("tau") = 0.25);

  m.def(
      "run_pai",
      [](const std::vector<int>& answers, const Eigen::MatrixXd& v, const Eigen::VectorXd& mean,
         const Eigen::MatrixXd& cov, int budget, double rho, double gamma, double beta0,
         double tau, bool with_replacement, std::uint64_t seed, double alpha) {
        faq::PolicyConfig cfg;
        cfg.rho = rho;
        cfg.gamma = gamma;
        cfg.beta0 = beta0;
        cfg.tau = tau;
        cfg.budget = budget;
        cfg.mode = with_replacement ? faq::ReplacementMode::kWithReplacement
                                    : faq::ReplacementMode::kWithoutReplacementAdHoc;
        const auto z = ToAnswers(answers);
        faq::PaiRun run;
        {
          py::gil_scoped_release release;
          run = faq::RunPai(z, v, faq::GaussianBelief{mean, cov}, cfg, seed, alpha);
        }
        py::dict d = ReportDict(run.report);
        std::vector<int> index;
        std::vector<double> q_sel;
        for (const auto& r : run.trace.rounds) {
          index.push_back(r.index);
          q_sel.push_back(r.q_sel);
        }
        d["index"] = index;
        d["q_sel"] = q_sel;
        return d;
      },
      py::arg("answers"), py::arg("v"), py::arg("mean"), py::arg("cov"), py::arg("budget"),
      py::arg("rho") = 0.5, py::arg("gamma") = 0.5, py::arg("beta0") = 1.0,
      py::arg("tau") = 0.25, py::arg("with_replacement") = true, py::arg("seed") = 0,
      py::arg("alpha") = 0.05);

  m.def(
      "run_stream",
      [](const std::vector<int>& answers, const std::vector<double>& difficulty,
         const std::string& base, const std::string& rule, int budget, double tau,
         std::uint64_t seed, double alpha) {
        return ReportDict(faq::RunAipwStream(ToAnswers(answers), difficulty, ParseBase(base),
                                             ParseRule(rule), budget, tau, seed, alpha));
      },
      py::arg("answers"), py::arg("difficulty"), py::arg("base") = "zero",
      py::arg("rule") = "bernoulli", py::arg("budget") = 1, py::arg("tau") = 0.25,
      py::arg("seed") = 0, py::arg("alpha") = 0.05);

  m.def(
      "run_traditional",
      [](const std::vector<int>& answers, const Eigen::MatrixXd& v, const Eigen::VectorXd& mean,
         const Eigen::MatrixXd& cov, int budget, double tau, std::uint64_t seed, double alpha) {
        return ReportDict(faq::RunTraditionalActiveInference(
            ToAnswers(answers), v, faq::GaussianBelief{mean, cov}, tau, budget, seed, alpha));
      },
      py::arg("answers"), py::arg("v"), py::arg("mean"), py::arg("cov"), py::arg("budget"),
      py::arg("tau") = 0.25, py::arg("seed") = 0, py::arg("alpha") = 0.05);

  m.def("normal_quantile", &faq::NormalQuantile, py::arg("p"));
  m.def(
      "wald_ci",
      [](double theta_hat, double sigma_hat, int budget, double alpha) {
        const auto ci = faq::WaldCi(theta_hat, sigma_hat, budget, alpha);
        return py::make_tuple(ci.low, ci.high);
      },
      py::arg("theta_hat"), py::arg("sigma_hat"), py::arg("budget"), py::arg("alpha") = 0.05);
  m.def("effective_sample_size", &faq::EffectiveSampleSize, py::arg("v_method"),
        py::arg("v_uniform"), py::arg("budget"));

  m.def(
      "run_experiment",
      [](const std::string& config_text, int threads) {
        std::istringstream in(config_text);
        const auto cfg = faq::ParseExperimentConfig(in);
        faq::ExperimentResult result;
        {
          py::gil_scoped_release release;
          result = faq::RunExperiment(cfg, threads > 0 ? threads : faq::WorkerCount());
        }
        std::ostringstream raw, metrics;
        faq::WriteRawCsv(result.runs, raw);
        faq::WriteMetricsCsv(result.metrics, metrics);
        return py::make_tuple(raw.str(), metrics.str());
      },
      py::arg("config_text"), py::arg("threads") = 0,
      "Run a sweep from config text; returns (raw_csv, metrics_csv).");

  m.def(
      "coverage_audit",
      [](const std::vector<double>& keys, const std::vector<double>& coverage, int k) {
        const auto rows = faq::CoverageAudit(keys, coverage, k);
        std::vector<double> smoothed, sd;
        for (const auto& r : rows) {
          smoothed.push_back(r.smoothed);
          sd.push_back(r.sd);
        }
        return py::make_tuple(smoothed, sd);
      },
      py::arg("keys"), py::arg("coverage"), py::arg("k"));
}
