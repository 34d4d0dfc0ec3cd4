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

#include "faq/factor_model.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "faq/errors.h"
#include "faq/random.h"
#include "faq/text.h"

namespace faq {

namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Cell {
  std::uint32_t i;
  std::uint32_t j;
  double y;
};

std::vector<Cell> ObservedCells(const OutcomeMatrix& h) {
  std::vector<Cell> cells;
  cells.reserve(h.CountObserved());
  for (std::size_t i = 0; i < h.n_models(); ++i) {
    const auto row = h.row(i);
    for (std::size_t j = 0; j < h.n_questions(); ++j) {
      if (!IsObserved(row[j])) continue;
      cells.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                       row[j] == Outcome::kCorrect ? 1.0 : 0.0});
    }
  }
  return cells;
}

void CheckShapes(const FactorSet& f, const OutcomeMatrix& h) {
  if (f.u.rows() != static_cast<Eigen::Index>(h.n_models()) ||
      f.v.rows() != static_cast<Eigen::Index>(h.n_questions()) ||
      f.u.cols() != f.v.cols() || f.u.cols() < 1) {
    throw ArgumentError("factor shapes (" + std::to_string(f.u.rows()) + "x" +
                        std::to_string(f.u.cols()) + ", " +
                        std::to_string(f.v.rows()) + "x" +
                        std::to_string(f.v.cols()) + ") do not match " +
                        std::to_string(h.n_models()) + "x" +
                        std::to_string(h.n_questions()) + " matrix");
  }
}

// Loss and (optionally) gradient over the observed cells. Accumulation runs
// in cell order, so results do not depend on anything but the inputs.
double Evaluate(const RowMatrix& u, const RowMatrix& v,
                const std::vector<Cell>& cells, RowMatrix* du, RowMatrix* dv) {
  const Eigen::Index k = u.cols();
  if (du) du->setZero(u.rows(), k);
  if (dv) dv->setZero(v.rows(), k);
  double loss = 0.0;
  for (const Cell& c : cells) {
    const double* ui = u.data() + c.i * k;
    const double* vj = v.data() + c.j * k;
    double x = 0.0;
    for (Eigen::Index d = 0; d < k; ++d) x += ui[d] * vj[d];
    loss += Softplus(x) - c.y * x;
    if (du) {
      const double r = Sigmoid(x) - c.y;
      double* gu = du->data() + c.i * k;
      double* gv = dv->data() + c.j * k;
      for (Eigen::Index d = 0; d < k; ++d) {
        gu[d] += r * vj[d];
        gv[d] += r * ui[d];
      }
    }
  }
  return loss;
}

struct AdamState {
  RowMatrix m;
  RowMatrix s;
};

void AdamWStep(RowMatrix& param, const RowMatrix& grad, AdamState& st, int t,
               const FitConfig& cfg) {
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  param *= 1.0 - cfg.learning_rate * cfg.weight_decay;
  st.m = cfg.beta1 * st.m + (1.0 - cfg.beta1) * grad;
  st.s = cfg.beta2 * st.s + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
  param.array() -= cfg.learning_rate * (st.m.array() / bc1) /
                   ((st.s.array() / bc2).sqrt() + cfg.epsilon);
}

RowMatrix GaussianInit(Eigen::Index rows, Eigen::Index cols, double scale,
                       CounterRng rng) {
  RowMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.Normal();
  return m;
}

}  // namespace

void FitConfig::Validate() const {
  if (!(learning_rate > 0.0)) throw ArgumentError("learning_rate must be > 0");
  if (max_iters < 1) throw ArgumentError("max_iters must be >= 1");
  if (!(weight_decay >= 0.0)) throw ArgumentError("weight_decay must be >= 0");
  if (!(init_scale > 0.0)) throw ArgumentError("init_scale must be > 0");
  if (!(convergence_tol >= 0.0)) {
    throw ArgumentError("convergence_tol must be >= 0");
  }
  if (window < 1) throw ArgumentError("window must be >= 1");
}

double MaskedNll(const FactorSet& f, const OutcomeMatrix& h) {
  CheckShapes(f, h);
  const auto cells = ObservedCells(h);
  if (cells.empty()) throw ArgumentError("matrix has no observed entries");
  return Evaluate(f.u, f.v, cells, nullptr, nullptr);
}

FactorGradient MaskedNllGrad(const FactorSet& f, const OutcomeMatrix& h) {
  CheckShapes(f, h);
  const auto cells = ObservedCells(h);
  if (cells.empty()) throw ArgumentError("matrix has no observed entries");
  RowMatrix du, dv;
  Evaluate(f.u, f.v, cells, &du, &dv);
  return {du, dv};
}

FitResult Fit(const OutcomeMatrix& h, int k, const FitConfig& cfg) {
  cfg.Validate();
  if (k < 1) throw ArgumentError("latent dimension must be >= 1");
  const auto cells = ObservedCells(h);
  if (cells.empty()) throw ArgumentError("matrix has no observed entries");

  const CounterRng rng(cfg.seed);
  RowMatrix u = GaussianInit(static_cast<Eigen::Index>(h.n_models()), k,
                             cfg.init_scale, rng.Split(0));
  RowMatrix v = GaussianInit(static_cast<Eigen::Index>(h.n_questions()), k,
                             cfg.init_scale, rng.Split(1));
  AdamState su{RowMatrix::Zero(u.rows(), k), RowMatrix::Zero(u.rows(), k)};
  AdamState sv{RowMatrix::Zero(v.rows(), k), RowMatrix::Zero(v.rows(), k)};
  RowMatrix du, dv;

  FitResult result;
  for (int t = 0;; ++t) {
    const double loss = Evaluate(u, v, cells, &du, &dv);
    if (!std::isfinite(loss)) {
      throw NumericalError("non-finite objective at iteration " +
                           std::to_string(t));
    }
    result.objective_trace.push_back(loss);
    result.iterations = t;
    const auto& tr = result.objective_trace;
    if (t >= cfg.window) {
      const double before = tr[t - cfg.window];
      const double rel = std::abs(before - loss) /
                         std::max(std::abs(before), std::numeric_limits<double>::min());
      if (rel < cfg.convergence_tol) break;
    }
    if (t == cfg.max_iters) break;
    AdamWStep(u, du, su, t + 1, cfg);
    AdamWStep(v, dv, sv, t + 1, cfg);
  }
  result.factors.u = u;
  result.factors.v = v;
  return result;
}

double HoldoutAccuracy(const FactorSet& f, const OutcomeMatrix& truth,
                       const std::vector<std::uint8_t>& mask) {
  CheckShapes(f, truth);
  std::size_t total = 0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.n_models(); ++i) {
    for (std::size_t j = 0; j < truth.n_questions(); ++j) {
      if (!mask[i * truth.n_questions() + j] || !truth.observed(i, j)) continue;
      const double x = f.u.row(i).dot(f.v.row(j));
      const bool predicted = x >= 0.0;
      const bool actual = truth.at(i, j) == Outcome::kCorrect;
      ++total;
      if (predicted == actual) ++hits;
    }
  }
  if (total == 0) throw FoldError("holdout mask selects no observed cells");
  return static_cast<double>(hits) / static_cast<double>(total);
}

CvResult CrossValidate(const OutcomeMatrix& h_train, const std::vector<int>& k_grid,
                       const std::vector<double>& decay_grid, int folds,
                       std::uint64_t seed, const FitConfig& base) {
  if (folds < 2) throw ArgumentError("cross-validation needs >= 2 folds");
  if (k_grid.empty() || decay_grid.empty()) {
    throw ArgumentError("cross-validation grids must be nonempty");
  }
  const std::size_t nq = h_train.n_questions();
  const CounterRng root(seed);

  // Fold masks and training matrices are shared by every grid cell.
  std::vector<std::vector<std::uint8_t>> masks(folds);
  std::vector<OutcomeMatrix> trains(folds, h_train);
  for (int f = 0; f < folds; ++f) {
    CounterRng rng = root.Split(static_cast<std::uint64_t>(f));
    masks[f].assign(h_train.n_models() * nq, 0);
    std::size_t held = 0;
    for (std::size_t i = 0; i < h_train.n_models(); ++i) {
      for (std::size_t j = 0; j < nq; ++j) {
        if (!h_train.observed(i, j)) continue;
        if (rng.Uniform() * folds < 1.0) {
          masks[f][i * nq + j] = 1;
          trains[f].set(i, j, Outcome::kUnobserved);
          ++held;
        }
      }
    }
    if (held == 0) {
      throw FoldError("fold " + std::to_string(f) + " has no held-out entries");
    }
  }

  CvResult result;
  for (int k : k_grid) {
    for (double decay : decay_grid) {
      CvCell cell;
      cell.k = k;
      cell.weight_decay = decay;
      FitConfig cfg = base;
      cfg.weight_decay = decay;
      for (int f = 0; f < folds; ++f) {
        const auto fitted = Fit(trains[f], k, cfg);
        cell.fold_accuracy.push_back(HoldoutAccuracy(fitted.factors, h_train, masks[f]));
      }
      const double n = folds;
      cell.mean_accuracy =
          std::accumulate(cell.fold_accuracy.begin(), cell.fold_accuracy.end(), 0.0) / n;
      double ss = 0.0;
      for (double a : cell.fold_accuracy) ss += (a - cell.mean_accuracy) * (a - cell.mean_accuracy);
      cell.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
      result.table.push_back(std::move(cell));
    }
  }

  const auto best = std::max_element(
      result.table.begin(), result.table.end(),
      [](const CvCell& a, const CvCell& b) { return a.mean_accuracy < b.mean_accuracy; });
  const double threshold = best->mean_accuracy - best->std_error;
  const CvCell* chosen = nullptr;
  for (const auto& cell : result.table) {
    if (cell.mean_accuracy < threshold) continue;
    if (!chosen || cell.k < chosen->k ||
        (cell.k == chosen->k && cell.weight_decay > chosen->weight_decay)) {
      chosen = &cell;
    }
  }
  result.k = chosen->k;
  result.weight_decay = chosen->weight_decay;
  return result;
}

GaussianBelief EmpiricalPrior(const Eigen::MatrixXd& u_hist) {
  const Eigen::Index n = u_hist.rows();
  const Eigen::Index k = u_hist.cols();
  if (n < 1 || k < 1) throw ArgumentError("empirical prior needs >= 1 factor");
  if (!u_hist.allFinite()) throw ArgumentError("model factors are not finite");
  GaussianBelief b;
  b.mean = u_hist.colwise().mean().transpose();
  b.cov = Eigen::MatrixXd::Zero(k, k);
  if (n >= 2) {
    const Eigen::MatrixXd centered = u_hist.rowwise() - b.mean.transpose();
    b.cov = centered.transpose() * centered / static_cast<double>(n - 1);
    b.cov = 0.5 * (b.cov + b.cov.transpose()).eval();
  }
  const double mean_diag = b.cov.diagonal().mean();
  const double jitter = 1e-6 * (mean_diag > 0.0 ? mean_diag : 1.0);
  b.cov.diagonal().array() += jitter;
  return b;
}

void SaveDenseCsv(const Eigen::MatrixXd& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write " + path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << FormatDouble(m(i, j));
    }
    out << '\n';
  }
}

Eigen::MatrixXd LoadDenseCsv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (Trim(line).empty()) continue;
    rows.push_back(ParseDoubleList(line, path));
    if (rows.back().size() != rows.front().size()) {
      throw DimensionError("ragged row in " + path);
    }
  }
  if (rows.empty()) throw DimensionError(path + " is empty");
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

void SaveFactors(const FactorSet& f, const std::string& dir, double weight_decay,
                 std::uint64_t seed, double final_objective) {
  std::filesystem::create_directories(dir);
  SaveDenseCsv(f.u, dir + "/U.csv");
  SaveDenseCsv(f.v, dir + "/V.csv");
  nlohmann::json meta = {{"k", f.k()},
                         {"weight_decay", weight_decay},
                         {"seed", seed},
                         {"final_objective", final_objective}};
  std::ofstream out(dir + "/fit.json", std::ios::binary);
  out << meta.dump(2) << '\n';
}

FactorSet LoadFactors(const std::string& dir) {
  FactorSet f;
  f.u = LoadDenseCsv(dir + "/U.csv");
  f.v = LoadDenseCsv(dir + "/V.csv");
  if (f.u.cols() != f.v.cols()) {
    throw DimensionError("U and V latent widths differ");
  }
  return f;
}

}  // namespace faq
