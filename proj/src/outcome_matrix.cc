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

#include "faq/outcome_matrix.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "faq/errors.h"
#include "faq/random.h"
#include "faq/text.h"

namespace faq {

namespace {

std::vector<std::string> DefaultIds(const char* prefix, std::size_t n) {
  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = prefix + std::to_string(i);
  return ids;
}

Outcome ParseCell(std::string_view token, std::size_t row, std::size_t col) {
  if (token == "1") return Outcome::kCorrect;
  if (token == "0") return Outcome::kIncorrect;
  if (token == "NA") return Outcome::kUnobserved;
  throw ParseError("invalid cell '" + std::string(token) + "' at row " +
                   std::to_string(row) + ", col " + std::to_string(col));
}

bool IsCellToken(std::string_view s) { return s == "0" || s == "1" || s == "NA"; }

}  // namespace

OutcomeMatrix::OutcomeMatrix(std::size_t n_models, std::size_t n_questions)
    : n_models_(n_models),
      n_questions_(n_questions),
      cells_(n_models * n_questions, Outcome::kUnobserved),
      model_ids_(DefaultIds("m_", n_models)),
      question_ids_(DefaultIds("q_", n_questions)) {}

OutcomeMatrix OutcomeMatrix::FromRows(const std::vector<std::vector<int>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  OutcomeMatrix m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) {
      throw DimensionError("ragged row " + std::to_string(i));
    }
    for (std::size_t j = 0; j < cols; ++j) {
      const int v = rows[i][j];
      if (v != 0 && v != 1 && v != -1) {
        throw ArgumentError("cell values must be 0, 1 or -1");
      }
      m.set(i, j, static_cast<Outcome>(v));
    }
  }
  return m;
}

std::size_t OutcomeMatrix::CountObserved() const {
  return static_cast<std::size_t>(
      std::count_if(cells_.begin(), cells_.end(), IsObserved));
}

bool OutcomeMatrix::FullyObserved() const {
  return std::all_of(cells_.begin(), cells_.end(), IsObserved);
}

void OutcomeMatrix::set_model_ids(std::vector<std::string> ids) {
  if (ids.size() != n_models_) throw DimensionError("model id count mismatch");
  model_ids_ = std::move(ids);
}

void OutcomeMatrix::set_question_ids(std::vector<std::string> ids) {
  if (ids.size() != n_questions_) {
    throw DimensionError("question id count mismatch");
  }
  question_ids_ = std::move(ids);
}

void OutcomeMatrix::set_release_ordinals(std::vector<std::int64_t> ordinals) {
  if (!ordinals.empty() && ordinals.size() != n_models_) {
    throw DimensionError("release ordinal count mismatch");
  }
  release_ordinals_ = std::move(ordinals);
}

OutcomeMatrix OutcomeMatrix::SelectRows(std::span<const std::size_t> rows) const {
  OutcomeMatrix out(rows.size(), n_questions_);
  out.question_ids_ = question_ids_;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::size_t src = rows[r];
    if (src >= n_models_) throw ArgumentError("row index out of range");
    std::copy_n(cells_.begin() + src * n_questions_, n_questions_,
                out.cells_.begin() + r * n_questions_);
    out.model_ids_[r] = model_ids_[src];
  }
  if (!release_ordinals_.empty()) {
    out.release_ordinals_.resize(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      out.release_ordinals_[r] = release_ordinals_[rows[r]];
    }
  }
  return out;
}

std::vector<std::uint8_t> OutcomeMatrix::AnswerVector(std::size_t i) const {
  std::vector<std::uint8_t> z(n_questions_);
  for (std::size_t j = 0; j < n_questions_; ++j) {
    const Outcome o = at(i, j);
    if (!IsObserved(o)) {
      throw DataError("model row " + std::to_string(i) +
                      " has unobserved answers");
    }
    z[j] = o == Outcome::kCorrect ? 1 : 0;
  }
  return z;
}

OutcomeMatrix ReadMatrix(std::istream& in) {
  std::vector<std::vector<std::string>> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    lines.push_back(SplitCsvLine(line));
  }
  if (lines.empty()) throw DimensionError("matrix file is empty");

  const bool canonical = lines.front().front() == "model_id";
  const bool bare = !canonical && std::all_of(lines.front().begin(),
                                              lines.front().end(), IsCellToken);
  if (!canonical && !bare) {
    throw ParseError("expected header starting with 'model_id'");
  }

  const std::size_t first_data_line = canonical ? 1 : 0;
  const std::size_t id_cols = canonical ? 1 : 0;
  const std::size_t width = lines.front().size();
  const std::size_t n_questions = width - id_cols;
  const std::size_t n_models = lines.size() - first_data_line;
  if (n_models == 0 || n_questions == 0) {
    throw DimensionError("matrix needs at least one model and one question");
  }

  OutcomeMatrix m(n_models, n_questions);
  std::vector<std::string> model_ids(n_models);
  for (std::size_t r = 0; r < n_models; ++r) {
    const auto& cells = lines[r + first_data_line];
    if (cells.size() != width) {
      throw DimensionError("row " + std::to_string(r) + " has " +
                           std::to_string(cells.size()) + " cells, expected " +
                           std::to_string(width));
    }
    model_ids[r] = canonical ? cells[0] : "m_" + std::to_string(r);
    for (std::size_t j = 0; j < n_questions; ++j) {
      m.set(r, j, ParseCell(cells[j + id_cols], r, j));
    }
  }
  m.set_model_ids(std::move(model_ids));
  if (canonical) {
    m.set_question_ids(
        std::vector<std::string>(lines.front().begin() + 1, lines.front().end()));
  }
  return m;
}

OutcomeMatrix LoadMatrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open " + path);
  return ReadMatrix(in);
}

void WriteMatrix(const OutcomeMatrix& m, std::ostream& out) {
  out << "model_id";
  for (const auto& q : m.question_ids()) out << ',' << q;
  out << '\n';
  for (std::size_t i = 0; i < m.n_models(); ++i) {
    out << m.model_ids()[i];
    for (Outcome o : m.row(i)) {
      switch (o) {
        case Outcome::kCorrect: out << ",1"; break;
        case Outcome::kIncorrect: out << ",0"; break;
        case Outcome::kUnobserved: out << ",NA"; break;
      }
    }
    out << '\n';
  }
}

void SaveMatrix(const OutcomeMatrix& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write " + path);
  WriteMatrix(m, out);
}

std::map<std::string, std::int64_t> LoadReleaseOrdinals(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open " + path);
  std::map<std::string, std::int64_t> ordinals;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = SplitCsvLine(line);
    if (row++ == 0 && cells.size() == 2 && cells[0] == "model_id") continue;
    if (cells.size() != 2) {
      throw DimensionError("metadata row " + std::to_string(row) +
                           " must have 2 cells");
    }
    ordinals[cells[0]] = ParseInt(cells[1], "release_ordinal");
  }
  return ordinals;
}

void AttachReleaseOrdinals(OutcomeMatrix& m,
                           const std::map<std::string, std::int64_t>& ordinals) {
  std::vector<std::int64_t> out(m.n_models());
  for (std::size_t i = 0; i < m.n_models(); ++i) {
    auto it = ordinals.find(m.model_ids()[i]);
    if (it == ordinals.end()) {
      throw DataError("no release ordinal for model " + m.model_ids()[i]);
    }
    out[i] = it->second;
  }
  m.set_release_ordinals(std::move(out));
}

OutcomeMatrix InduceMissingness(const OutcomeMatrix& m, std::size_t n_full_obs,
                                double p_obs, std::uint64_t seed) {
  if (n_full_obs > m.n_models()) {
    throw ArgumentError("n_full_obs exceeds number of models");
  }
  if (!(p_obs >= 0.0 && p_obs <= 1.0)) {
    throw ArgumentError("p_obs must lie in [0, 1]");
  }
  if (!m.FullyObserved()) {
    throw ArgumentError("InduceMissingness expects a fully observed matrix");
  }
  const CounterRng root(seed);
  const auto perm = Permutation(m.n_models(), root.Split(0).key());
  std::vector<std::uint8_t> keep_row(m.n_models(), 0);
  for (std::size_t r = 0; r < n_full_obs; ++r) keep_row[perm[r]] = 1;

  OutcomeMatrix out = m;
  for (std::size_t i = 0; i < m.n_models(); ++i) {
    if (keep_row[i]) continue;
    CounterRng rng = root.Split(1 + i);
    for (std::size_t j = 0; j < m.n_questions(); ++j) {
      if (!rng.Bernoulli(p_obs)) out.set(i, j, Outcome::kUnobserved);
    }
  }
  return out;
}

std::pair<OutcomeMatrix, OutcomeMatrix> SplitRows(
    const OutcomeMatrix& m, std::span<const std::int64_t> ordering,
    std::size_t first) {
  if (ordering.size() != m.n_models()) {
    throw DimensionError("ordering length must equal number of models");
  }
  if (first > m.n_models()) {
    throw ArgumentError("split point exceeds number of models");
  }
  std::vector<std::size_t> order(m.n_models());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ordering[a] < ordering[b];
  });
  const std::span<const std::size_t> all(order);
  return {m.SelectRows(all.first(first)), m.SelectRows(all.subspan(first))};
}

DifficultyVector DifficultyMeans(const OutcomeMatrix& h) {
  const std::size_t nq = h.n_questions();
  std::vector<double> correct(nq, 0.0);
  std::vector<double> seen(nq, 0.0);
  for (std::size_t i = 0; i < h.n_models(); ++i) {
    const auto row = h.row(i);
    for (std::size_t j = 0; j < nq; ++j) {
      if (!IsObserved(row[j])) continue;
      seen[j] += 1.0;
      if (row[j] == Outcome::kCorrect) correct[j] += 1.0;
    }
  }
  const double total_seen = std::accumulate(seen.begin(), seen.end(), 0.0);
  if (total_seen == 0.0) {
    throw DataError("difficulty means need at least one observed entry");
  }
  const double global =
      std::accumulate(correct.begin(), correct.end(), 0.0) / total_seen;

  DifficultyVector d;
  d.values.resize(nq);
  d.imputed.assign(nq, 0);
  for (std::size_t j = 0; j < nq; ++j) {
    if (seen[j] > 0.0) {
      d.values[j] = correct[j] / seen[j];
    } else {
      d.values[j] = global;
      d.imputed[j] = 1;
    }
  }
  return d;
}

}  // namespace faq
