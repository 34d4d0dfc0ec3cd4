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

// Historical outcome matrices: a models x questions grid of
// correct / incorrect / unobserved cells, with CSV I/O, MCAR degradation,
// release-order splits and per-question difficulty summaries.

#ifndef FAQ_OUTCOME_MATRIX_H_
#define FAQ_OUTCOME_MATRIX_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace faq {

enum class Outcome : std::int8_t {
  kIncorrect = 0,
  kCorrect = 1,
  kUnobserved = -1,
};

inline bool IsObserved(Outcome o) { return o != Outcome::kUnobserved; }

class OutcomeMatrix {
 public:
  OutcomeMatrix() = default;
  // All cells start unobserved. Ids default to m_<i> and q_<j>.
  OutcomeMatrix(std::size_t n_models, std::size_t n_questions);

  // Rows of 0 / 1 / -1 (unobserved). Rows must have equal length.
  static OutcomeMatrix FromRows(const std::vector<std::vector<int>>& rows);

  std::size_t n_models() const { return n_models_; }
  std::size_t n_questions() const { return n_questions_; }

  Outcome at(std::size_t i, std::size_t j) const {
    return cells_[i * n_questions_ + j];
  }
  void set(std::size_t i, std::size_t j, Outcome o) {
    cells_[i * n_questions_ + j] = o;
  }
  bool observed(std::size_t i, std::size_t j) const {
    return IsObserved(at(i, j));
  }
  std::span<const Outcome> row(std::size_t i) const {
    return {cells_.data() + i * n_questions_, n_questions_};
  }

  std::size_t CountObserved() const;
  bool FullyObserved() const;

  const std::vector<std::string>& model_ids() const { return model_ids_; }
  const std::vector<std::string>& question_ids() const { return question_ids_; }
  void set_model_ids(std::vector<std::string> ids);
  void set_question_ids(std::vector<std::string> ids);

  // Optional per-row release ordinal; empty when no metadata was attached.
  const std::vector<std::int64_t>& release_ordinals() const {
    return release_ordinals_;
  }
  void set_release_ordinals(std::vector<std::int64_t> ordinals);

  // New matrix holding the listed rows in the listed order.
  OutcomeMatrix SelectRows(std::span<const std::size_t> rows) const;

  // Row i as a 0/1 vector; throws DataError if any cell is unobserved.
  std::vector<std::uint8_t> AnswerVector(std::size_t i) const;

  friend bool operator==(const OutcomeMatrix&, const OutcomeMatrix&) = default;

 private:
  std::size_t n_models_ = 0;
  std::size_t n_questions_ = 0;
  std::vector<Outcome> cells_;
  std::vector<std::string> model_ids_;
  std::vector<std::string> question_ids_;
  std::vector<std::int64_t> release_ordinals_;
};

// Per-question mean of observed historical outcomes.
struct DifficultyVector {
  std::vector<double> values;
  // 1 where the question had no observations and got the global mean.
  std::vector<std::uint8_t> imputed;
};

// Canonical format: header `model_id,q_0,...`, one leading id column, cells
// in {0,1,NA}. A bare grid of cells without header or id column is also
// accepted; ids are then synthesized.
OutcomeMatrix ReadMatrix(std::istream& in);
OutcomeMatrix LoadMatrix(const std::string& path);
void WriteMatrix(const OutcomeMatrix& m, std::ostream& out);
void SaveMatrix(const OutcomeMatrix& m, const std::string& path);

// `model_id,release_ordinal` CSV; returns id -> ordinal.
std::map<std::string, std::int64_t> LoadReleaseOrdinals(const std::string& path);
// Attaches ordinals by model id; every row must be present in the map.
void AttachReleaseOrdinals(OutcomeMatrix& m,
                           const std::map<std::string, std::int64_t>& ordinals);

// Keeps `n_full_obs` uniformly chosen rows intact and masks every other
// entry independently with probability 1 - p_obs.
OutcomeMatrix InduceMissingness(const OutcomeMatrix& m, std::size_t n_full_obs,
                                double p_obs, std::uint64_t seed);

// Stable sort by `ordering` (ties keep input order); the first `first` rows
// go left, the rest right.
std::pair<OutcomeMatrix, OutcomeMatrix> SplitRows(
    const OutcomeMatrix& m, std::span<const std::int64_t> ordering,
    std::size_t first);

DifficultyVector DifficultyMeans(const OutcomeMatrix& h);

}  // namespace faq

#endif  // FAQ_OUTCOME_MATRIX_H_
