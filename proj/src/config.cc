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

// Experiment configs are `key = value` lines; `#` starts a comment. Lists are
// comma separated. Unknown keys are rejected so typos do not silently fall
// back to defaults.

#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <string>

#include "faq/errors.h"
#include "faq/harness.h"
#include "faq/text.h"

namespace faq {

namespace {

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

template <typename T>
Setter Int(T ExperimentConfig::*field) {
  return [field](ExperimentConfig& c, const std::string& v, const std::string& key) {
    const std::int64_t x = ParseInt(v, key);
    if constexpr (std::is_unsigned_v<T>) {
      if (x < 0) throw ParseError(key + " must be non-negative");
    }
    c.*field = static_cast<T>(x);
  };
}

template <typename T>
Setter BankInt(T SyntheticBankSpec::*field) {
  return [field](ExperimentConfig& c, const std::string& v, const std::string& key) {
    const std::int64_t x = ParseInt(v, key);
    if constexpr (std::is_unsigned_v<T>) {
      if (x < 0) throw ParseError(key + " must be non-negative");
    }
    c.bank.*field = static_cast<T>(x);
  };
}

Setter Real(double ExperimentConfig::*field) {
  return [field](ExperimentConfig& c, const std::string& v, const std::string& key) {
    c.*field = ParseDouble(v, key);
  };
}

Setter Text(std::string ExperimentConfig::*field) {
  return [field](ExperimentConfig& c, const std::string& v, const std::string&) {
    c.*field = v;
  };
}

Setter GridList(std::vector<double> PolicyGrid::*field) {
  return [field](ExperimentConfig& c, const std::string& v, const std::string& key) {
    c.grid.*field = ParseDoubleList(v, key);
  };
}

bool ParseBool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ParseError(key + ": expected a boolean, got '" + v + "'");
}

const std::map<std::string, Setter>& Setters() {
  static const std::map<std::string, Setter> table = {
      {"history_path", Text(&ExperimentConfig::history_path)},
      {"test_path", Text(&ExperimentConfig::test_path)},
      {"metadata_path", Text(&ExperimentConfig::metadata_path)},
      {"split_first", Int(&ExperimentConfig::split_first)},
      {"bank.n_questions", BankInt(&SyntheticBankSpec::n_questions)},
      {"bank.n_old", BankInt(&SyntheticBankSpec::n_old)},
      {"bank.n_test", BankInt(&SyntheticBankSpec::n_test)},
      {"bank.k_true", BankInt(&SyntheticBankSpec::k_true)},
      {"bank.logit_scale",
       [](ExperimentConfig& c, const std::string& v, const std::string& k) {
         c.bank.logit_scale = ParseDouble(v, k);
       }},
      {"bank.seed", BankInt(&SyntheticBankSpec::seed)},
      {"n_full_obs", Int(&ExperimentConfig::n_full_obs)},
      {"p_obs", Real(&ExperimentConfig::p_obs)},
      {"budget_fractions",
       [](ExperimentConfig& c, const std::string& v, const std::string& k) {
         c.budget_fractions = ParseDoubleList(v, k);
       }},
      {"methods",
       [](ExperimentConfig& c, const std::string& v, const std::string&) {
         c.methods.clear();
         for (const auto& m : SplitCsvLine(v)) {
           const std::string name(Trim(m));
           if (!name.empty()) c.methods.push_back(name);
         }
       }},
      {"seeds", Int(&ExperimentConfig::seeds)},
      {"max_test_models", Int(&ExperimentConfig::max_test_models)},
      {"alpha", Real(&ExperimentConfig::alpha)},
      {"seed", Int(&ExperimentConfig::seed)},
      {"factor.k", Int(&ExperimentConfig::factor_k)},
      {"factor.weight_decay", Real(&ExperimentConfig::factor_weight_decay)},
      {"factor.learning_rate", Real(&ExperimentConfig::factor_learning_rate)},
      {"factor.max_iters", Int(&ExperimentConfig::factor_max_iters)},
      {"factor.seed", Int(&ExperimentConfig::factor_seed)},
      {"factors_dir", Text(&ExperimentConfig::factors_dir)},
      {"policy.rho", Real(&ExperimentConfig::rho)},
      {"policy.gamma", Real(&ExperimentConfig::gamma)},
      {"policy.beta0", Real(&ExperimentConfig::beta0)},
      {"policy.tau", Real(&ExperimentConfig::tau)},
      {"baseline_tau", Real(&ExperimentConfig::baseline_tau)},
      {"tune_policy",
       [](ExperimentConfig& c, const std::string& v, const std::string& k) {
         c.tune_policy = ParseBool(v, k);
       }},
      {"val_fraction", Real(&ExperimentConfig::val_fraction)},
      {"tune_seeds", Int(&ExperimentConfig::tune_seeds)},
      {"grid.rho", GridList(&PolicyGrid::rho)},
      {"grid.gamma", GridList(&PolicyGrid::gamma)},
      {"grid.beta0", GridList(&PolicyGrid::beta0)},
      {"grid.tau", GridList(&PolicyGrid::tau)},
  };
  return table;
}

std::string JoinDoubles(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += FormatDouble(xs[i]);
  }
  return out;
}

}  // namespace

ExperimentConfig ParseExperimentConfig(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body(Trim(line));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ParseError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(Trim(std::string_view(body).substr(0, eq)));
    const std::string value(Trim(std::string_view(body).substr(eq + 1)));
    const auto it = Setters().find(key);
    if (it == Setters().end()) {
      throw ParseError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    it->second(cfg, value, key);
  }
  return cfg;
}

ExperimentConfig LoadExperimentConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open config '" + path + "'");
  return ParseExperimentConfig(in);
}

void WriteExperimentConfig(const ExperimentConfig& c, std::ostream& out) {
  auto kv = [&](const char* k, const std::string& v) { out << k << " = " << v << '\n'; };
  if (!c.history_path.empty()) kv("history_path", c.history_path);
  if (!c.test_path.empty()) kv("test_path", c.test_path);
  if (!c.metadata_path.empty()) kv("metadata_path", c.metadata_path);
  kv("split_first", std::to_string(c.split_first));
  kv("bank.n_questions", std::to_string(c.bank.n_questions));
  kv("bank.n_old", std::to_string(c.bank.n_old));
  kv("bank.n_test", std::to_string(c.bank.n_test));
  kv("bank.k_true", std::to_string(c.bank.k_true));
  kv("bank.logit_scale", FormatDouble(c.bank.logit_scale));
  kv("bank.seed", std::to_string(c.bank.seed));
  kv("n_full_obs", std::to_string(c.n_full_obs));
  kv("p_obs", FormatDouble(c.p_obs));
  kv("budget_fractions", JoinDoubles(c.budget_fractions));
  std::string methods;
  for (std::size_t i = 0; i < c.methods.size(); ++i) {
    if (i) methods += ',';
    methods += c.methods[i];
  }
  kv("methods", methods);
  kv("seeds", std::to_string(c.seeds));
  kv("max_test_models", std::to_string(c.max_test_models));
  kv("alpha", FormatDouble(c.alpha));
  kv("seed", std::to_string(c.seed));
  kv("factor.k", std::to_string(c.factor_k));
  kv("factor.weight_decay", FormatDouble(c.factor_weight_decay));
  kv("factor.learning_rate", FormatDouble(c.factor_learning_rate));
  kv("factor.max_iters", std::to_string(c.factor_max_iters));
  kv("factor.seed", std::to_string(c.factor_seed));
  if (!c.factors_dir.empty()) kv("factors_dir", c.factors_dir);
  kv("policy.rho", FormatDouble(c.rho));
  kv("policy.gamma", FormatDouble(c.gamma));
  kv("policy.beta0", FormatDouble(c.beta0));
  kv("policy.tau", FormatDouble(c.tau));
  kv("baseline_tau", FormatDouble(c.baseline_tau));
  kv("tune_policy", c.tune_policy ? "true" : "false");
  kv("val_fraction", FormatDouble(c.val_fraction));
  kv("tune_seeds", std::to_string(c.tune_seeds));
  kv("grid.rho", JoinDoubles(c.grid.rho));
  kv("grid.gamma", JoinDoubles(c.grid.gamma));
  kv("grid.beta0", JoinDoubles(c.grid.beta0));
  kv("grid.tau", JoinDoubles(c.grid.tau));
}

}  // namespace faq
