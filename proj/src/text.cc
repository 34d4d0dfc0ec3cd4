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

#include "faq/text.h"

#include <charconv>
#include <cmath>
#include <limits>

#include "faq/errors.h"

namespace faq {

std::vector<std::string> SplitCsvLine(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      return out;
    }
    out.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::int64_t ParseInt(std::string_view s, std::string_view what) {
  s = Trim(s);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ParseError("invalid integer for " + std::string(what) + ": '" +
                     std::string(s) + "'");
  }
  return v;
}

double ParseDouble(std::string_view s, std::string_view what) {
  s = Trim(s);
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "nan" || s == "NA") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ParseError("invalid number for " + std::string(what) + ": '" +
                     std::string(s) + "'");
  }
  return v;
}

std::vector<double> ParseDoubleList(std::string_view s, std::string_view what) {
  std::vector<double> out;
  for (const auto& item : SplitCsvLine(Trim(s))) {
    out.push_back(ParseDouble(item, what));
  }
  return out;
}

std::vector<std::int64_t> ParseIntList(std::string_view s, std::string_view what) {
  std::vector<std::int64_t> out;
  for (const auto& item : SplitCsvLine(Trim(s))) {
    out.push_back(ParseInt(item, what));
  }
  return out;
}

std::string FormatDouble(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

}  // namespace faq
