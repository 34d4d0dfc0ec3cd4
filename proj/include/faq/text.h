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

// Small text helpers shared by the CSV and config readers.

#ifndef FAQ_TEXT_H_
#define FAQ_TEXT_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace faq {

// Splits on commas. No quoting: ids in this project never contain commas.
std::vector<std::string> SplitCsvLine(std::string_view line);

std::string_view Trim(std::string_view s);

// Strict parsers; throw ParseError naming `what` on any trailing garbage.
std::int64_t ParseInt(std::string_view s, std::string_view what);
double ParseDouble(std::string_view s, std::string_view what);
std::vector<double> ParseDoubleList(std::string_view s, std::string_view what);
std::vector<std::int64_t> ParseIntList(std::string_view s, std::string_view what);

// Shortest decimal text that round-trips to the same double.
std::string FormatDouble(double x);

}  // namespace faq

#endif  // FAQ_TEXT_H_
