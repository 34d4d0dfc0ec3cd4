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

#ifndef FAQ_ERRORS_H_
#define FAQ_ERRORS_H_

#include <stdexcept>
#include <string>

namespace faq {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument or violated precondition.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Malformed input text (CSV cells, config lines).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Shapes that do not line up (ragged rows, factor/matrix mismatch).
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Data insufficient for the requested computation.
class DataError : public Error {
 public:
  using Error::Error;
};

// Cross-validation fold without any held-out entries.
class FoldError : public Error {
 public:
  using Error::Error;
};

// Non-finite objective, failed Cholesky, diverged Newton solve.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace faq

#endif  // FAQ_ERRORS_H_
