// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace evoboss {

// Malformed or inconsistent input files. The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BudgetExhausted : public std::runtime_error {
 public:
  BudgetExhausted() : std::runtime_error("screening budget exhausted") {}
};

class DuplicateScreen : public std::runtime_error {
 public:
  explicit DuplicateScreen(const std::string& word)
      : std::runtime_error("variant already screened: " + word) {}
};

// Cholesky failure that jitter escalation could not repair.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SearchSpaceExhausted : public std::runtime_error {
 public:
  SearchSpaceExhausted() : std::runtime_error("all candidates already screened") {}
};

}  // namespace evoboss
