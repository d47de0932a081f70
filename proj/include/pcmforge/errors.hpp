//
// pcm-forge - Copyright 2026 The pcm-forge Authors
// SPDX-License-Identifier: Apache-2.0
//

#ifndef PCMFORGE_ERRORS_HPP_
#define PCMFORGE_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace pcmforge {

/// Argument outside the physical or mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// The commanded operating point has no physical solution
/// (e.g. heat rejection through a branch that carries no flow).
class InfeasibleError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A linear system could not be solved reliably.
class NumericalError : public std::runtime_error {
public:
  NumericalError(const std::string &what, double condition)
      : std::runtime_error(what), condition_(condition) {}

  double condition() const noexcept { return condition_; }

private:
  double condition_;
};

/// Malformed input file. `row()` is the 1-based data row, 0 when the
/// problem is not tied to a row.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string &what, std::size_t row = 0)
      : std::runtime_error(what), row_(row) {}

  std::size_t row() const noexcept { return row_; }

private:
  std::size_t row_;
};

} // namespace pcmforge

#endif // PCMFORGE_ERRORS_HPP_
