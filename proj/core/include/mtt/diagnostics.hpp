#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace mtt {

// Source position, 1-based. line == 0 means "no position".
struct Span {
  std::string file;
  std::size_t line = 0;
  std::size_t col = 0;

  bool known() const { return line != 0; }
  std::string str() const {
    if (!known()) return file.empty() ? "<unknown>" : file;
    return file + ":" + std::to_string(line) + ":" + std::to_string(col);
  }
};

// A rejection or warning produced by checking. `rule` names the judgment
// rule whose side condition failed (e.g. "tm/var", "tp/modal", "conv").
struct Diagnostic {
  std::string rule;
  std::string message;
  Span span;
  std::string expected;    // printed form, may be empty
  std::string actual;      // printed form, may be empty
  std::string obligation;  // unsatisfied mode-theory query, may be empty

  std::string str() const {
    std::string out = span.known() ? span.str() + ": " : "";
    out += "[" + rule + "] " + message;
    if (!expected.empty()) out += "\n  expected: " + expected;
    if (!actual.empty()) out += "\n  actual:   " + actual;
    if (!obligation.empty()) out += "\n  requires: " + obligation;
    return out;
  }
};

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// 1-cell or 2-cell composition with mismatched endpoints.
struct BoundaryMismatch : Error {
  using Error::Error;
};

// Word problem gave up before reaching a verdict.
struct Undecided : Error {
  std::size_t depth;
  explicit Undecided(std::size_t d)
      : Error("word problem undecided at depth " + std::to_string(d)), depth(d) {}
};

// A substitution was applied to a term it cannot act on.
struct IllFormedSubstitution : Error {
  using Error::Error;
};

// Evaluation ran out of axiom-unfolding budget.
struct FuelExhausted : Error {
  using Error::Error;
};

// Parse failure in any of the textual formats.
struct ParseError : Error {
  Span span;
  ParseError(std::string msg, Span s) : Error(s.str() + ": " + msg), span(std::move(s)) {}
};

// Surface-to-core elaboration failures that are not type errors.
struct ScopeError : Error {
  using Error::Error;
};
struct ModeError : Error {
  using Error::Error;
};

// Raised by the checker; carried diagnostic is surfaced at the API boundary.
struct CheckFailure : Error {
  Diagnostic diag;
  explicit CheckFailure(Diagnostic d) : Error(d.str()), diag(std::move(d)) {}
};

}  // namespace mtt
