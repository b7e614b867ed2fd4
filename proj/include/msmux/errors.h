#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace msmux {

// Argument outside the mathematical domain of a formula (probability not in
// [0,1], zero site count, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// FailureModel or EscapeModel that violates its invariants.
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Caller broke an operation's contract (e.g. escape verdict supplied for a
// discarded shot).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class InvalidIndicators : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidPivot : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Text input that could not be parsed. `line` is 1-based; 0 when unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string source, std::size_t line, const std::string& what)
      : std::runtime_error(format(source, line, what)),
        source_(std::move(source)),
        line_(line) {}

  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }

 private:
  static std::string format(const std::string& source, std::size_t line,
                            const std::string& what) {
    std::string out = source.empty() ? std::string("<input>") : source;
    if (line > 0) out += ":" + std::to_string(line);
    return out + ": " + what;
  }

  std::string source_;
  std::size_t line_;
};

}  // namespace msmux
