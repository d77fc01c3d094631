#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace erto {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on an argument was violated (negative distance, p outside
// [0,1], non-finite input, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// etx() of a link with zero delivery probability.
class UnreachableLink : public Error {
 public:
  using Error::Error;
};

// Expected-attempt or energy model evaluated on a candidate set that can
// never receive (pdr_sc == 0).
class NoReachableCandidate : public Error {
 public:
  using Error::Error;
};

// Lens half-angle requested in the containment case (no chord exists).
class GeometryDegenerate : public Error {
 public:
  using Error::Error;
};

// Every point of the decision grid is infeasible.
class NoFeasibleTopology : public Error {
 public:
  using Error::Error;
};

// Sender has no neighbor that makes progress toward the destination.
class RoutingVoid : public Error {
 public:
  using Error::Error;
};

// Invalid configuration. `line` is 1-based, 0 when not tied to a file.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace erto
