#pragma once

#include <stdexcept>
#include <string>

namespace gmhg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Anything wrong with what the caller passed in.
class InputError : public Error {
 public:
  using Error::Error;
};

class MalformedGame : public InputError {
 public:
  explicit MalformedGame(const std::string& reason) : InputError("malformed game: " + reason) {}
};

class NotPolymatrix : public InputError {
 public:
  NotPolymatrix() : InputError("game is not a polymatrix game") {}
};

class NotTree : public InputError {
 public:
  explicit NotTree(const std::string& reason) : InputError("interaction graph is not a tree: " + reason) {}
};

class EpsilonNonpositive : public InputError {
 public:
  EpsilonNonpositive() : InputError("epsilon must be positive") {}
};

class UnnormalizedStrategy : public InputError {
 public:
  explicit UnnormalizedStrategy(const std::string& what) : InputError("unnormalized strategy: " + what) {}
};

class DimensionMismatch : public InputError {
 public:
  explicit DimensionMismatch(const std::string& what) : InputError("dimension mismatch: " + what) {}
};

class PlanMismatch : public InputError {
 public:
  explicit PlanMismatch(const std::string& what) : InputError("plan mismatch: " + what) {}
};

class ParameterOutOfRange : public InputError {
 public:
  explicit ParameterOutOfRange(const std::string& what) : InputError("parameter out of range: " + what) {}
};

class SchemaError : public InputError {
 public:
  SchemaError(const std::string& path, const std::string& what)
      : InputError("schema error at " + (path.empty() ? std::string("/") : path) + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// Exhaustive enumeration or search exceeded its declared budget.
class TooLarge : public Error {
 public:
  explicit TooLarge(const std::string& what) : Error("resource limit: " + what) {}
};

// The tree DP found no feasible strategy at the root. Under the sizing
// guarantees this never happens, so it signals an arithmetic or sizing bug.
class InfeasibleAtRoot : public Error {
 public:
  explicit InfeasibleAtRoot(const std::string& diagnostics)
      : Error("no feasible root strategy: " + diagnostics) {}
};

}  // namespace gmhg
