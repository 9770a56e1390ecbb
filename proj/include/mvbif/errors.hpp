#pragma once

#include <stdexcept>
#include <string>

namespace mvbif {

/// Non-finite or overflowing value met during a grid computation.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what, double node = 0.0)
      : std::runtime_error(what), node_(node) {}
  double node() const noexcept { return node_; }

 private:
  double node_;
};

/// Malformed model document or expression. `pointer` is a JSON pointer
/// (or the offending token for expression errors).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::string pointer)
      : std::runtime_error(what), pointer_(std::move(pointer)) {}
  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

class ValidationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class LookupError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The function does not change sign on the requested bracket.
class BracketError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class LinearAlgebraError : public std::runtime_error {
 public:
  LinearAlgebraError(const std::string& what, double condition)
      : std::runtime_error(what), condition_(condition) {}
  double condition_number() const noexcept { return condition_; }

 private:
  double condition_;
};

/// A particle left the simulation window; usually dt is too large.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(const std::string& what, double dt)
      : std::runtime_error(what), dt_(dt) {}
  double dt() const noexcept { return dt_; }

 private:
  double dt_;
};

/// Wraps a failure inside a multi-stage pipeline with the stage name.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error("[" + stage + "] " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace mvbif
