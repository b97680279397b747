#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace viscoflow {

enum class ErrorKind {
  singular_matrix,
  solver_divergence,
  positivity_loss,
  cfl_violation,
  inadmissible_initial_data,
  invalid_test_field,
  identity_violation,
  parse_error,
  validation_error,
  io,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::singular_matrix: return "SingularMatrix";
    case ErrorKind::solver_divergence: return "SolverDivergence";
    case ErrorKind::positivity_loss: return "PositivityLoss";
    case ErrorKind::cfl_violation: return "CFLViolation";
    case ErrorKind::inadmissible_initial_data: return "InadmissibleInitialData";
    case ErrorKind::invalid_test_field: return "InvalidTestField";
    case ErrorKind::identity_violation: return "IdentityViolation";
    case ErrorKind::parse_error: return "ParseError";
    case ErrorKind::validation_error: return "ValidationError";
    case ErrorKind::io: return "IOError";
  }
  return "Unknown";
}

/// Base of every error thrown by the library. `step()` is attached by the
/// time loop when an error escapes a time step.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<long> step() const noexcept { return step_; }
  void set_step(long s) noexcept { step_ = s; }

 private:
  ErrorKind kind_;
  std::optional<long> step_;
};

struct SingularMatrix : Error {
  explicit SingularMatrix(const std::string& w) : Error(ErrorKind::singular_matrix, w) {}
};
struct SolverDivergence : Error {
  explicit SolverDivergence(const std::string& w) : Error(ErrorKind::solver_divergence, w) {}
};
struct PositivityLoss : Error {
  PositivityLoss(const std::string& w, long cell, double min_lambda)
      : Error(ErrorKind::positivity_loss, w), cell(cell), min_lambda(min_lambda) {}
  long cell;
  double min_lambda;
};
struct CFLViolation : Error {
  CFLViolation(const std::string& w, double cfl) : Error(ErrorKind::cfl_violation, w), cfl(cfl) {}
  double cfl;
};
struct InadmissibleInitialData : Error {
  InadmissibleInitialData(const std::string& w, long cell)
      : Error(ErrorKind::inadmissible_initial_data, w), cell(cell) {}
  long cell;
};
struct InvalidTestField : Error {
  explicit InvalidTestField(const std::string& w) : Error(ErrorKind::invalid_test_field, w) {}
};
struct IdentityViolation : Error {
  IdentityViolation(const std::string& w, std::string matrix)
      : Error(ErrorKind::identity_violation, matrix.empty() ? w : w + " at " + matrix), matrix(std::move(matrix)) {}
  std::string matrix;
};
struct ParseError : Error {
  ParseError(int line, const std::string& reason)
      : Error(ErrorKind::parse_error, "line " + std::to_string(line) + ": " + reason),
        line(line),
        reason(reason) {}
  int line;
  std::string reason;
};
struct ValidationError : Error {
  ValidationError(const std::string& key, const std::string& constraint)
      : Error(ErrorKind::validation_error, key + " " + constraint), key(key), constraint(constraint) {}
  std::string key;
  std::string constraint;
};

}  // namespace viscoflow
