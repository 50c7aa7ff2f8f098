#pragma once

#include <stdexcept>
#include <string>

namespace chainrec {

/// Failure classes. Each maps to one CLI exit code (see exit_code()).
enum class ErrorKind {
  config,     // invalid configuration or malformed input data
  domain,     // point or index outside the ambient space / grid
  numerical,  // solver divergence, degeneracy, non-finite values
  budget,     // a declared resource limit was exceeded
  io,         // file read/write failure
  internal    // a post-condition check failed
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string stage, std::string message,
        std::string entity = {})
      : std::runtime_error(compose(stage, message, entity)),
        kind_(kind),
        stage_(std::move(stage)),
        entity_(std::move(entity)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& stage() const noexcept { return stage_; }
  const std::string& entity() const noexcept { return entity_; }

 private:
  static std::string compose(const std::string& stage, const std::string& msg,
                             const std::string& entity) {
    std::string out = stage.empty() ? msg : stage + ": " + msg;
    if (!entity.empty()) out += " [" + entity + "]";
    return out;
  }

  ErrorKind kind_;
  std::string stage_;
  std::string entity_;
};

/// Newton/shooting solver failed to reach tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(std::string stage, std::string message, double last_residual)
      : Error(ErrorKind::numerical, std::move(stage), std::move(message)),
        last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

/// Df^tau - I is singular: the closed orbit has an eigenvalue equal to 1.
class DegeneracyError : public Error {
 public:
  DegeneracyError(std::string stage, std::string message)
      : Error(ErrorKind::numerical, std::move(stage), std::move(message)) {}
};

inline int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::domain:
    case ErrorKind::io:
      return 2;
    case ErrorKind::numerical:
      return 3;
    case ErrorKind::budget:
      return 4;
    case ErrorKind::internal:
      return 1;
  }
  return 1;
}

}  // namespace chainrec
