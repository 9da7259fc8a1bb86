#pragma once

#include <stdexcept>
#include <string>

namespace imsp {

/// Argument outside the mathematical domain of a special function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Green's function evaluated at coincident points.
class SingularityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Receivers or primitives placed inconsistently with the mesh.
class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A dense or iterative solve failed; carries the reciprocal condition
/// estimate when one is available (0 when unknown).
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double rcond)
      : std::runtime_error(what), rcond_(rcond) {}
  double rcond() const noexcept { return rcond_; }

 private:
  double rcond_;
};

/// Malformed scenario or artifact file.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, int line, const std::string& field,
             const std::string& message)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " +
                           (field.empty() ? "" : "'" + field + "': ") + message),
        line_(line),
        field_(field) {}
  int line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  int line_;
  std::string field_;
};

/// A pipeline stage aborted; wraps the underlying cause.
class StageError : public std::runtime_error {
 public:
  StageError(const std::string& stage, const std::string& cause)
      : std::runtime_error("stage '" + stage + "' failed: " + cause), stage_(stage) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace imsp
