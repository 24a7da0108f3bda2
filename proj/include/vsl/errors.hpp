#pragma once

#include <stdexcept>
#include <string>

namespace vsl {

// Error categories map one-to-one onto CLI exit codes and HTTP statuses.
enum class ErrorKind { Validation, Infeasible, Singular, Io };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

struct InfeasibleError : Error {
  explicit InfeasibleError(const std::string& what) : Error(ErrorKind::Infeasible, what) {}
};

struct SingularSystemError : Error {
  explicit SingularSystemError(const std::string& what) : Error(ErrorKind::Singular, what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

}  // namespace vsl
