#pragma once

#include <stdexcept>
#include <string>

namespace qrag {

// Error categories; the CLI maps them onto its exit-code contract
// (1 generic, 2 input/validation, 3 I/O, 4 backend/protocol).
enum class ErrorKind {
    generic = 1,
    validation = 2,
    io = 3,
    backend = 4,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

  private:
    ErrorKind kind_;
};

class ValidationError : public Error {
  public:
    explicit ValidationError(const std::string& message)
        : Error(ErrorKind::validation, message) {}
};

class IoError : public Error {
  public:
    explicit IoError(const std::string& message)
        : Error(ErrorKind::io, message) {}
};

class BackendError : public Error {
  public:
    explicit BackendError(const std::string& message)
        : Error(ErrorKind::backend, message) {}
};

}  // namespace qrag
