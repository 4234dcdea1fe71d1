#ifndef LSEBU_ERRORS_HPP
#define LSEBU_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lsebu {

// Error categories, mirrored by the C API status codes and the CLI exit codes.
enum class ErrorKind {
    Io,
    Parse,       // malformed input text
    Validation,  // structurally valid input that violates a model invariant
    Numeric,     // singularity, non-convergence, divergence
    Usage        // bad argument to an operation
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class IoError : public Error {
public:
    explicit IoError(std::string message) : Error(ErrorKind::Io, std::move(message)) {}
};

// Carries the 1-based line/column of the offending token.
class ParseError : public Error {
public:
    ParseError(std::string message, std::size_t line, std::size_t column)
        : Error(ErrorKind::Parse,
                "line " + std::to_string(line) + ", col " + std::to_string(column) + ": " + message),
          line_(line),
          column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(std::string message) : Error(ErrorKind::Validation, std::move(message)) {}
};

class NumericError : public Error {
public:
    explicit NumericError(std::string message) : Error(ErrorKind::Numeric, std::move(message)) {}
};

class UsageError : public Error {
public:
    explicit UsageError(std::string message) : Error(ErrorKind::Usage, std::move(message)) {}
};

}  // namespace lsebu

#endif
