#pragma once

#include <stdexcept>
#include <string>

namespace xrmdn {

/// Stable error categories. The numeric values double as process exit codes
/// for the CLI and as status codes in the C API.
enum class ErrorCode : int {
    internal = 1,
    config = 2,
    data = 3,
    numeric = 4,
    io = 5,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Invalid dimensions, options, or profile names.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorCode::config, what) {}
};

/// Problems with the content of a dataset (too short, empty split, ...).
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorCode::data, what) {}

protected:
    DataError(ErrorCode code, const std::string& what) : Error(code, what) {}
};

/// Malformed cell or timestamp while reading a file; the message carries the location.
class ParseError : public DataError {
public:
    explicit ParseError(const std::string& what) : DataError(ErrorCode::data, what) {}
};

/// Structural violations of the dataset contract (gaps, duplicate timestamps).
class SchemaError : public DataError {
public:
    explicit SchemaError(const std::string& what) : DataError(ErrorCode::data, what) {}
};

/// Argument outside the mathematical domain of a numeric primitive.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorCode::config, what) {}
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(ErrorCode::numeric, what) {}

protected:
    NumericError(ErrorCode code, const std::string& what) : Error(code, what) {}
};

/// Training produced a non-finite loss, gradient, or parameter.
class TrainingDivergedError : public NumericError {
public:
    explicit TrainingDivergedError(const std::string& what) : NumericError(ErrorCode::numeric, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorCode::io, what) {}
};

}  // namespace xrmdn
