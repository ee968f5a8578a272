#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dopi {

// Base for every failure raised by the library. `code()` is a stable
// machine-readable tag used by the CLI and the HTTP layer.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

// Bad input data: empty datasets, unknown ids, schema violations.
class DataError : public Error {
public:
    using Error::Error;
};

// Malformed serialized document. `line` is 1-based, 0 when unknown.
class ParseError : public DataError {
public:
    ParseError(const std::string& message, std::size_t line = 0, std::string field = {})
        : DataError("PARSE_ERROR", message), line_(line), field_(std::move(field)) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

// Operation invoked in a session state that does not allow it.
class StateError : public Error {
public:
    explicit StateError(const std::string& message) : Error("INVALID_STATE", message) {}
};

} // namespace dopi
