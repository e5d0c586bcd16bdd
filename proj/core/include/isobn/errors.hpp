#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace isobn {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input: bad network structure, bad CPT, bad sign, bad data.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Syntax error in a text file. Line and column are 1-based; 0 means unknown.
class ParseError : public ValidationError {
public:
    ParseError(const std::string& message, std::size_t line, std::size_t column = 0, std::string source = {});

    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }
    const std::string& source() const { return source_; }
    const std::string& detail() const { return detail_; }

    /// Same error attributed to a named input, e.g. a file path.
    ParseError with_source(std::string source) const { return ParseError(detail_, line_, column_, std::move(source)); }

private:
    std::string detail_;
    std::size_t line_;
    std::size_t column_;
    std::string source_;
};

class FeasibilityError : public Error {
public:
    using Error::Error;
};

/// A post-condition that should hold by construction was violated.
class InternalError : public Error {
public:
    using Error::Error;
};

}  // namespace isobn
