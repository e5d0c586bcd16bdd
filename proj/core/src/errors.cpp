#include "isobn/errors.hpp"

#include <fmt/format.h>

namespace isobn {

namespace {

std::string located(const std::string& message, std::size_t line, std::size_t column, const std::string& source) {
    const std::string prefix = source.empty() ? "" : source + ": ";
    if (line == 0) return prefix + message;
    if (column == 0) return fmt::format("{}line {}: {}", prefix, line, message);
    return fmt::format("{}line {}, column {}: {}", prefix, line, column, message);
}

}  // namespace

ParseError::ParseError(const std::string& message, std::size_t line, std::size_t column, std::string source)
    : ValidationError(located(message, line, column, source)),
      detail_(message),
      line_(line),
      column_(column),
      source_(std::move(source)) {}

}  // namespace isobn
