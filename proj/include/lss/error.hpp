#pragma once

#include <stdexcept>
#include <string>

namespace lss {

/// Raised when an iterative numerical routine exhausts its iteration budget.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Configuration parse or validation failure. `where` carries "line:column"
/// and/or the offending field path when known.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, std::string where = {})
        : std::runtime_error(where.empty() ? what : where + ": " + what), where_(std::move(where)) {}

    const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

}  // namespace lss
