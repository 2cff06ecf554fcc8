#pragma once

#include <stdexcept>
#include <string>

namespace cirsum {

// Invalid argument or parameter domain (maps to CLI exit code 2).
struct domain_error : std::runtime_error {
    explicit domain_error(const std::string& what) : std::runtime_error(what) {}
};

// A numerical budget was exhausted before the requested accuracy was
// certified: series term caps, truncation targets that cannot be met,
// quadrature that did not converge (maps to CLI exit code 3).
struct budget_error : std::runtime_error {
    explicit budget_error(const std::string& what) : std::runtime_error(what) {}
};

// Configuration file / flag problems (maps to CLI exit code 2).
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cirsum
