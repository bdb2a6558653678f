#pragma once

#include <stdexcept>
#include <string>

namespace apvote {

// Raised when a computation cannot meet its accuracy contract (e.g. the
// DFT characterization leaves a complex residue, or a quadrature fails to
// converge). CLI maps this to exit code 3.
struct numeric_instability_error : std::runtime_error {
    explicit numeric_instability_error(const std::string& what)
        : std::runtime_error(what) {}
};

// Raised when an exhaustive computation would exceed its enumeration
// budget. CLI maps this to exit code 4.
struct budget_exceeded_error : std::runtime_error {
    explicit budget_exceeded_error(const std::string& what)
        : std::runtime_error(what) {}
};

// Configuration / input validation failure. CLI maps this to exit code 2.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what)
        : std::runtime_error(what) {}
};

}  // namespace apvote
