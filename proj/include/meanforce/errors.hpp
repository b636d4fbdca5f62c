// errors.hpp — Exception hierarchy shared by all meanforce modules

#pragma once

#include <stdexcept>
#include <string>

namespace meanforce {

// Base for everything thrown by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Operands with incompatible or non-square shapes.
struct DimensionError : Error {
    explicit DimensionError(const std::string& what) : Error("dimension error: " + what) {}
};

// A documented precondition (Hermiticity, unit trace, ...) failed beyond tolerance.
struct ContractViolation : Error {
    explicit ContractViolation(const std::string& what) : Error("contract violation: " + what) {}
};

// Input outside the mathematical domain of an operation (log of a negative
// eigenvalue, t < 0 ramps, degenerate mixing angles, ...).
struct DomainError : Error {
    explicit DomainError(const std::string& what) : Error("domain error: " + what) {}
};

// Bad scalar parameter (non-positive step, non-positive beta, ...).
struct ParameterError : Error {
    explicit ParameterError(const std::string& what) : Error("parameter error: " + what) {}
};

// Config-file or command-line problem; maps to exit code 2 in the CLI.
struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error("config error: " + what) {}
};

// A requested cross-check against an independent propagation path failed;
// maps to exit code 4 in the CLI.
struct OracleDeviation : Error {
    explicit OracleDeviation(const std::string& what) : Error("oracle deviation: " + what) {}
};

} // namespace meanforce
