#pragma once

#include <stdexcept>
#include <string>

namespace torcan {

// Thrown on violated preconditions and malformed inputs (CLI exit code 2).
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a family cannot be built (ladder order, overlapping bumps,
// unsatisfiable inequality). CLI exit code 2.
class ConstructionError : public std::runtime_error {
public:
    explicit ConstructionError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a nondegeneracy or soundness check fails on an assembled
// family. CLI exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown on solver breakdown: quadrature non-convergence, step-size
// underflow, max-steps. CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace torcan
