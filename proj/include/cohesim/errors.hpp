#pragma once

#include <stdexcept>
#include <string>

namespace cohesim {

/// Root of all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Cohesive envelope violates one of the structural hypotheses (H1)-(H4).
class ValidationError : public Error {
public:
    using Error::Error;
};

class MeshError : public Error {
public:
    using Error::Error;
};

/// Scenario or study configuration is malformed or inconsistent.
class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Nonlinear solver failure (stagnation, iteration cap, convexity guard).
class SolverError : public Error {
public:
    SolverError(const std::string& what, double residual = 0.0, int step = -1)
        : Error(what), residual_(residual), step_(step) {}

    double residual() const noexcept { return residual_; }
    int step() const noexcept { return step_; }
    void set_step(int step) noexcept { step_ = step; }

private:
    double residual_;
    int step_;
};

}  // namespace cohesim
