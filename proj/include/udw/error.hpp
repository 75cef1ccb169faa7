#pragma once

#include <stdexcept>
#include <string>

namespace udw {

/// Base of every error raised by the simulator.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical or physical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class IndexError : public Error {
public:
    using Error::Error;
};

/// Malformed or physically invalid run configuration. Message names the key.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Failures of the numerics (as opposed to bad input). The CLI maps these to exit code 2.
class NumericalError : public Error {
public:
    using Error::Error;
};

class UnphysicalStateError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DegeneracyError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DriftError : public NumericalError {
public:
    DriftError(double time, double residual, const std::string& what)
        : NumericalError(what), time_(time), residual_(residual) {}

    double time() const noexcept { return time_; }
    double residual() const noexcept { return residual_; }

private:
    double time_;
    double residual_;
};

class StepUnderflowError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace udw
