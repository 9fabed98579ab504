#pragma once

#include <stdexcept>
#include <string>

namespace erva {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Phi(x) is numerically singular (reciprocal condition estimate below 1e-12).
class SingularMassMatrix : public Error {
public:
    using Error::Error;
};

class NonFiniteState : public Error {
public:
    using Error::Error;
};

/// Raised by simulate(); wraps the step error with the time at which it failed.
class SimulationError : public Error {
public:
    SimulationError(const std::string& what, double time)
        : Error(what + " (t = " + std::to_string(time) + " s)"), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

class InvalidFrequency : public Error {
public:
    using Error::Error;
};

class InvalidSnr : public Error {
public:
    using Error::Error;
};

class OutOfRange : public Error {
public:
    using Error::Error;
};

class InsufficientDuration : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace erva
