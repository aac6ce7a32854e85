#pragma once

#include <stdexcept>
#include <string>

namespace epcav {

/// Base of every error the library raises. Each category maps to a CLI exit status.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 1; }
};

/// A precondition on an argument was violated.
class InvalidInput : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

/// Configuration file could not be parsed or validated. `field` names the offending path.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }
    int exit_code() const noexcept override { return 2; }

private:
    std::string field_;
};

/// A numerical procedure failed (singular system, EP proximity, step too coarse, ...).
class NumericError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

/// Data cannot be fitted or the fit did not converge.
class FitError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 4; }
};

}  // namespace epcav
