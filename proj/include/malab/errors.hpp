#pragma once

#include <stdexcept>
#include <string>

namespace malab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "Error"; }
};

class InvalidInput : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "InvalidInput"; }
};

class PreconditionViolated : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "PreconditionViolated"; }
};

/// Raised when a potential fails convexity or the slope window of its model.
class NotOmegaPsh : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "NotOmegaPsh"; }
};

class NotSolvableInModel : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "NotSolvableInModel"; }
};

}  // namespace malab
