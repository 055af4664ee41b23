#pragma once

#include <stdexcept>
#include <string>

namespace mapes {

// Exit-code taxonomy: 2 validation, 3 numerical, 4 I/O.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
    virtual int exit_code() const { return 1; }
};

class ValidationError : public Error {
public:
    using Error::Error;
    int exit_code() const override { return 2; }
};

class NumericalError : public Error {
public:
    using Error::Error;
    int exit_code() const override { return 3; }
};

class IoError : public Error {
public:
    using Error::Error;
    int exit_code() const override { return 4; }
};

class MalformedInput : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ViaConstraintViolation : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class DimensionMismatch : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class PortCountMismatch : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class UnsupportedFormat : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class NonIncreasingFrequencies : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ShapeMismatch : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class RepresentationMismatch : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class SingularSystem : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class HashMismatch : public IoError {
public:
    using IoError::IoError;
};

class CorruptCache : public IoError {
public:
    using IoError::IoError;
};

}  // namespace mapes
