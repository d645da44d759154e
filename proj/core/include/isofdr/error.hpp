#pragma once

#include <stdexcept>
#include <string>

namespace isofdr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Input data that cannot be processed (empty, non-finite, misaligned).
class InputError : public Error {
public:
    using Error::Error;
};

}  // namespace isofdr
