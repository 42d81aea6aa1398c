#pragma once

#include <stdexcept>
#include <string>

namespace scs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Covariance that is not symmetric or has eigenvalues below the negative tolerance.
class InvalidCovariance : public Error {
public:
    using Error::Error;
};

/// A linear system (Phi Sigma Phi^T or a precision matrix) could not be factored.
class SingularSystem : public Error {
public:
    using Error::Error;
};

/// A Monte Carlo ratio whose denominator vanished.
class UndefinedConstant : public Error {
public:
    using Error::Error;
};

class CoverageError : public Error {
public:
    using Error::Error;
};

/// File input/output failures, including malformed containers and images.
class IoError : public Error {
public:
    using Error::Error;
};

class ParseError : public IoError {
public:
    using IoError::IoError;
};

class UnsupportedFormat : public ParseError {
public:
    using ParseError::ParseError;
};

class TruncatedData : public ParseError {
public:
    using ParseError::ParseError;
};

}  // namespace scs
