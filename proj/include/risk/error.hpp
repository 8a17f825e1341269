#pragma once

#include <stdexcept>
#include <string>

namespace risk {

/// Root of every error the engine raises. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or degenerate input data (bad rows, duplicate dates, zero variance).
class DataError : public Error {
public:
    using Error::Error;
};

/// Input file is missing a required column.
class SchemaError : public DataError {
public:
    using DataError::DataError;
};

/// Rolling window requested before enough history exists.
class WindowError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
public:
    using Error::Error;
};

/// GARCH parameters violate positivity or stationarity.
class ParameterError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Two series that must share an index do not.
class AlignmentError : public Error {
public:
    using Error::Error;
};

/// Model estimation failed (rank-deficient design, non-finite objective).
class EstimationError : public Error {
public:
    using Error::Error;
};

/// Invalid user configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// The requested statistic is not computable at this sample size (e.g. too few tail paths).
class InfeasibleError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

} // namespace risk
