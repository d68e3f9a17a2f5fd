#pragma once

#include <stdexcept>
#include <string>

namespace condense {

// Parameter outside the domain of a distribution or operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Data-dependent failures (too few rows, zero variance, ...). CLI exit code 3.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InsufficientDataError : public DataError {
public:
    using DataError::DataError;
};

class DegenerateDataError : public DataError {
public:
    using DataError::DataError;
};

// Malformed input files. CLI exit code 2.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Inconsistent or invalid configuration. CLI exit code 4.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Quadrature grid does not carry enough of a density's mass.
class TruncatedSupportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TimeoutError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Too many failed rows in a study. CLI exit code 5.
class StudyFailureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace condense
