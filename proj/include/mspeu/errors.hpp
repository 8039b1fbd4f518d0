#pragma once

#include <stdexcept>
#include <string>

namespace mspeu {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A requested object would exceed a configured size cap.
class CapacityError : public Error {
public:
    explicit CapacityError(const std::string& what) : Error(what) {}
};

/// Inconsistent dimensions between coupled data blocks.
class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& what) : Error(what) {}
};

/// A counting/formatting convention was requested on data it does not fit.
class ConventionError : public Error {
public:
    explicit ConventionError(const std::string& what) : Error(what) {}
};

/// The simplex engine exhausted its anti-cycling budget.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(what) {}
};

/// Malformed input file (JSON schema or referential integrity).
class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& what) : Error(what) {}
};

} // namespace mspeu
