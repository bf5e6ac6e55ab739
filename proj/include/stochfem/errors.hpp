#pragma once

#include <stdexcept>
#include <string>

namespace stochfem {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Closest-point projection requested at (or too near) the origin.
class DegeneratePoint : public Error {
public:
    using Error::Error;
};

/// Point lies outside the tubular neighbourhood where the lift is defined.
class OutOfBand : public Error {
public:
    using Error::Error;
};

/// Pull-back tensor is singular or nearly so (1 + h*kappa or det J too small).
class SingularGeometry : public Error {
public:
    using Error::Error;
};

/// Point handed to a per-triangle map is not inside that triangle.
class OutsideTriangle : public Error {
public:
    using Error::Error;
};

/// Iterative solver exhausted its iteration budget.
class NoConvergence : public Error {
public:
    using Error::Error;
};

/// Runtime guard on the coefficient bounds fired.
class CoefficientBoundViolation : public Error {
public:
    using Error::Error;
};

/// Bad command line or configuration file.
class UsageError : public Error {
public:
    using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace stochfem
