// SPDX-License-Identifier: MIT
#pragma once

#include <stdexcept>
#include <string>

namespace varorder {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parameters outside the documented domain (exit code 2 in the CLI).
class InputError : public Error {
public:
    using Error::Error;
};

/// Adaptive quadrature ran out of its refinement budget.
class QuadratureError : public Error {
public:
    using Error::Error;
};

/// A solver diverged or an admissibility formula produced an invalid value.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Index assumptions required by an estimate experiment do not hold.
class GateError : public Error {
public:
    using Error::Error;
};

}  // namespace varorder
