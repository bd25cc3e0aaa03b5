#pragma once

#include <stdexcept>
#include <string>

namespace dslab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A field contains NaN/Inf samples.
struct InvalidFieldError : Error {
    using Error::Error;
};

/// Two fields that must share a grid do not.
struct GridMismatchError : Error {
    using Error::Error;
};

/// Constructor / factory parameters outside their valid range.
struct InvalidParameterError : Error {
    using Error::Error;
};

/// A dbar/d constraint solve was asked for a right side outside the
/// operator range (nonzero mean on the torus).
struct UnsolvableConstraintError : Error {
    using Error::Error;
};

/// Gauge function fails the dbar f = 0 requirement.
struct GaugeNotHolomorphicError : Error {
    using Error::Error;
};

/// One-form set fails the closedness gate of the surface integrator.
struct NonClosedFormError : Error {
    using Error::Error;
};

/// Conformal factor vanishes somewhere on the grid.
struct DegenerateImmersionError : Error {
    using Error::Error;
};

/// Gauss map undefined at a sample (zero tangent or singular chart).
struct DegeneratePointError : Error {
    int i = -1, j = -1;
    DegeneratePointError(const std::string& msg, int i_, int j_)
        : Error(msg + " at sample (" + std::to_string(i_) + ", " + std::to_string(j_) + ")"),
          i(i_), j(j_) {}
};

/// R^3 reduction requested for data that does not reduce (complex p).
struct InvalidReductionError : Error {
    using Error::Error;
};

/// A field exceeded the blow-up guard during time evolution.
struct DivergenceError : Error {
    long step = -1;
    DivergenceError(const std::string& msg, long step_)
        : Error(msg + " (step " + std::to_string(step_) + ")"), step(step_) {}
};

/// Bad scenario / CLI configuration.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace dslab
