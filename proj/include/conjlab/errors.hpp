#pragma once

#include <stdexcept>
#include <string>

namespace conjlab {

// Base class for everything thrown by this library.  Callers that want to
// distinguish failure kinds catch the concrete types below; callers that just
// want a diagnostic string catch Error.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DomainError : Error {
    using Error::Error;
};

// Derivative requested at a point where the map is not differentiable to the
// requested order (e.g. a corner).
struct TurningPointError : Error {
    using Error::Error;
};

// Schwarzian (or similar quotient) evaluated where f' vanishes.
struct SingularityError : Error {
    using Error::Error;
};

// Declared local order of a turning point disagrees with the observed scaling.
struct FlatnessError : Error {
    using Error::Error;
};

struct GridTooCoarse : Error {
    using Error::Error;
};

struct DepthExplosion : Error {
    using Error::Error;
};

struct KneadingMismatch : Error {
    using Error::Error;
};

struct AmbiguousCorrespondence : Error {
    using Error::Error;
};

struct ScaleUnderflow : Error {
    using Error::Error;
};

struct ResolutionError : Error {
    using Error::Error;
};

// A standing hypothesis (no attracting or neutral cycles, non-flat turning
// points, ...) failed a numerical check.
struct HypothesisError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct MissingDiagnostic : Error {
    using Error::Error;
};

struct CycleMismatch : Error {
    using Error::Error;
};

struct DegenerateTriple : Error {
    using Error::Error;
};

struct NoAdmissibleSegments : Error {
    using Error::Error;
};

struct WitnessNotFound : Error {
    using Error::Error;
};

} // namespace conjlab
