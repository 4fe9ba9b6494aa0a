#pragma once

#include <stdexcept>
#include <string>

namespace sbundle {

// Base type for everything thrown by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// -- simplex / bundle construction ------------------------------------------
struct NegativeWeight : Error {
    using Error::Error;
};
struct NotNormalized : Error {
    using Error::Error;
};
struct InvalidBundleElement : Error {
    using Error::Error;
};
struct BaseMismatch : Error {
    using Error::Error;
};
struct EmptySubset : Error {
    using Error::Error;
};

// -- curves -------------------------------------------------------------------
struct OutOfDomain : Error {
    using Error::Error;
};
// A cell with zero probability but nonzero velocity: the curve leaves the
// simplex on one side, so no Fisher score exists there.
struct AbsoluteContinuityViolation : Error {
    using Error::Error;
};

// -- transports ---------------------------------------------------------------
struct SupportNotNested : Error {
    using Error::Error;
};
struct SupportMismatch : Error {
    using Error::Error;
};

// -- natural gradient / flows -------------------------------------------------
struct GradientUnavailable : Error {
    using Error::Error;
};
struct StepRejected : Error {
    using Error::Error;
};

// -- polynomial algebra ---------------------------------------------------------
struct UnsupportedIndeterminate : Error {
    using Error::Error;
};
struct EqualExponents : Error {
    using Error::Error;
};
struct RankDeficientBasis : Error {
    using Error::Error;
};
struct BoundaryPoint : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};

// -- model zoo -----------------------------------------------------------------
struct BetaZero : Error {
    using Error::Error;
};

}  // namespace sbundle
