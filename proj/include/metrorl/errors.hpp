#pragma once

#include <stdexcept>

namespace metrorl {

// Base for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input document (bad JSON, wrong field shape); message carries location.
struct ParseError : Error {
    using Error::Error;
};

// Well-formed input that violates a model invariant; message names the offender.
struct ValidationError : Error {
    using Error::Error;
};

// Query about an entity the model does not contain (unknown stop, line, id).
struct DomainError : Error {
    using Error::Error;
};

// Caller broke an operation precondition (wrong question type, empty input, K < 2).
struct UsageError : Error {
    using Error::Error;
};

// Requested artifact cannot be produced (quota, density, connected pairs).
struct GenerationError : Error {
    using Error::Error;
};

// Yes/no balancing has no resample candidates for the deficit answer.
struct BalanceError : Error {
    using Error::Error;
};

// A dataset split came out empty. Warning-level: callers may catch it and
// proceed with whatever degenerate partition they can rebuild.
struct EmptySplitError : Error {
    using Error::Error;
};

}  // namespace metrorl
