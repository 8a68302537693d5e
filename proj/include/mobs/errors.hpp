#pragma once

#include <stdexcept>
#include <string>

namespace mobs {

// Error taxonomy used throughout the library.  The CLI maps these to exit
// codes: InvalidArgument -> 2, NumericFailure -> 3, IoFailure -> 4.

// Caller passed something malformed: bad sizes, invalid probabilities,
// out-of-range configuration, unparseable text, ...
class InvalidArgument : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A file or stream has the wrong structure (still the caller's data, so it
// shares the InvalidArgument exit code).
class FormatError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

// A computation produced non-finite values or failed to converge where
// convergence is required.
class NumericFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Filesystem-level failure: cannot open, read, write, or remove.
class IoFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mobs
