#pragma once

#include <stdexcept>
#include <string>

namespace ppcon {

// Base class for every error raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input text could not be tokenized/interpreted.
struct ParseError : Error { using Error::Error; };

// Structurally well-formed input violates a domain rule
// (self-loop, duplicate edge, index out of range, ...).
struct ValidationError : Error { using Error::Error; };

// Configuration value outside its admissible range.
struct ConfigError : Error { using Error::Error; };

struct DuplicateKeyPoint : Error { using Error::Error; };
struct PointNotInKey : Error { using Error::Error; };
struct DegreeExceedsChannels : Error { using Error::Error; };

struct NotConnected : Error { using Error::Error; };
struct MissingAssignment : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };

struct StepSizeTooLarge : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct InvalidLambda : Error { using Error::Error; };
struct MaxBlocksExceeded : Error { using Error::Error; };
struct RoundCapExceeded : Error { using Error::Error; };

struct InvalidSpec : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

} // namespace ppcon
