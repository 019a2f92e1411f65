#pragma once

#include <stdexcept>
#include <string>

namespace ctprover {

struct CtError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : CtError {
    int line, col;
    ParseError(int line_, int col_, const std::string& msg)
        : CtError("parse error at " + std::to_string(line_) + ":" + std::to_string(col_) + ": " + msg),
          line(line_), col(col_) {}
};

// Well-formedness violations found while normalizing.
struct NormalizeError : CtError {
    using CtError::CtError;
};
struct RecursionError : NormalizeError {
    using NormalizeError::NormalizeError;
};
struct UnknownIdentifierError : NormalizeError {
    using NormalizeError::NormalizeError;
};
struct ArityMismatchError : NormalizeError {
    using NormalizeError::NormalizeError;
};
struct AnnotationError : NormalizeError {
    using NormalizeError::NormalizeError;
};
struct ArrayAliasError : NormalizeError {
    using NormalizeError::NormalizeError;
};

struct CapExceededError : CtError {
    using CtError::CtError;
};
struct InlineBlowupError : CtError {
    using CtError::CtError;
};

struct InputError : CtError {
    using CtError::CtError;
};

}  // namespace ctprover
