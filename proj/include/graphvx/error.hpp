#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gvx {

using ObjectId = std::uint32_t;
inline constexpr ObjectId kInvalidId = 0;

enum class ErrorCode {
    ZeroDimension,
    BadFormat,
    BadKernel,
    AccessDenied,
    UnknownObject,
    UnknownKernel,
    CrossGraphVirtual,
    MultipleWriters,
    CycleDetected,
    UnstampedGraph,
    MissingInput,
    ShapeMismatch,
    DivByZero,
    TypeMismatch,
    MissingCast,
    OffsetOutOfWindow,
    UnsupportedKind,
    NonStreamable,
    IoError,
    SchemaError,
};

const char* error_code_name(ErrorCode code);

/// Exception type for API-level failures. Verification problems are not
/// exceptions; they are collected as Diagnostics (see verify.hpp).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message, ObjectId subject = kInvalidId)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code),
          subject_(subject) {}

    ErrorCode code() const noexcept { return code_; }
    ObjectId subject() const noexcept { return subject_; }

private:
    ErrorCode code_;
    ObjectId subject_;
};

} // namespace gvx
