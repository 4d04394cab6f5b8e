#ifndef SEMSOFT_ERRORS_HPP
#define SEMSOFT_ERRORS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace semsoft {

enum class ErrorCode {
    // taxonomy
    CycleDetected,
    DanglingParent,
    DuplicateClassId,
    MultiParentRejected,
    UnknownClass,
    // dataset preparation
    IoError,
    MalformedRecord,
    DuplicateSampleId,
    EmptyResult,
    ClassTooSmall,
    // losses
    EmptyInput,
    InvalidTarget,
    DimensionMismatch,
    DegenerateWeight,
    EmptyHierarchy,
    InconsistentLabel,
    NotNormalized,
    // metrics
    NoPositives,
    // training
    NoLeaves,
    ShapeMismatch,
    NonFiniteLoss,
    // configuration / preconditions
    InvalidConfig,
    InvalidArgument,
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::CycleDetected: return "CycleDetected";
        case ErrorCode::DanglingParent: return "DanglingParent";
        case ErrorCode::DuplicateClassId: return "DuplicateClassId";
        case ErrorCode::MultiParentRejected: return "MultiParentRejected";
        case ErrorCode::UnknownClass: return "UnknownClass";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::MalformedRecord: return "MalformedRecord";
        case ErrorCode::DuplicateSampleId: return "DuplicateSampleId";
        case ErrorCode::EmptyResult: return "EmptyResult";
        case ErrorCode::ClassTooSmall: return "ClassTooSmall";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::InvalidTarget: return "InvalidTarget";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::DegenerateWeight: return "DegenerateWeight";
        case ErrorCode::EmptyHierarchy: return "EmptyHierarchy";
        case ErrorCode::InconsistentLabel: return "InconsistentLabel";
        case ErrorCode::NotNormalized: return "NotNormalized";
        case ErrorCode::NoPositives: return "NoPositives";
        case ErrorCode::NoLeaves: return "NoLeaves";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "UnknownError";
}

// Single exception type carrying a machine-checkable code. `detail` holds the
// offending line number or index where one applies, -1 otherwise.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, int64_t detail = -1)
        : std::runtime_error(std::string(to_string(code)) + ": " + message),
          code_(code),
          detail_(detail) {}

    ErrorCode code() const noexcept { return code_; }
    int64_t detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    int64_t detail_;
};

}  // namespace semsoft

#endif  // SEMSOFT_ERRORS_HPP
