#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace solaudit {

enum class ErrorKind {
    UnbalancedBraces,
    EmptySource,
    UnknownRoot,
    UnknownFunction,
    EmptyText,
    ProviderUnavailable,
    DimensionMismatch,
    ZeroVector,
    NonFiniteValue,
    InvalidConfig,
    DuplicateId,
    IoFailure,
    CorruptStore,
    VerificationFailed,
    MalformedResponse,
    MissingLayer,
    ParseFailure,
    EmptyInput,
    BatchItemFailed,
};

std::string_view error_kind_name(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Raised by embed_batch; carries the position of the failing text.
class BatchError : public Error {
public:
    BatchError(std::size_t index, const Error& cause)
        : Error(ErrorKind::BatchItemFailed, "item " + std::to_string(index) + ": " + cause.what()),
          index_(index), cause_kind_(cause.kind()) {}

    std::size_t index() const noexcept { return index_; }
    ErrorKind cause_kind() const noexcept { return cause_kind_; }

private:
    std::size_t index_;
    ErrorKind cause_kind_;
};

}  // namespace solaudit
