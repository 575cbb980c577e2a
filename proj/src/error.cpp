#include "solaudit/error.hpp"
#include "solaudit/hash.hpp"

#include <array>

namespace solaudit {

std::string_view error_kind_name(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::UnbalancedBraces: return "UnbalancedBraces";
        case ErrorKind::EmptySource: return "EmptySource";
        case ErrorKind::UnknownRoot: return "UnknownRoot";
        case ErrorKind::UnknownFunction: return "UnknownFunction";
        case ErrorKind::EmptyText: return "EmptyText";
        case ErrorKind::ProviderUnavailable: return "ProviderUnavailable";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::ZeroVector: return "ZeroVector";
        case ErrorKind::NonFiniteValue: return "NonFiniteValue";
        case ErrorKind::InvalidConfig: return "InvalidConfig";
        case ErrorKind::DuplicateId: return "DuplicateId";
        case ErrorKind::IoFailure: return "IoFailure";
        case ErrorKind::CorruptStore: return "CorruptStore";
        case ErrorKind::VerificationFailed: return "VerificationFailed";
        case ErrorKind::MalformedResponse: return "MalformedResponse";
        case ErrorKind::MissingLayer: return "MissingLayer";
        case ErrorKind::ParseFailure: return "ParseFailure";
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::BatchItemFailed: return "BatchItemFailed";
    }
    return "Error";
}

std::string to_hex(std::uint64_t value) {
    static constexpr std::array<char, 16> kDigits = {'0', '1', '2', '3', '4', '5', '6', '7',
                                                     '8', '9', 'a', 'b', 'c', 'd', 'e', 'f'};
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = kDigits[value & 0xFU];
        value >>= 4U;
    }
    return out;
}

}  // namespace solaudit
