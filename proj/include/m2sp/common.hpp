#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace m2sp {

using u8 = std::uint8_t;
using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;
using i128 = __int128;

enum class Errc {
    NotPrime,
    OrderTooLarge,
    ReducibleModulus,
    DegreeMismatch,
    ZeroInverse,
    Singular,
    RankMismatch,
    FieldMismatch,
    EmptySet,
    EmptyDomain,
    ZeroMass,
    NotInvertibleSet,
    TooSmall,
    InternalStall,
    OrderTooLargeForSpectrum,
    EmptyX,
    BadParameters,
    NotSubgroup,
    SizeTooLarge,
    UnknownExperiment,
    ConfigInvalid,
    FieldUnsupported,
    IoFailure,
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::NotPrime: return "NotPrime";
        case Errc::OrderTooLarge: return "OrderTooLarge";
        case Errc::ReducibleModulus: return "ReducibleModulus";
        case Errc::DegreeMismatch: return "DegreeMismatch";
        case Errc::ZeroInverse: return "ZeroInverse";
        case Errc::Singular: return "Singular";
        case Errc::RankMismatch: return "RankMismatch";
        case Errc::FieldMismatch: return "FieldMismatch";
        case Errc::EmptySet: return "EmptySet";
        case Errc::EmptyDomain: return "EmptyDomain";
        case Errc::ZeroMass: return "ZeroMass";
        case Errc::NotInvertibleSet: return "NotInvertibleSet";
        case Errc::TooSmall: return "TooSmall";
        case Errc::InternalStall: return "InternalStall";
        case Errc::OrderTooLargeForSpectrum: return "OrderTooLargeForSpectrum";
        case Errc::EmptyX: return "EmptyX";
        case Errc::BadParameters: return "BadParameters";
        case Errc::NotSubgroup: return "NotSubgroup";
        case Errc::SizeTooLarge: return "SizeTooLarge";
        case Errc::UnknownExperiment: return "UnknownExperiment";
        case Errc::ConfigInvalid: return "ConfigInvalid";
        case Errc::FieldUnsupported: return "FieldUnsupported";
        case Errc::IoFailure: return "IoFailure";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
    Errc code() const { return code_; }

  private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline std::string to_string_u128(u128 v) {
    if (v == 0) return "0";
    std::string s;
    while (v) {
        s.push_back(char('0' + int(v % 10)));
        v /= 10;
    }
    return {s.rbegin(), s.rend()};
}

inline std::string to_string_i128(i128 v) {
    if (v < 0) return "-" + to_string_u128(u128(-v));
    return to_string_u128(u128(v));
}

}  // namespace m2sp
