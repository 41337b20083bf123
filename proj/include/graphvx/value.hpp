#pragma once

#include "graphvx/error.hpp"
#include "graphvx/format.hpp"

#include <cmath>
#include <cstdint>

namespace gvx {

/// Tagged scalar used throughout evaluation. Integer values live in a 64-bit
/// domain, reals in double precision; narrowing happens only through explicit
/// casts (see expr.hpp).
struct Value {
    bool real = false;
    std::int64_t i = 0;
    double f = 0.0;

    Value() = default;
    static Value of_int(std::int64_t v) {
        Value x;
        x.real = false;
        x.i = v;
        return x;
    }
    static Value of_real(double v) {
        Value x;
        x.real = true;
        x.f = v;
        return x;
    }

    double as_real() const { return real ? f : static_cast<double>(i); }
    std::int64_t as_int() const { return real ? static_cast<std::int64_t>(f) : i; }

    bool operator==(const Value& o) const {
        if (real != o.real) return false;
        return real ? f == o.f : i == o.i;
    }
};

enum class CastPolicy : std::uint8_t { Saturate, Wrap };

/// Narrow `v` to storage type `t`. Float sources round half away from zero
/// before integer clamping; Wrap truncates toward zero and keeps the low
/// bits (two's complement for signed targets).
Value cast_value(ScalarType t, CastPolicy policy, const Value& v);

/// Value of storage type `t` read back into the evaluation domain.
inline Value typed_int(ScalarType t, std::int64_t v) {
    return is_float(t) ? Value::of_real(static_cast<double>(v)) : Value::of_int(v);
}

} // namespace gvx
