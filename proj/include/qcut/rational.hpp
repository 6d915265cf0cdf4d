#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <string>

#include "qcut/errors.hpp"

namespace qcut {

// Small exact fraction for closed-form fidelities. Operands stay tiny in
// practice (dimensions up to a few hundred), so int64 is ample; overflow in
// intermediate products is detected and reported.
class Rational {
public:
    constexpr Rational() = default;
    Rational(std::int64_t num, std::int64_t den = 1) : num_(num), den_(den) {
        if (den_ == 0) throw RangeError("Rational: zero denominator");
        normalize();
    }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }
    double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    friend Rational operator+(Rational a, Rational b) {
        return {add(mul(a.num_, b.den_), mul(b.num_, a.den_)), mul(a.den_, b.den_)};
    }
    friend Rational operator-(Rational a, Rational b) {
        return {add(mul(a.num_, b.den_), -mul(b.num_, a.den_)), mul(a.den_, b.den_)};
    }
    friend Rational operator*(Rational a, Rational b) {
        return {mul(a.num_, b.num_), mul(a.den_, b.den_)};
    }
    friend Rational operator/(Rational a, Rational b) {
        if (b.num_ == 0) throw RangeError("Rational: division by zero");
        return {mul(a.num_, b.den_), mul(a.den_, b.num_)};
    }
    friend bool operator==(const Rational&, const Rational&) = default;

    /// Decimal rendering with exactly `digits` fractional digits, rounded half
    /// away from zero using integer arithmetic only.
    std::string to_fixed(int digits) const {
        const bool negative = num_ < 0;
        const auto n = static_cast<unsigned __int128>(negative ? -num_ : num_);
        const auto d = static_cast<unsigned __int128>(den_);
        unsigned __int128 scale = 1;
        for (int i = 0; i < digits; ++i) scale *= 10;
        unsigned __int128 scaled = (n * scale * 2 + d) / (2 * d);
        const unsigned __int128 whole = scaled / scale;
        unsigned __int128 frac = scaled % scale;
        std::string frac_str(static_cast<std::size_t>(digits), '0');
        for (int i = digits - 1; i >= 0; --i) {
            frac_str[static_cast<std::size_t>(i)] = static_cast<char>('0' + static_cast<int>(frac % 10));
            frac /= 10;
        }
        std::string out = negative && scaled != 0 ? "-" : "";
        out += std::to_string(static_cast<std::uint64_t>(whole));
        if (digits > 0) out += "." + frac_str;
        return out;
    }

    friend std::ostream& operator<<(std::ostream& os, const Rational& r) {
        return os << r.num_ << '/' << r.den_;
    }

private:
    static std::int64_t mul(std::int64_t a, std::int64_t b) {
        std::int64_t out = 0;
        if (__builtin_mul_overflow(a, b, &out)) throw RangeError("Rational: overflow");
        return out;
    }
    static std::int64_t add(std::int64_t a, std::int64_t b) {
        std::int64_t out = 0;
        if (__builtin_add_overflow(a, b, &out)) throw RangeError("Rational: overflow");
        return out;
    }

    void normalize() {
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        const std::int64_t g = std::gcd(num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
    }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

}  // namespace qcut
