#pragma once

#include <compare>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace ehrenfest::exact {

/// Arbitrary-precision rational, always in lowest terms with a positive
/// denominator. Thin value wrapper over GMP's mpq_class.
class BigRational {
public:
    BigRational() = default;
    BigRational(std::int64_t n);  // NOLINT(google-explicit-constructor)
    BigRational(std::int64_t num, std::int64_t den);
    explicit BigRational(mpq_class value);

    /// Parses "p/q" or an integer "p". Decimal and exponent forms are rejected.
    static BigRational parse(std::string_view text);

    std::string numerator() const;
    std::string denominator() const;
    /// Always "p/q", including q == 1.
    std::string to_string() const;
    double to_double() const;

    int sign() const { return sgn(value_); }
    bool is_zero() const { return sign() == 0; }
    BigRational abs() const;
    BigRational floor() const;
    /// x - floor(x), in [0, 1).
    BigRational fractional_part() const;

    const mpq_class& raw() const { return value_; }

    BigRational& operator+=(const BigRational& o);
    BigRational& operator-=(const BigRational& o);
    BigRational& operator*=(const BigRational& o);
    BigRational& operator/=(const BigRational& o);

    friend BigRational operator+(BigRational a, const BigRational& b) { return a += b; }
    friend BigRational operator-(BigRational a, const BigRational& b) { return a -= b; }
    friend BigRational operator*(BigRational a, const BigRational& b) { return a *= b; }
    friend BigRational operator/(BigRational a, const BigRational& b) { return a /= b; }
    BigRational operator-() const;

    friend bool operator==(const BigRational& a, const BigRational& b) { return a.value_ == b.value_; }
    friend std::strong_ordering operator<=>(const BigRational& a, const BigRational& b) {
        const int c = cmp(a.value_, b.value_);
        return c < 0 ? std::strong_ordering::less
                     : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

    friend std::ostream& operator<<(std::ostream& os, const BigRational& r) { return os << r.to_string(); }

private:
    mpq_class value_{0};
};

}  // namespace ehrenfest::exact
