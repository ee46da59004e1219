#include "ehrenfest/rational.hpp"

#include <cctype>

#include "ehrenfest/error.hpp"

namespace ehrenfest::exact {

namespace {

bool is_integer_literal(std::string_view s) {
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) s.remove_prefix(1);
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

mpz_class parse_integer(std::string_view s) {
    std::string digits(s);
    if (!digits.empty() && digits.front() == '+') digits.erase(0, 1);
    return mpz_class(digits, 10);
}

}  // namespace

BigRational::BigRational(std::int64_t n) {
    value_ = mpq_class(mpz_class(std::to_string(n), 10));
}

BigRational::BigRational(std::int64_t num, std::int64_t den) {
    if (den == 0) fail(Errc::invalid_argument, "BigRational: zero denominator");
    value_ = mpq_class(mpz_class(std::to_string(num), 10), mpz_class(std::to_string(den), 10));
    value_.canonicalize();
}

BigRational::BigRational(mpq_class value) : value_(std::move(value)) { value_.canonicalize(); }

BigRational BigRational::parse(std::string_view text) {
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
    const auto slash = text.find('/');
    const std::string_view num = text.substr(0, slash);
    const std::string_view den = slash == std::string_view::npos ? std::string_view("1") : text.substr(slash + 1);
    if (!is_integer_literal(num) || !is_integer_literal(den) || den.front() == '-' || den.front() == '+')
        fail(Errc::parse, "not an exact rational literal (expected p/q): '" + std::string(text) + "'");
    mpz_class d = parse_integer(den);
    if (d == 0) fail(Errc::parse, "zero denominator in '" + std::string(text) + "'");
    return BigRational(mpq_class(parse_integer(num), d));
}

std::string BigRational::numerator() const { return value_.get_num().get_str(); }
std::string BigRational::denominator() const { return value_.get_den().get_str(); }
std::string BigRational::to_string() const { return numerator() + "/" + denominator(); }

double BigRational::to_double() const {
    // mpq_get_d truncates; the correctly rounded value is not needed here.
    return value_.get_d();
}

BigRational BigRational::abs() const { return BigRational(mpq_class(::abs(value_))); }

BigRational BigRational::floor() const {
    mpz_class q;
    mpz_fdiv_q(q.get_mpz_t(), value_.get_num_mpz_t(), value_.get_den_mpz_t());
    return BigRational(mpq_class(q));
}

BigRational BigRational::fractional_part() const { return *this - floor(); }

BigRational& BigRational::operator+=(const BigRational& o) {
    value_ += o.value_;
    return *this;
}
BigRational& BigRational::operator-=(const BigRational& o) {
    value_ -= o.value_;
    return *this;
}
BigRational& BigRational::operator*=(const BigRational& o) {
    value_ *= o.value_;
    return *this;
}
BigRational& BigRational::operator/=(const BigRational& o) {
    if (o.is_zero()) fail(Errc::invalid_argument, "BigRational: division by zero");
    value_ /= o.value_;
    return *this;
}

BigRational BigRational::operator-() const { return BigRational(mpq_class(-value_)); }

}  // namespace ehrenfest::exact
