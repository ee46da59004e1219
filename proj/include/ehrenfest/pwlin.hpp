#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ehrenfest/rational.hpp"

namespace ehrenfest::exact {

struct Breakpoint {
    BigRational x;
    BigRational y;
    friend bool operator==(const Breakpoint&, const Breakpoint&) = default;
};

struct ClosedInterval {
    BigRational left;
    BigRational right;
    friend bool operator==(const ClosedInterval&, const ClosedInterval&) = default;
};

// Continuous, compactly supported, piecewise-linear function on the real
// line. Zero outside [first, last] breakpoint, affine between neighbours.
// Always held in canonical form (no collinear interior breakpoint, no
// leading/trailing zero segment); the zero function has no breakpoints.
// Immutable once built.
class PiecewiseLinear {
public:
    PiecewiseLinear() = default;

    /// Throws Error(invalid_argument) unless x is strictly increasing and the
    /// end values are zero.
    explicit PiecewiseLinear(std::vector<Breakpoint> points);

    static PiecewiseLinear zero() { return {}; }

    std::span<const Breakpoint> breakpoints() const { return points_; }
    bool is_zero() const { return points_.empty(); }

    friend bool operator==(const PiecewiseLinear&, const PiecewiseLinear&) = default;

private:
    std::vector<Breakpoint> points_;
};

/// Removes collinear interior breakpoints and zero segments at either end.
/// Input must already be strictly increasing; used by the constructor and
/// exposed for idempotence tests.
std::vector<Breakpoint> canonicalize(std::vector<Breakpoint> points);

/// Tent with nodes (0,0), (1,1), (2,0).
PiecewiseLinear tent_psi0();

/// x -> f(x - t).
PiecewiseLinear translate(const PiecewiseLinear& f, const BigRational& t);

/// Exact sum of coeffs[i] * fs[i].
PiecewiseLinear combine(std::span<const BigRational> coeffs, std::span<const PiecewiseLinear> fs);

BigRational evaluate(const PiecewiseLinear& f, const BigRational& x);

/// Exact L2 pairing  int f g dx  (real functions, no conjugation).
BigRational inner_product(const PiecewiseLinear& f, const PiecewiseLinear& g);

/// Exact  int_a^b x f(x) dx.  Requires a < b.
BigRational first_moment(const PiecewiseLinear& f, const BigRational& a, const BigRational& b);

/// Maximal closed intervals on which f is not identically zero.
std::vector<ClosedInterval> support(const PiecewiseLinear& f);

// Text form:
//   pwlin v1
//   <n>
//   <x p/q> <y p/q>     (n lines)
std::string serialize(const PiecewiseLinear& f);
PiecewiseLinear deserialize(std::string_view text);

}  // namespace ehrenfest::exact
