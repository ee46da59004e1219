#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ehrenfest/pwlin.hpp"

// Exact reconstruction of a hermitean, non-self-adjoint observable A whose
// expectation along the translation orbit psi(t) = psi0(. - t) of the tent
// is unbounded on (0, 1).
namespace ehrenfest::counterexample {

using exact::BigRational;
using exact::PiecewiseLinear;

struct OpenInterval {
    BigRational left;
    BigRational right;
    BigRational width() const { return right - left; }
    bool contains(const BigRational& t) const { return left < t && t < right; }
};

/// One bump: interval I inside (0,1) and the offsets t0, eta with
/// t0, t0 + 6 eta strictly inside I.
struct BumpSpec {
    OpenInterval interval;
    BigRational t0;
    BigRational eta;

    /// Throws Error(invalid_argument) when the invariants do not hold.
    void validate() const;
    /// True when t lies in I + Z.
    bool in_shifted_interval(const BigRational& t) const;
};

/// Maps a bump index j >= 1 to its BumpSpec.
class IntervalRule {
public:
    using BumpFactory = std::function<BumpSpec(int)>;

    /// I_j = (1/(j+2), 1/(j+1)).
    static IntervalRule harmonic(BigRational t0_fraction = {1, 4}, BigRational eta_fraction = {1, 16});
    /// I_j = (2^-(j+1), 2^-j); every derived abscissa is dyadic.
    static IntervalRule dyadic(BigRational t0_fraction = {1, 4}, BigRational eta_fraction = {1, 16});
    static IntervalRule custom(std::string name, BumpFactory rule);

    BumpSpec operator()(int j) const { return rule_(j); }
    const std::string& name() const { return name_; }

private:
    IntervalRule(std::string name, BumpFactory rule) : name_(std::move(name)), rule_(std::move(rule)) {}
    std::string name_;
    BumpFactory rule_;
};

/// First candidate t0 + first_offset*eta, then t0 + k*eta*scan_step for
/// k = 1..scan_count; the first time with nonzero overlap wins.
struct ResonanceRule {
    BigRational first_offset{1};
    BigRational scan_step{1, 4};
    int scan_count = 23;
};

struct Bump {
    int j = 0;
    BumpSpec spec;
    PiecewiseLinear phi;   // unnormalized
    BigRational norm2;     // <phi, phi>
    BigRational t_res;     // resonance time t_j in I_j
    BigRational overlap;   // <phi, psi(t_j)>
    BigRational weight;    // a_j
};

// Finite truncation of the bump system. The normalized vectors are
// phi_j / sqrt(norm2_j); every formula divides by norm2_j explicitly so that
// the whole construction stays rational.
class CounterexampleSystem {
public:
    explicit CounterexampleSystem(std::vector<Bump> bumps) : bumps_(std::move(bumps)) {}
    const std::vector<Bump>& bumps() const { return bumps_; }
    std::size_t size() const { return bumps_.size(); }
    const Bump& bump(int j) const { return bumps_.at(static_cast<std::size_t>(j - 1)); }

private:
    std::vector<Bump> bumps_;
};

/// psi(t) = psi0(. - t).
PiecewiseLinear orbit(const BigRational& t);

/// psi(t0) - 2 psi(t0+eta) + psi(t0+2eta).
PiecewiseLinear build_phi_tilde(const BigRational& t0, const BigRational& eta);
/// Second difference of phi_tilde with step 2 eta, i.e. the 7-term
/// combination (1,-2,-1,4,-1,-2,1) of psi(t0 + k eta).
PiecewiseLinear build_phi(const BigRational& t0, const BigRational& eta);

struct OrthogonalitySample {
    BigRational t;
    BigRational value;
};
struct RejectedSample {
    BigRational t;
    std::string reason;
};
struct OrthogonalityCertificate {
    std::vector<OrthogonalitySample> checked;
    std::vector<RejectedSample> rejected;
    std::vector<OrthogonalitySample> failures;  // nonzero inner products
    bool ok() const { return failures.empty() && !checked.empty(); }
};

OrthogonalityCertificate verify_orthogonality(const PiecewiseLinear& phi, const BumpSpec& spec,
                                              const std::vector<BigRational>& samples);

/// Throws Error(invalid_argument) on overlapping intervals and
/// Error(check_failed) when no resonance time with nonzero overlap exists.
CounterexampleSystem assemble_system(int n, const IntervalRule& intervals = IntervalRule::harmonic(),
                                     const ResonanceRule& resonance = {});

/// A psi = sum_j a_j <phi_j, psi> phi_j / norm2_j.
PiecewiseLinear apply_A(const CounterexampleSystem& system, const PiecewiseLinear& psi);

/// <psi(t), A psi(t)>, summed over every bump.
BigRational expectation_A(const CounterexampleSystem& system, const BigRational& t);

/// Index j with t mod 1 in I_j, if any.
std::optional<int> resonant_bump(const CounterexampleSystem& system, const BigRational& t);

struct UnboundednessRow {
    int j = 0;
    BigRational t_j;
    BigRational expectation;
    BigRational witness_zero_t;
    BigRational witness_expectation;
};

struct UnboundednessCertificate {
    std::vector<UnboundednessRow> rows;
    bool strictly_increasing = false;
    bool exceeds_index = false;
    bool witnesses_zero = false;
    bool ok() const { return strictly_increasing && exceeds_index && witnesses_zero; }
};

/// Requires at least two bumps.
UnboundednessCertificate unboundedness_certificate(const CounterexampleSystem& system);

/// Gram matrix equals diag(norm2_j) exactly.
bool gram_is_diagonal(const CounterexampleSystem& system);

/// Random rational t outside I + Z with denominators in [1, max_den] and
/// |t| <= range.
std::vector<BigRational> sample_outside(const BumpSpec& spec, int count, std::uint64_t seed, int max_den = 1000,
                                        int range = 3);

/// Random finite combinations of orbit points; half of the shifts land in
/// the bump intervals so that A acts nontrivially.
std::vector<PiecewiseLinear> random_orbit_combinations(const CounterexampleSystem& system, int count,
                                                       std::uint64_t seed);

/// <A f, g> == <f, A g> for consecutive pairs of the generated set.
bool check_hermitean(const CounterexampleSystem& system, int pairs, std::uint64_t seed);

}  // namespace ehrenfest::counterexample
