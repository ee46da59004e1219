#include "ehrenfest/counterexample.hpp"

#include <algorithm>
#include <array>
#include <random>

#include "ehrenfest/error.hpp"

namespace ehrenfest::counterexample {

namespace {

IntervalRule::BumpFactory fractional_rule(BigRational t0_fraction, BigRational eta_fraction,
                                          std::function<OpenInterval(int)> interval) {
    if (!(t0_fraction.sign() > 0) || !(eta_fraction.sign() > 0) ||
        !(t0_fraction + BigRational(6) * eta_fraction < BigRational(1)))
        fail(Errc::invalid_argument, "interval rule: need t0_fraction > 0, eta_fraction > 0 and "
                                     "t0_fraction + 6*eta_fraction < 1");
    return [=](int j) {
        if (j < 1) fail(Errc::invalid_argument, "interval rule: bump index must be >= 1");
        const OpenInterval iv = interval(j);
        return BumpSpec{iv, iv.left + t0_fraction * iv.width(), eta_fraction * iv.width()};
    };
}

BigRational pow2_inverse(int k) {
    mpz_class den = 1;
    den <<= static_cast<unsigned>(k);
    return BigRational(mpq_class(mpz_class(1), den));
}

}  // namespace

void BumpSpec::validate() const {
    const BigRational zero(0), one(1);
    if (!(zero < interval.left && interval.left < interval.right && interval.right < one))
        fail(Errc::invalid_argument, "bump: interval must satisfy 0 < left < right < 1");
    if (!(eta.sign() > 0)) fail(Errc::invalid_argument, "bump: eta must be positive");
    if (!interval.contains(t0) || !interval.contains(t0 + BigRational(6) * eta))
        fail(Errc::invalid_argument, "bump: t0 and t0 + 6 eta must lie inside the interval");
}

bool BumpSpec::in_shifted_interval(const BigRational& t) const { return interval.contains(t.fractional_part()); }

IntervalRule IntervalRule::harmonic(BigRational t0_fraction, BigRational eta_fraction) {
    return {"harmonic", fractional_rule(std::move(t0_fraction), std::move(eta_fraction), [](int j) {
                return OpenInterval{BigRational(1, j + 2), BigRational(1, j + 1)};
            })};
}

IntervalRule IntervalRule::dyadic(BigRational t0_fraction, BigRational eta_fraction) {
    return {"dyadic", fractional_rule(std::move(t0_fraction), std::move(eta_fraction), [](int j) {
                return OpenInterval{pow2_inverse(j + 1), pow2_inverse(j)};
            })};
}

IntervalRule IntervalRule::custom(std::string name, BumpFactory rule) { return {std::move(name), std::move(rule)}; }

PiecewiseLinear orbit(const BigRational& t) { return exact::translate(exact::tent_psi0(), t); }

namespace {

PiecewiseLinear orbit_combination(const BigRational& t0, const BigRational& eta, std::span<const int> coeffs) {
    std::vector<BigRational> cs;
    std::vector<PiecewiseLinear> fs;
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        cs.emplace_back(coeffs[k]);
        fs.push_back(orbit(t0 + BigRational(static_cast<std::int64_t>(k)) * eta));
    }
    return exact::combine(cs, fs);
}

void require_positive_eta(const BigRational& eta) {
    if (!(eta.sign() > 0)) fail(Errc::invalid_argument, "eta must be positive");
}

}  // namespace

PiecewiseLinear build_phi_tilde(const BigRational& t0, const BigRational& eta) {
    require_positive_eta(eta);
    static constexpr std::array<int, 3> second_difference{1, -2, 1};
    return orbit_combination(t0, eta, second_difference);
}

PiecewiseLinear build_phi(const BigRational& t0, const BigRational& eta) {
    require_positive_eta(eta);
    static constexpr std::array<int, 7> fourth_difference{1, -2, -1, 4, -1, -2, 1};
    return orbit_combination(t0, eta, fourth_difference);
}

OrthogonalityCertificate verify_orthogonality(const PiecewiseLinear& phi, const BumpSpec& spec,
                                              const std::vector<BigRational>& samples) {
    OrthogonalityCertificate cert;
    for (const auto& t : samples) {
        if (spec.in_shifted_interval(t)) {
            cert.rejected.push_back({t, "t mod 1 = " + t.fractional_part().to_string() +
                                            " lies in I; orthogonality is not claimed there"});
            continue;
        }
        OrthogonalitySample s{t, exact::inner_product(orbit(t), phi)};
        if (!s.value.is_zero()) cert.failures.push_back(s);
        cert.checked.push_back(std::move(s));
    }
    return cert;
}

CounterexampleSystem assemble_system(int n, const IntervalRule& intervals, const ResonanceRule& resonance) {
    if (n < 1) fail(Errc::invalid_argument, "assemble_system: need at least one bump");

    std::vector<BumpSpec> specs;
    specs.reserve(static_cast<std::size_t>(n));
    for (int j = 1; j <= n; ++j) {
        specs.push_back(intervals(j));
        specs.back().validate();
    }
    std::vector<std::size_t> order(specs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return specs[a].interval.left < specs[b].interval.left; });
    for (std::size_t k = 1; k < order.size(); ++k) {
        const auto& lo = specs[order[k - 1]];
        const auto& hi = specs[order[k]];
        if (hi.interval.left < lo.interval.right)
            fail(Errc::invalid_argument, "assemble_system: interval rule '" + intervals.name() +
                                             "' produced overlapping intervals for bumps " +
                                             std::to_string(order[k - 1] + 1) + " and " +
                                             std::to_string(order[k] + 1));
    }

    std::vector<Bump> bumps;
    bumps.reserve(specs.size());
    for (int j = 1; j <= n; ++j) {
        Bump b;
        b.j = j;
        b.spec = specs[static_cast<std::size_t>(j - 1)];
        b.phi = build_phi(b.spec.t0, b.spec.eta);
        b.norm2 = exact::inner_product(b.phi, b.phi);

        std::vector<BigRational> candidates{b.spec.t0 + resonance.first_offset * b.spec.eta};
        for (int k = 1; k <= resonance.scan_count; ++k)
            candidates.push_back(b.spec.t0 + BigRational(k) * resonance.scan_step * b.spec.eta);
        bool found = false;
        for (const auto& t : candidates) {
            if (!b.spec.interval.contains(t)) continue;
            auto ov = exact::inner_product(b.phi, orbit(t));
            if (!ov.is_zero()) {
                b.t_res = t;
                b.overlap = std::move(ov);
                found = true;
                break;
            }
        }
        if (!found)
            fail(Errc::check_failed, "assemble_system: bump " + std::to_string(j) +
                                         ": every resonance candidate has zero overlap with psi(t)");
        // a_j <phi_j, psi(t_j)>^2 / norm2_j == j + 1
        b.weight = BigRational(j + 1) * b.norm2 / (b.overlap * b.overlap);
        bumps.push_back(std::move(b));
    }
    return CounterexampleSystem(std::move(bumps));
}

PiecewiseLinear apply_A(const CounterexampleSystem& system, const PiecewiseLinear& psi) {
    std::vector<BigRational> coeffs;
    std::vector<PiecewiseLinear> fs;
    for (const auto& b : system.bumps()) {
        auto ov = exact::inner_product(b.phi, psi);
        if (ov.is_zero()) continue;
        coeffs.push_back(b.weight * ov / b.norm2);
        fs.push_back(b.phi);
    }
    if (fs.empty()) return PiecewiseLinear::zero();
    return exact::combine(coeffs, fs);
}

BigRational expectation_A(const CounterexampleSystem& system, const BigRational& t) {
    const PiecewiseLinear psi = orbit(t);
    BigRational acc(0);
    for (const auto& b : system.bumps()) {
        const auto ov = exact::inner_product(b.phi, psi);
        if (!ov.is_zero()) acc += b.weight * ov * ov / b.norm2;
    }
    return acc;
}

std::optional<int> resonant_bump(const CounterexampleSystem& system, const BigRational& t) {
    const BigRational frac = t.fractional_part();
    for (const auto& b : system.bumps())
        if (b.spec.interval.contains(frac)) return b.j;
    return std::nullopt;
}

UnboundednessCertificate unboundedness_certificate(const CounterexampleSystem& system) {
    if (system.size() < 2) fail(Errc::invalid_argument, "unboundedness certificate needs at least two bumps");
    UnboundednessCertificate cert;
    cert.strictly_increasing = cert.exceeds_index = cert.witnesses_zero = true;
    for (const auto& b : system.bumps()) {
        UnboundednessRow row;
        row.j = b.j;
        row.t_j = b.t_res;
        row.expectation = expectation_A(system, b.t_res);

        // Closest admissible times outside every I_k + Z: the endpoints of I_j.
        const auto& iv = b.spec.interval;
        row.witness_zero_t = resonant_bump(system, iv.left) ? iv.right : iv.left;
        if (resonant_bump(system, row.witness_zero_t)) cert.witnesses_zero = false;
        if (!((row.witness_zero_t - b.t_res).abs() < iv.width())) cert.witnesses_zero = false;
        row.witness_expectation = expectation_A(system, row.witness_zero_t);
        if (!row.witness_expectation.is_zero()) cert.witnesses_zero = false;

        if (!(row.expectation > BigRational(b.j))) cert.exceeds_index = false;
        if (!cert.rows.empty() && !(cert.rows.back().expectation < row.expectation)) cert.strictly_increasing = false;
        cert.rows.push_back(std::move(row));
    }
    return cert;
}

bool gram_is_diagonal(const CounterexampleSystem& system) {
    const auto& bs = system.bumps();
    for (std::size_t i = 0; i < bs.size(); ++i)
        for (std::size_t k = i; k < bs.size(); ++k) {
            const auto g = exact::inner_product(bs[i].phi, bs[k].phi);
            if (i == k ? g != bs[i].norm2 : !g.is_zero()) return false;
        }
    return true;
}

std::vector<BigRational> sample_outside(const BumpSpec& spec, int count, std::uint64_t seed, int max_den,
                                        int range) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::int64_t> den_dist(1, max_den);
    std::vector<BigRational> out;
    while (static_cast<int>(out.size()) < count) {
        const std::int64_t q = den_dist(rng);
        std::uniform_int_distribution<std::int64_t> num_dist(-range * q, range * q);
        BigRational t(num_dist(rng), q);
        if (!spec.in_shifted_interval(t)) out.push_back(std::move(t));
    }
    return out;
}

std::vector<PiecewiseLinear> random_orbit_combinations(const CounterexampleSystem& system, int count,
                                                       std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> terms(1, 4);
    std::uniform_int_distribution<std::int64_t> small(-9, 9);
    std::uniform_int_distribution<std::int64_t> den(1, 97);
    std::uniform_int_distribution<std::size_t> pick(0, system.size() - 1);
    std::uniform_int_distribution<int> coin(0, 1);
    std::uniform_int_distribution<std::int64_t> unit(1, 999);

    std::vector<PiecewiseLinear> out;
    while (static_cast<int>(out.size()) < count) {
        const int m = terms(rng);
        std::vector<BigRational> cs;
        std::vector<PiecewiseLinear> fs;
        for (int i = 0; i < m; ++i) {
            std::int64_t c = small(rng);
            if (c == 0) c = 1;
            cs.emplace_back(c, den(rng));
            BigRational t;
            if (coin(rng) != 0) {
                const auto& iv = system.bumps()[pick(rng)].spec.interval;
                t = iv.left + iv.width() * BigRational(unit(rng), 1000) + BigRational(small(rng) % 2);
            } else {
                t = BigRational(small(rng) * 31 + unit(rng) % 31, 97);
            }
            fs.push_back(orbit(t));
        }
        auto f = exact::combine(cs, fs);
        if (!f.is_zero()) out.push_back(std::move(f));
    }
    return out;
}

bool check_hermitean(const CounterexampleSystem& system, int pairs, std::uint64_t seed) {
    const auto set = random_orbit_combinations(system, 2 * pairs, seed);
    for (int k = 0; k < pairs; ++k) {
        const auto& f = set[static_cast<std::size_t>(2 * k)];
        const auto& g = set[static_cast<std::size_t>(2 * k + 1)];
        if (exact::inner_product(apply_A(system, f), g) != exact::inner_product(f, apply_A(system, g))) return false;
    }
    return true;
}

}  // namespace ehrenfest::counterexample
