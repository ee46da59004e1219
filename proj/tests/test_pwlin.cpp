#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ehrenfest/error.hpp"
#include "ehrenfest/pwlin.hpp"
#include "oracles.hpp"

using namespace ehrenfest::exact;

namespace {

BigRational Q(std::int64_t p, std::int64_t q = 1) { return BigRational(p, q); }

PiecewiseLinear phi_tilde_by_hand(const BigRational& t0, const BigRational& eta) {
    const BigRational c[] = {Q(1), Q(-2), Q(1)};
    const PiecewiseLinear f[] = {translate(tent_psi0(), t0), translate(tent_psi0(), t0 + eta),
                                 translate(tent_psi0(), t0 + Q(2) * eta)};
    return combine(c, f);
}

}  // namespace

TEST_CASE("BigRational parses p/q and keeps lowest terms") {
    CHECK(BigRational::parse("6/4") == Q(3, 2));
    CHECK(BigRational::parse("-6/4").to_string() == "-3/2");
    CHECK(BigRational::parse("7").to_string() == "7/1");
    CHECK(BigRational::parse(" 0/5 ").is_zero());
    CHECK_THROWS_AS(BigRational::parse("0.25"), ehrenfest::Error);
    CHECK_THROWS_AS(BigRational::parse("1e3"), ehrenfest::Error);
    CHECK_THROWS_AS(BigRational::parse("1/0"), ehrenfest::Error);
    CHECK_THROWS_AS(BigRational::parse("1/-2"), ehrenfest::Error);
    CHECK(Q(-7, 3).floor() == Q(-3));
    CHECK(Q(-7, 3).fractional_part() == Q(2, 3));
}

TEST_CASE("tent function") {
    const auto psi0 = tent_psi0();
    CHECK(evaluate(psi0, Q(1)) == Q(1));
    CHECK(evaluate(psi0, Q(0)) == Q(0));
    CHECK(evaluate(psi0, Q(2)) == Q(0));
    CHECK(evaluate(psi0, Q(1, 2)) == Q(1, 2));
    CHECK(evaluate(psi0, Q(3, 2)) == Q(1, 2));
    CHECK(evaluate(psi0, Q(-5)) == Q(0));
    CHECK(evaluate(PiecewiseLinear::zero(), Q(17, 3)) == Q(0));
}

TEST_CASE("construction rejects invalid breakpoints") {
    CHECK_THROWS_AS(PiecewiseLinear({{Q(0), Q(0)}, {Q(0), Q(1)}, {Q(1), Q(0)}}), ehrenfest::Error);
    CHECK_THROWS_AS(PiecewiseLinear({{Q(0), Q(1)}, {Q(1), Q(0)}}), ehrenfest::Error);
    CHECK(PiecewiseLinear({{Q(0), Q(0)}, {Q(1), Q(0)}}).is_zero());
}

TEST_CASE("canonical form drops collinear and zero-run breakpoints") {
    const PiecewiseLinear f({{Q(-1), Q(0)}, {Q(0), Q(0)}, {Q(1, 2), Q(1, 2)}, {Q(1), Q(1)}, {Q(2), Q(0)}, {Q(3), Q(0)}});
    CHECK(f == tent_psi0());
    std::vector<Breakpoint> raw(f.breakpoints().begin(), f.breakpoints().end());
    CHECK(canonicalize(raw) == raw);
}

TEST_CASE("translate") {
    const auto psi0 = tent_psi0();
    CHECK(translate(psi0, Q(0)) == psi0);
    CHECK(evaluate(translate(psi0, Q(1, 3)), Q(4, 3)) == Q(1));
    std::mt19937_64 rng(11);
    for (int i = 0; i < 50; ++i) {
        const auto f = oracle::random_pwl(rng);
        const auto s = oracle::random_rational(rng), t = oracle::random_rational(rng);
        CHECK(translate(translate(f, s), t) == translate(f, s + t));
    }
}

TEST_CASE("combine") {
    const auto f = tent_psi0();
    const BigRational one[] = {Q(1)};
    const PiecewiseLinear just_f[] = {f};
    CHECK(combine(one, just_f) == f);
    const BigRational cancel[] = {Q(1), Q(-1)};
    const PiecewiseLinear ff[] = {f, f};
    CHECK(combine(cancel, ff).is_zero());
    CHECK_THROWS_AS(combine(std::span<const BigRational>(cancel), std::span<const PiecewiseLinear>(just_f)),
                    ehrenfest::Error);

    const BigRational t0 = Q(3, 10), eta = Q(1, 50);
    CHECK(evaluate(phi_tilde_by_hand(t0, eta), t0 + eta) == eta);
}

TEST_CASE("inner product closed forms") {
    // int_0^1 x^2 + int_1^2 (2-x)^2 = 2/3
    CHECK(inner_product(tent_psi0(), tent_psi0()) == Q(2, 3));
    CHECK(oracle::simpson_inner(tent_psi0(), tent_psi0()) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));

    // Three bumps of height eta, eta*(-2), eta: (1 + 4 + 1) * 2 eta^3 / 3 = 4 eta^3.
    for (const auto& [t0, eta] : {std::pair{Q(3, 10), Q(1, 50)}, std::pair{Q(1, 7), Q(1, 100)}}) {
        const auto pt = phi_tilde_by_hand(t0, eta);
        CHECK(inner_product(pt, pt) == Q(4) * eta * eta * eta);
        CHECK(oracle::simpson_inner(pt, pt) ==
              doctest::Approx((Q(4) * eta * eta * eta).to_double()).epsilon(1e-10));
    }
}

TEST_CASE("first moment") {
    CHECK(first_moment(PiecewiseLinear::zero(), Q(0), Q(1)) == Q(0));
    // int_0^1 x*x + int_1^2 x(2-x) = 1/3 + 2/3
    CHECK(first_moment(tent_psi0(), Q(0), Q(2)) == Q(1));
    CHECK(first_moment(tent_psi0(), Q(0), Q(1)) == Q(1, 3));
    CHECK(first_moment(tent_psi0(), Q(-4), Q(9)) == Q(1));
    CHECK_THROWS_AS(first_moment(tent_psi0(), Q(1), Q(1)), ehrenfest::Error);
}

TEST_CASE("support") {
    CHECK(support(PiecewiseLinear::zero()).empty());
    CHECK(support(tent_psi0()) == std::vector<ClosedInterval>{{Q(0), Q(2)}});
    const BigRational t0 = Q(3, 10), eta = Q(1, 50);
    const std::vector<ClosedInterval> expected{{t0, t0 + Q(2) * eta},
                                               {t0 + Q(1), t0 + Q(2) * eta + Q(1)},
                                               {t0 + Q(2), t0 + Q(2) * eta + Q(2)}};
    CHECK(support(phi_tilde_by_hand(t0, eta)) == expected);
}

TEST_CASE("properties on random functions") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 60; ++trial) {
        const auto f = oracle::random_pwl(rng), g = oracle::random_pwl(rng), h = oracle::random_pwl(rng);
        const auto s = oracle::random_rational(rng), a = oracle::random_rational(rng), b = oracle::random_rational(rng);

        CHECK(inner_product(f, g) == inner_product(g, f));
        CHECK(inner_product(translate(f, s), translate(g, s)) == inner_product(f, g));

        const BigRational ab[] = {a, b};
        const PiecewiseLinear fg[] = {f, g};
        CHECK(inner_product(combine(ab, fg), h) == a * inner_product(f, h) + b * inner_product(g, h));

        const auto fg_ip = inner_product(f, g);
        CHECK(fg_ip * fg_ip <= inner_product(f, f) * inner_product(g, g));

        const double exact = fg_ip.to_double();
        const double scale = std::sqrt(inner_product(f, f).to_double() * inner_product(g, g).to_double());
        CHECK(std::abs(oracle::simpson_inner(f, g) - exact) <= 1e-12 * std::max(scale, 1.0));
    }
}

TEST_CASE("canonicalization is idempotent and value-preserving") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        // Insert redundant breakpoints by hand.
        const auto f = oracle::random_pwl(rng);
        std::vector<Breakpoint> padded;
        const auto pts = f.breakpoints();
        padded.push_back({pts.front().x - Q(1), Q(0)});
        for (std::size_t k = 0; k < pts.size(); ++k) {
            padded.push_back(pts[k]);
            if (k + 1 < pts.size()) {
                const auto mid = (pts[k].x + pts[k + 1].x) / Q(2);
                padded.push_back({mid, (pts[k].y + pts[k + 1].y) / Q(2)});
            }
        }
        padded.push_back({pts.back().x + Q(1), Q(0)});

        const auto once = canonicalize(padded);
        CHECK(canonicalize(once) == once);
        const PiecewiseLinear raw_fn(padded);
        CHECK(raw_fn == f);
        for (int k = 0; k < 100; ++k) {
            const auto x = oracle::random_rational(rng, 64, 60);
            // Interpolate the padded list directly.
            BigRational expected(0);
            for (std::size_t i = 0; i + 1 < padded.size(); ++i)
                if (padded[i].x <= x && x <= padded[i + 1].x) {
                    expected = padded[i].y + (padded[i + 1].y - padded[i].y) * (x - padded[i].x) /
                                                 (padded[i + 1].x - padded[i].x);
                    break;
                }
            CHECK(evaluate(f, x) == expected);
        }
    }
}

TEST_CASE("text serialization") {
    const auto f = phi_tilde_by_hand(Q(3, 10), Q(1, 50));
    const auto text = serialize(f);
    CHECK(text.rfind("pwlin v1\n", 0) == 0);
    CHECK(deserialize(text) == f);
    CHECK(serialize(PiecewiseLinear::zero()) == "pwlin v1\n0\n");
    CHECK(deserialize("pwlin v1\n3\n0/1 0/1\n1/1 1/1\n2/1 0/1\n") == tent_psi0());

    std::mt19937_64 rng(5);
    for (int i = 0; i < 20; ++i) {
        const auto g = oracle::random_pwl(rng);
        CHECK(deserialize(serialize(g)) == g);
    }

    CHECK_THROWS_AS(deserialize("pwlin v2\n0\n"), ehrenfest::Error);
    CHECK_THROWS_AS(deserialize("pwlin v1\n2\n0/1 0/1\n"), ehrenfest::Error);
    CHECK_THROWS_AS(deserialize("pwlin v1\n1\n0.5 0\n"), ehrenfest::Error);
    CHECK_THROWS_AS(deserialize("pwlin v1\n3\n0/1 0/1\n1/1 1/1\n2/1 1/1\n"), ehrenfest::Error);
}
