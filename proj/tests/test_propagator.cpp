#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "ehrenfest/error.hpp"
#include "ehrenfest/propagator.hpp"

using namespace ehrenfest::propagator;
using ehrenfest::Errc;
using ehrenfest::Error;

namespace {

ComplexVector random_vector(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> d;
    ComplexVector v(n);
    for (auto& z : v) z = {d(rng), d(rng)};
    return v;
}

// Coherent state of the unit harmonic oscillator started at rest at x0.
ComplexVector coherent_exact(const Grid& g, double x0, double t) {
    const double q = x0 * std::cos(t), p = -x0 * std::sin(t);
    ComplexVector v(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double x = g.node(k);
        v[k] = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * (x - q) * (x - q)) *
               std::polar(1.0, p * (x - 0.5 * q) - 0.5 * t);
    }
    return v;
}

GridState evolve(const GridState& s, const Observable& h, double dt, int steps, Scheme scheme) {
    Stepper st(h, dt, scheme);
    GridState out = s;
    for (int i = 0; i < steps; ++i) st.step(out);
    return out;
}

Errc code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return Errc::io;
}

}  // namespace

TEST_CASE("grid validation and nodes") {
    CHECK_THROWS_AS(Grid(40, 100), Error);
    CHECK_THROWS_AS(Grid(40, 8), Error);
    CHECK_THROWS_AS(Grid(0, 64), Error);
    const Grid g(40, 512);
    CHECK(g.spacing() == doctest::Approx(40.0 / 512));
    CHECK(g.node(0) == -20.0);
    CHECK(g.node(256) == doctest::Approx(0.0));
    CHECK(g.wavenumber(1) == doctest::Approx(2 * std::numbers::pi / 40));
    CHECK(g.wavenumber(511) == doctest::Approx(-2 * std::numbers::pi / 40));
}

TEST_CASE("fft round trip") {
    std::mt19937_64 rng(7);
    const auto fft = Fft::of_size(256);
    CHECK(fft.get() == Fft::of_size(256).get());
    const auto v = random_vector(rng, 256);
    ComplexVector spec(256), back(256);
    fft->forward(v, spec);
    fft->inverse(spec, back);
    for (std::size_t k = 0; k < 256; ++k) CHECK(std::abs(back[k] - v[k]) < 1e-13);
}

TEST_CASE("plane waves are eigenvectors of the free hamiltonian") {
    const Grid g(40, 512);
    const auto h = make_hamiltonian(g, Potential::free());
    for (long m : {0L, 1L, -3L, 17L, 100L}) {
        const auto pw = plane_wave(g, m);
        const double k = 2 * std::numbers::pi * static_cast<double>(m) / g.length();
        const auto hp = h.apply(pw.amplitudes);
        for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(hp[i] - 0.5 * k * k * pw.amplitudes[i]) < 1e-10);
    }
}

TEST_CASE("coherent state energy") {
    const Grid g(40, 512);
    const auto h = make_hamiltonian(g, Potential::harmonic());
    for (double x0 : {0.0, 1.0, 2.0, 3.5}) {
        const double exact = 0.5 + 0.5 * x0 * x0;
        CHECK(std::abs(expectation(gaussian(g, x0, 0, 1), h) - exact) / exact < 1e-6);
    }
    // Nonzero momentum adds p0^2/2.
    CHECK(std::abs(expectation(gaussian(g, 1, 1.5, 1), h) - (0.5 + 0.5 + 1.125)) < 1e-6);
}

TEST_CASE("non-finite potentials are rejected") {
    const Grid g(10, 64);
    CHECK(code_of([&] { make_hamiltonian(g, Potential::custom([](double x) { return 1.0 / x; })); }) ==
          Errc::invalid_argument);
    std::vector<double> v(64, 0.0);
    v[5] = std::numeric_limits<double>::quiet_NaN();
    CHECK(code_of([&] { make_hamiltonian(g, "H", v); }) == Errc::invalid_argument);
    CHECK_THROWS_AS(make_hamiltonian(g, "H", std::vector<double>(63, 0.0)), Error);
}

TEST_CASE("observables are hermitean on random pairs") {
    const Grid g(40, 256);
    std::mt19937_64 rng(11);
    const auto pot = Potential::quartic();
    std::vector<Observable> ops{Observable::identity(g),
                                Observable::position(g),
                                Observable::momentum(g),
                                Observable::kinetic(g),
                                Observable::potential_energy(g, Potential::barrier(2, 0.5, 1)),
                                make_hamiltonian(g, pot),
                                make_hamiltonian(g, Potential::harmonic(1.5)),
                                Observable::projector(g, "P", random_vector(rng, 256)),
                                Observable::multiplication(g, "f", std::vector<double>(256, -0.25))};
    for (const auto& a : ops) {
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const auto u = random_vector(rng, 256), v = random_vector(rng, 256);
            const cplx l = inner(g, a.apply(u), v), r = inner(g, u, a.apply(v));
            const double scale = norm(g, a.apply(u)) * norm(g, v) + norm(g, u) * norm(g, a.apply(v));
            worst = std::max(worst, std::abs(l - r) / scale);
        }
        INFO(a.name());
        CHECK(worst <= 1e-12);
    }
}

TEST_CASE("observable lookup by name") {
    const Grid g(40, 64);
    for (const char* n : {"identity", "x", "p", "kinetic", "potential", "H"})
        CHECK_NOTHROW(observable_by_name(n, g, Potential::harmonic()));
    CHECK_THROWS_AS(observable_by_name("spin", g, Potential::free()), Error);
    CHECK(Potential::kind_from_name("barrier") == Potential::Kind::barrier);
    CHECK_FALSE(Potential::kind_from_name("coulomb").has_value());
    CHECK(scheme_from_name("cayley4") == Scheme::cayley4);
    CHECK_FALSE(scheme_from_name("euler").has_value());
}

TEST_CASE("projector is idempotent") {
    const Grid g(20, 64);
    std::mt19937_64 rng(3);
    const auto p = Observable::projector(g, "P", random_vector(rng, 64));
    const auto u = random_vector(rng, 64);
    const auto pu = p.apply(u), ppu = p.apply(pu);
    CHECK(distance(g, pu, ppu) < 1e-12 * norm(g, pu));
    CHECK_THROWS_AS(Observable::projector(g, "P", ComplexVector(64)), Error);
}

TEST_CASE("expectation values") {
    const Grid g(40, 512);
    const auto s = gaussian(g, 2, 0, 1);
    CHECK(std::abs(expectation(s, Observable::identity(g)) - 1.0) < 1e-12);
    CHECK(std::abs(expectation(s, Observable::position(g)) - 2.0) < 1e-8);
    CHECK(std::abs(expectation(gaussian(g, -3.25, 0, 1), Observable::position(g)) + 3.25) < 1e-8);
    CHECK(std::abs(expectation(s, Observable::momentum(g))) < 1e-12);
    CHECK(std::abs(expectation(gaussian(g, 0, 0.8, 1), Observable::momentum(g)) - 0.8) < 1e-10);
}

TEST_CASE("commutator form") {
    const Grid g(40, 512);
    const auto s = gaussian(g, 1, 0.7, 1.2);

    const auto h = make_hamiltonian(g, Potential::harmonic());
    CHECK(std::abs(commutator_form(s, h, h)) < 1e-12);

    const auto free = make_hamiltonian(g, Potential::free());
    const auto x = Observable::position(g), p = Observable::momentum(g);
    CHECK(std::abs(commutator_form(s, free, x) - expectation(s, p)) < 1e-8);

    const auto pot = Potential::quartic();
    const auto hq = make_hamiltonian(g, pot);
    const auto dv = spectral_derivative(g, sample(g, pot));
    const double force = expectation(s, Observable::multiplication(g, "V'", dv));
    CHECK(std::abs(commutator_form(s, hq, p) + force) < 1e-6);

    for (const auto& a : {x, p, Observable::kinetic(g)})
        CHECK(std::abs(commutator_form(s, hq, a) + commutator_form(s, a, hq)) < 1e-12);
}

TEST_CASE("crank-nicolson advances a plane wave by the cayley phase") {
    const Grid g(40, 128);
    const auto h = make_hamiltonian(g, Potential::free());
    for (long m : {1L, 5L, -12L}) {
        const auto pw = plane_wave(g, m);
        const double k = 2 * std::numbers::pi * static_cast<double>(m) / g.length();
        const double lambda = 0.5 * k * k, dt = 0.1;
        const cplx c = cplx(1.0, -0.5 * dt * lambda) / cplx(1.0, 0.5 * dt * lambda);
        const auto out = step_crank_nicolson(pw, h, dt);
        for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(out.amplitudes[i] - c * pw.amplitudes[i]) < 1e-12);
        CHECK(out.time == doctest::Approx(dt));
    }
}

TEST_CASE("crank-nicolson small step and long-run unitarity") {
    const Grid g(40, 512);
    const auto h = make_hamiltonian(g, Potential::harmonic());
    const auto s = gaussian(g, 2, 0.5, 1);
    CHECK(distance(g, step_crank_nicolson(s, h, 1e-8).amplitudes, s.amplitudes) <= 1e-6);

    Stepper st(h, 1e-3, Scheme::crank_nicolson);
    GridState cur = s;
    double worst_step = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double before = norm(g, cur.amplitudes);
        st.step(cur);
        worst_step = std::max(worst_step, std::abs(norm(g, cur.amplitudes) - before));
        CHECK(st.last_solve().residual <= 1e-12);
    }
    CHECK(worst_step <= 1e-10);
    CHECK(std::abs(norm(g, cur.amplitudes) - 1.0) <= 1e-8);
    CHECK(cur.time == doctest::Approx(10.0));
}

TEST_CASE("solver non-convergence is reported") {
    const Grid g(40, 256);
    const auto h = make_hamiltonian(g, Potential::quartic());
    SolverOptions opt;
    opt.max_iterations = 1;
    CHECK(code_of([&] { step_crank_nicolson(gaussian(g, 3, 0, 1), h, 0.5, opt); }) == Errc::solver);
    CHECK_THROWS_AS(Stepper(h, 0.0, Scheme::crank_nicolson), Error);
    CHECK_THROWS_AS(Stepper(h, -1e-3, Scheme::split_fourier), Error);
}

TEST_CASE("split-fourier is exact for the free particle") {
    const Grid g(40, 256);
    const auto h = make_hamiltonian(g, Potential::free());
    const auto s = gaussian(g, -2, 1.3, 1.5);
    const double dt = 0.05;
    const int steps = 40;
    const auto out = evolve(s, h, dt, steps, Scheme::split_fourier);

    const auto fft = Fft::of_size(g.size());
    ComplexVector spec(g.size()), exact(g.size());
    fft->forward(s.amplitudes, spec);
    for (std::size_t m = 0; m < g.size(); ++m) {
        const double k = g.wavenumber(m);
        spec[m] *= std::polar(1.0, -0.5 * k * k * dt * steps);
    }
    fft->inverse(spec, exact);
    CHECK(distance(g, out.amplitudes, exact) < 1e-12);
}

TEST_CASE("split-fourier per-step unitarity") {
    const Grid g(40, 512);
    const auto h = make_hamiltonian(g, Potential::barrier(3, 0.7, 0.5));
    Stepper st(h, 1e-2, Scheme::split_fourier);
    GridState cur = gaussian(g, -3, 1, 1);
    for (int i = 0; i < 500; ++i) {
        const double before = norm(g, cur.amplitudes);
        st.step(cur);
        CHECK(std::abs(norm(g, cur.amplitudes) - before) <= 1e-12);
    }
}

TEST_CASE("integrators converge at their orders on the harmonic oscillator") {
    const Grid g(40, 512);
    const auto h = make_hamiltonian(g, Potential::harmonic());
    const auto s = gaussian(g, 2, 0, 1);
    const auto exact = coherent_exact(g, 2, 1.0);

    auto error_at = [&](Scheme sc, double dt) {
        return distance(g, evolve(s, h, dt, static_cast<int>(std::lround(1.0 / dt)), sc).amplitudes, exact);
    };
    for (Scheme sc : {Scheme::split_fourier, Scheme::crank_nicolson}) {
        const double e1 = error_at(sc, 0.01), e2 = error_at(sc, 0.005), e3 = error_at(sc, 0.0025);
        INFO(to_string(sc), " errors ", e1, " ", e2, " ", e3);
        CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.2));
        CHECK(e2 / e3 == doctest::Approx(4.0).epsilon(0.2));
    }
    const double c1 = error_at(Scheme::cayley4, 0.04), c2 = error_at(Scheme::cayley4, 0.02);
    INFO("cayley4 errors ", c1, " ", c2);
    CHECK(c1 / c2 > 12.0);
}

TEST_CASE("crank-nicolson and split-fourier agree at T = 1") {
    const Grid g(40, 512);
    const auto h = make_hamiltonian(g, Potential::harmonic());
    const auto s = gaussian(g, 2, 0, 1);
    const auto a = evolve(s, h, 1e-3, 1000, Scheme::crank_nicolson);
    const auto b = evolve(s, h, 1e-3, 1000, Scheme::split_fourier);
    CHECK(distance(g, a.amplitudes, b.amplitudes) <= 1e-4);
}

TEST_CASE("cayley4 keeps norm and energy") {
    const Grid g(40, 512);
    const auto h = make_hamiltonian(g, Potential::quartic());
    const auto s = gaussian(g, 2, 0, 1);
    const auto out = evolve(s, h, 1e-2, 200, Scheme::cayley4);
    CHECK(std::abs(norm(g, out.amplitudes) - 1.0) < 1e-10);
    const double e0 = expectation(s, h);
    CHECK(std::abs(expectation(out, h) - e0) / e0 < 1e-10);
}

TEST_CASE("sampled derivative is exact on low-degree polynomials") {
    const double h = 0.1;
    std::vector<double> quad(12), quart(12);
    for (int i = 0; i < 12; ++i) {
        const double t = i * h;
        quad[i] = 3 - 2 * t + 5 * t * t;
        quart[i] = 1 + t - t * t + 2 * t * t * t - 0.5 * t * t * t * t;
    }
    const auto d2 = sampled_derivative(quad, h, 2);
    const auto d4 = sampled_derivative(quart, h, 4);
    for (int i = 0; i < 12; ++i) {
        const double t = i * h;
        CHECK(d2[i] == doctest::Approx(-2 + 10 * t).epsilon(1e-10));
        CHECK(d4[i] == doctest::Approx(1 - 2 * t + 6 * t * t - 2 * t * t * t).epsilon(1e-10));
    }
    CHECK_THROWS_AS(sampled_derivative(quad, h, 3), Error);
    CHECK_THROWS_AS(sampled_derivative(std::vector<double>(4, 0.0), h, 4), Error);
}

TEST_CASE("evolve_and_report series") {
    const Grid g(40, 256);
    const auto h = make_hamiltonian(g, Potential::harmonic());
    const std::vector<Observable> obs{Observable::identity(g), Observable::position(g), Observable::momentum(g)};
    EvolveOptions opt;
    opt.total_time = 1.0;
    opt.dt = 1e-3;
    opt.save_every = 10;
    const auto rep = evolve_and_report(gaussian(g, 2, 0, 1), h, obs, opt);
    REQUIRE(rep.times.size() == 101);
    CHECK(rep.times[37] == 37 * 10 * 1e-3);
    for (const auto& s : rep.observables) {
        CHECK(s.expectation.size() == 101);
        CHECK(s.lhs.size() == 101);
        CHECK(s.rhs.size() == 101);
        CHECK(s.residual.size() == 101);
        CHECK(s.sup_running.back() == s.sup_a_norm);
        CHECK(std::isfinite(s.sup_a_norm));
    }
    const auto& id = rep.observables[0];
    for (double e : id.expectation) CHECK(std::abs(e - 1.0) < 1e-10);
    CHECK(id.max_residual <= 1e-10);
    CHECK(rep.norm_drift <= 1e-10);
    CHECK(rep.energy_drift <= 1e-10);
    // Canonical pair: d<x>/dt = <p>.
    const auto& x = rep.observables[1];
    for (std::size_t k = 0; k < rep.times.size(); ++k)
        CHECK(std::abs(x.rhs[k] - rep.observables[2].expectation[k]) < 1e-8);
    CHECK(x.max_residual < 5e-6);
}

TEST_CASE("evolve_and_report rejects bad options") {
    const Grid g(40, 64);
    const auto h = make_hamiltonian(g, Potential::free());
    const std::vector<Observable> obs{Observable::position(g)};
    const auto s = gaussian(g, 0, 0, 1);
    EvolveOptions opt;
    opt.total_time = 0.0;
    CHECK(code_of([&] { evolve_and_report(s, h, obs, opt); }) == Errc::invalid_argument);
    opt = {};
    opt.save_every = 0;
    CHECK(code_of([&] { evolve_and_report(s, h, obs, opt); }) == Errc::invalid_argument);
    opt = {};
    opt.total_time = 0.02;
    CHECK(code_of([&] { evolve_and_report(s, h, obs, opt); }) == Errc::invalid_argument);
    const std::vector<Observable> other{Observable::position(Grid(20, 64))};
    CHECK(code_of([&] { evolve_and_report(s, h, other, EvolveOptions{}); }) == Errc::invalid_argument);
}

TEST_CASE("wraparound aborts the run") {
    const Grid g(20, 128);
    const auto h = make_hamiltonian(g, Potential::free());
    const std::vector<Observable> obs{Observable::position(g)};
    EvolveOptions opt;
    opt.total_time = 4.0;
    opt.dt = 1e-2;
    opt.save_every = 1;
    opt.scheme = Scheme::split_fourier;
    try {
        evolve_and_report(gaussian(g, 4, 3, 1), h, obs, opt);
        FAIL("expected an abort");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::numeric);
        CHECK(std::string(e.what()).find("box edge") != std::string::npos);
        CHECK(std::string(e.what()).find("e-") != std::string::npos);
    }
}

TEST_CASE("csv output") {
    const Grid g(40, 128);
    const auto h = make_hamiltonian(g, Potential::harmonic());
    const std::vector<Observable> obs{Observable::position(g)};
    EvolveOptions opt;
    opt.total_time = 0.1;
    opt.dt = 1e-2;
    opt.save_every = 1;
    const auto rep = evolve_and_report(gaussian(g, 1, 0, 1), h, obs, opt);
    std::ostringstream os;
    write_csv(rep, 0, os);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "t,expectation,lhs,rhs,residual,norm,energy,sup_A_norm_running");
    int rows = 0;
    while (std::getline(is, line)) {
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 7);
    }
    CHECK(rows == 11);
    // 17 significant digits round-trip the stored value.
    std::istringstream first(os.str().substr(os.str().find('\n') + 1));
    std::string cell;
    std::getline(first, cell, ',');
    std::getline(first, cell, ',');
    CHECK(std::stod(cell) == rep.observables[0].expectation[0]);
    CHECK_THROWS(write_csv(rep, 3, os));
}
