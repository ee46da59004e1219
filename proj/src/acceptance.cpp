#include "ehrenfest/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include "ehrenfest/counterexample.hpp"
#include "ehrenfest/crosscheck.hpp"
#include "ehrenfest/error.hpp"
#include "ehrenfest/propagator.hpp"

namespace ehrenfest::acceptance {

namespace {

namespace ce = counterexample;
namespace pr = propagator;
using exact::BigRational;

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

struct Outcome {
    bool passed;
    std::string detail;
};

// Reference scenarios for the numerical criteria.
struct Scenario {
    const char* name;
    pr::Potential potential;
    double length;
    std::size_t nodes;
    double x0, p0, sigma;
};

const std::vector<Scenario>& reference_scenarios() {
    static const std::vector<Scenario> s{
        {"harmonic", pr::Potential::harmonic(), 40.0, 512, 2.0, 0.0, 1.0},
        {"quartic", pr::Potential::quartic(), 40.0, 512, 2.0, 0.0, 1.0},
        {"free", pr::Potential::free(), 80.0, 1024, -4.0, 1.0, 2.0},
        {"barrier", pr::Potential::barrier(1.0, 1.0, 0.0), 160.0, 1024, -4.0, 1.0, 2.0},
    };
    return s;
}

pr::EhrenfestReport evolve(const Scenario& sc, const std::vector<std::string>& names, double total, double dt,
                           int save_every, pr::Scheme scheme) {
    const pr::Grid grid(sc.length, sc.nodes);
    const auto h = pr::make_hamiltonian(grid, sc.potential);
    std::vector<pr::Observable> obs;
    for (const auto& n : names) obs.push_back(pr::observable_by_name(n, grid, sc.potential));
    pr::EvolveOptions opt;
    opt.total_time = total;
    opt.dt = dt;
    opt.save_every = save_every;
    opt.scheme = scheme;
    return pr::evolve_and_report(pr::gaussian(grid, sc.x0, sc.p0, sc.sigma), h, obs, opt);
}

Outcome criterion1(std::uint64_t seed) {
    const auto sys = ce::assemble_system(20);
    const bool gram = ce::gram_is_diagonal(sys);
    int bad_moments = 0, bad_orth = 0, bad_value = 0;
    std::size_t samples = 0;
    for (const auto& b : sys.bumps()) {
        for (int k = 0; k <= 2; ++k) {
            const BigRational a = b.spec.t0 + BigRational(k);
            if (!exact::first_moment(b.phi, a, a + BigRational(6) * b.spec.eta).is_zero()) ++bad_moments;
        }
        const auto ts = ce::sample_outside(b.spec, 100, seed + static_cast<std::uint64_t>(b.j));
        const auto cert = ce::verify_orthogonality(b.phi, b.spec, ts);
        samples += cert.checked.size();
        if (!cert.ok() || cert.checked.size() != 100) ++bad_orth;
        const auto value = ce::expectation_A(sys, b.t_res);
        if (!(value == BigRational(b.j + 1)) || !(value > BigRational(b.j))) ++bad_value;
    }
    const bool ok = gram && bad_moments == 0 && bad_orth == 0 && bad_value == 0;
    return {ok, fmt("n = 20: Gram diagonal %s, %d/60 cell moments nonzero, %zu orthogonality samples with %d failing "
                    "bumps, <A>(t_j) = j+1 failed for %d bumps",
                    gram ? "yes" : "NO", bad_moments, samples, bad_orth, bad_value)};
}

Outcome criterion2() {
    const auto sys = ce::assemble_system(20);
    const auto cert = ce::unboundedness_certificate(sys);
    int bad = 0;
    for (const auto& r : cert.rows) {
        const auto& b = sys.bump(r.j);
        const bool near = (r.witness_zero_t - r.t_j).abs() < b.spec.interval.width();
        if (!near || !ce::expectation_A(sys, r.witness_zero_t).is_zero() || !(r.expectation > BigRational(0))) ++bad;
    }
    return {bad == 0 && cert.rows.size() == 20,
            fmt("%zu rows: witness t' within width(I_j) of t_j with <A>(t') = 0 while <A>(t_j) = j+1; %d failures",
                cert.rows.size(), bad)};
}

Outcome criterion3(std::uint64_t seed) {
    const auto sys = ce::assemble_system(20);
    std::mt19937_64 rng(seed);
    int bad = 0, points = 0;
    for (const auto& b : sys.bumps()) {
        const auto& t0 = b.spec.t0;
        const auto& eta = b.spec.eta;
        const auto pt = ce::build_phi_tilde(t0, eta);
        if (!(exact::evaluate(pt, t0 + eta) == eta)) ++bad;
        for (int i = 0; i < 20; ++i) {
            const auto k = std::uniform_int_distribution<std::int64_t>(0, 9973)(rng);
            const BigRational t = t0 + BigRational(2) * eta * BigRational(k, 9973);
            const auto v = exact::evaluate(pt, t);
            if (!(exact::evaluate(pt, t + BigRational(1)) == BigRational(-2) * v)) ++bad;
            if (!(exact::evaluate(pt, t + BigRational(2)) == v)) ++bad;
            ++points;
        }
        const auto supp = exact::support(pt);
        bool supp_ok = supp.size() == 3;
        for (std::size_t k = 0; supp_ok && k < 3; ++k) {
            const BigRational shift(static_cast<std::int64_t>(k));
            supp_ok = supp[k].left == t0 + shift && supp[k].right == t0 + BigRational(2) * eta + shift;
        }
        if (!supp_ok) ++bad;
    }
    return {bad == 0, fmt("20 bumps x %d random points: phi~(t0+eta) = eta, phi~(t+1) = -2 phi~(t), phi~(t+2) = phi~(t), "
                          "support [t0, t0+2eta] + {0,1,2}; %d failures",
                          points / 20, bad)};
}

Outcome criterion4() {
    const auto& sc = reference_scenarios()[0];
    const std::vector<std::string> names{"x", "p", "H"};
    const auto t0 = std::chrono::steady_clock::now();
    const auto rep = evolve(sc, names, 6.4, 1e-3, 10, pr::Scheme::cayley4);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    double xerr = 0.0;
    for (std::size_t k = 0; k < rep.times.size(); ++k)
        xerr = std::max(xerr, std::abs(rep.observables[0].expectation[k] - 2.0 * std::cos(rep.times[k])));
    const double rx = rep.observables[0].max_residual, rp = rep.observables[1].max_residual,
                 rh = rep.observables[2].max_residual;
    const bool ok = rx <= 5e-6 && rp <= 5e-6 && rh <= 1e-10 && xerr <= 1e-4 && secs <= 30.0;

    // Second-order integrators on the same scenario, for the record.
    const auto cn = evolve(sc, names, 6.4, 1e-3, 10, pr::Scheme::crank_nicolson);
    const auto sf = evolve(sc, names, 6.4, 1e-3, 10, pr::Scheme::split_fourier);
    return {ok, fmt("cayley4: residual x %.2e p %.2e (<= 5e-6) H %.2e (<= 1e-10), |<x> - 2cos t| %.2e (<= 1e-4), "
                    "%.1f s (<= 30 s); crank_nicolson x %.2e p %.2e H %.2e; split_fourier x %.2e p %.2e H %.2e",
                    rx, rp, rh, xerr, secs, cn.observables[0].max_residual, cn.observables[1].max_residual,
                    cn.observables[2].max_residual, sf.observables[0].max_residual, sf.observables[1].max_residual,
                    sf.observables[2].max_residual)};
}

Outcome criterion5() {
    const auto& sc = reference_scenarios()[0];
    const std::vector<std::string> names{"x", "p"};
    std::string detail;
    bool ok = true;
    for (auto scheme : {pr::Scheme::crank_nicolson, pr::Scheme::split_fourier}) {
        const auto a = evolve(sc, names, 6.4, 1e-3, 10, scheme);
        const auto b = evolve(sc, names, 6.4, 5e-4, 20, scheme);
        for (std::size_t i = 0; i < names.size(); ++i) {
            const double ratio = a.observables[i].max_residual / b.observables[i].max_residual;
            ok = ok && ratio >= 3.5;
            detail += fmt("%s %s %.2f; ", pr::to_string(scheme).c_str(), names[i].c_str(), ratio);
        }
    }
    const auto sys = ce::assemble_system(5, ce::IntervalRule::dyadic());
    const auto times = crosscheck::default_times(sys);
    const auto coarse = crosscheck::counterexample_crosscheck(sys, pr::Grid(16.0, std::size_t{1} << 17), times);
    const auto fine = crosscheck::counterexample_crosscheck(sys, pr::Grid(16.0, std::size_t{1} << 18), times);
    const auto ratios = crosscheck::refinement_ratios(coarse, fine);
    const double worst = ratios.empty() ? 0.0 : *std::min_element(ratios.begin(), ratios.end());
    ok = ok && !ratios.empty() && worst >= 3.5;
    return {ok, "dt -> dt/2 residual ratios: " + detail +
                    fmt("crosscheck h -> h/2 min gap ratio %.2f over %zu resonant samples (all >= 3.5)", worst,
                        ratios.size())};
}

Outcome criterion6() {
    const auto& sc = reference_scenarios()[1];
    const auto rep = evolve(sc, {"x"}, 10.0, 1e-3, 10, pr::Scheme::crank_nicolson);
    const bool ok = rep.norm_drift <= 1e-8 && rep.energy_drift <= 1e-6;
    return {ok, fmt("quartic, 10^4 Crank-Nicolson steps: norm drift %.2e (<= 1e-8), relative energy drift %.2e "
                    "(<= 1e-6)",
                    rep.norm_drift, rep.energy_drift)};
}

Outcome criterion7() {
    std::string detail;
    bool ok = true;
    for (const auto& sc : reference_scenarios()) {
        const auto a = evolve(sc, {"x", "p"}, 10.0, 1e-3, 10, pr::Scheme::crank_nicolson);
        const auto b = evolve(sc, {"x", "p"}, 10.0, 5e-4, 20, pr::Scheme::crank_nicolson);
        for (std::size_t i = 0; i < 2; ++i) {
            const double s1 = a.observables[i].sup_a_norm, s2 = b.observables[i].sup_a_norm;
            const double change = std::abs(s2 - s1) / s1;
            ok = ok && std::isfinite(s1) && std::isfinite(s2) && change <= 0.01;
            detail += fmt("%s sup||%s psi|| %.6g (change %.1e); ", sc.name, a.observables[i].name.c_str(), s1, change);
        }
    }
    for (int m : {10, 100, 1000}) {
        const auto sys = ce::assemble_system(m + 1);
        const auto value = ce::expectation_A(sys, sys.bump(m).t_res);
        const bool admissible = sys.bump(m).t_res > BigRational(0) && sys.bump(m).t_res < BigRational(1);
        ok = ok && admissible && value > BigRational(m);
        detail += fmt("M = %d: <A>(t_%d) = %s; ", m, m, value.to_string().c_str());
    }
    detail.resize(detail.size() - 2);
    return {ok, detail};
}

Outcome criterion8() {
    const auto& sc = reference_scenarios()[0];
    const pr::Grid grid(sc.length, sc.nodes);
    const auto h = pr::make_hamiltonian(grid, sc.potential);
    const auto psi0 = pr::gaussian(grid, sc.x0, sc.p0, sc.sigma);
    pr::Stepper cn(h, 1e-3, pr::Scheme::crank_nicolson), sf(h, 1e-3, pr::Scheme::split_fourier);
    auto a = psi0, b = psi0;
    for (int i = 0; i < 1000; ++i) {
        cn.step(a);
        sf.step(b);
    }
    const double d = pr::distance(grid, a.amplitudes, b.amplitudes);
    return {d <= 1e-4, fmt("harmonic, T = 1, dt = 1e-3, n = 512: ||psi_CN - psi_split|| = %.2e (<= 1e-4)", d)};
}

const char* title(int id) {
    switch (id) {
        case 1: return "exact counterexample certificate";
        case 2: return "discontinuity witness";
        case 3: return "phi-tilde structure";
        case 4: return "Ehrenfest identity, harmonic oscillator";
        case 5: return "convergence orders";
        case 6: return "conservation";
        case 7: return "sup-norm diagnostic vs unbounded <A>";
        case 8: return "cross-integrator agreement";
    }
    return "unknown";
}

}  // namespace

CriterionResult run_criterion(int id, std::uint64_t seed) {
    CriterionResult r;
    r.id = id;
    r.title = title(id);
    const auto t0 = std::chrono::steady_clock::now();
    try {
        Outcome o{false, "unknown criterion"};
        switch (id) {
            case 1: o = criterion1(seed); break;
            case 2: o = criterion2(); break;
            case 3: o = criterion3(seed); break;
            case 4: o = criterion4(); break;
            case 5: o = criterion5(); break;
            case 6: o = criterion6(); break;
            case 7: o = criterion7(); break;
            case 8: o = criterion8(); break;
            default: break;
        }
        r.passed = o.passed;
        r.detail = std::move(o.detail);
    } catch (const std::exception& e) {
        r.passed = false;
        r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (id == 1 && r.seconds > 60.0) {
        r.passed = false;
        r.detail += fmt("; took %.1f s (limit 60 s)", r.seconds);
    }
    return r;
}

std::vector<CriterionResult> run_all(std::uint64_t seed, std::ostream* progress) {
    std::vector<CriterionResult> out;
    for (int id = 1; id <= criterion_count; ++id) {
        out.push_back(run_criterion(id, seed));
        if (progress) *progress << format_line(out.back()) << std::endl;
    }
    return out;
}

std::string format_line(const CriterionResult& r) {
    return "criterion " + std::to_string(r.id) + ": " + (r.passed ? "PASS" : "FAIL") + "  " + r.title + "  (" +
           r.detail + ") " + fmt("[%.1f s]", r.seconds);
}

}  // namespace ehrenfest::acceptance
