#include "ehrenfest/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "ehrenfest/error.hpp"

namespace ehrenfest::propagator {

namespace {

constexpr cplx I{0.0, 1.0};

double euclid(std::span<const cplx> v) {
    double acc = 0.0;
    for (const auto& z : v) acc += std::norm(z);
    return std::sqrt(acc);
}

cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
    cplx acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) acc += std::conj(a[k]) * b[k];
    return acc;
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

void require_finite_state(std::span<const cplx> psi, double t) {
    for (const auto& z : psi)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            fail(Errc::numeric, "non-finite amplitude in state at t = " + std::to_string(t));
}

}  // namespace

std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::crank_nicolson: return "crank_nicolson";
        case Scheme::split_fourier: return "split_fourier";
        case Scheme::cayley4: return "cayley4";
    }
    return "unknown";
}

std::optional<Scheme> scheme_from_name(std::string_view name) {
    if (name == "crank_nicolson") return Scheme::crank_nicolson;
    if (name == "split_fourier") return Scheme::split_fourier;
    if (name == "cayley4") return Scheme::cayley4;
    return std::nullopt;
}

Stepper::Stepper(Observable hamiltonian, double dt, Scheme scheme, SolverOptions solver)
    : h_(std::move(hamiltonian)), dt_(dt), scheme_(scheme), solver_(solver), fft_(Fft::of_size(h_.grid().size())) {
    if (!(dt > 0.0) || !std::isfinite(dt)) fail(Errc::invalid_argument, "step: dt must be positive");
    const auto v = h_.multiplier();
    const auto t = h_.symbol();
    if (scheme_ == Scheme::split_fourier) {
        const std::size_t n = h_.grid().size();
        half_potential_phase_.assign(n, 1.0);
        kinetic_phase_.assign(n, 1.0);
        for (std::size_t k = 0; k < v.size(); ++k) half_potential_phase_[k] = std::polar(1.0, -0.5 * dt_ * v[k]);
        for (std::size_t m = 0; m < t.size(); ++m) kinetic_phase_[m] = std::polar(1.0, -dt_ * t[m]);
    } else {
        precondition_in_fourier_ = !t.empty() && (v.empty() || max_abs(v) <= max_abs(t));
    }
    if (scheme_ == Scheme::cayley4) {
        // Yoshida triple jump: g1 dt, g2 dt, g1 dt with 2 g1 + g2 = 1.
        const double c = std::cbrt(2.0);
        const double g1 = 1.0 / (2.0 - c);
        substeps_ = {g1 * dt_, -c * g1 * dt_, g1 * dt_};
    } else {
        substeps_ = {dt_};
    }
}

void Stepper::step(GridState& state) {
    if (state.amplitudes.size() != h_.grid().size()) fail(Errc::invalid_argument, "step: state has wrong length");
    if (scheme_ == Scheme::split_fourier) {
        step_split(state);
    } else {
        int total = 0;
        for (double sub : substeps_) {
            step_cn(state, sub);
            total += last_.iterations;
        }
        last_.iterations = total;
        max_seen_ = std::max(max_seen_, total);
    }
    state.time += dt_;
}

void Stepper::apply_system(std::span<const cplx> in, std::span<cplx> out, double tau) const {
    h_.apply(in, out);
    for (std::size_t k = 0; k < in.size(); ++k) out[k] = in[k] + I * tau * out[k];
}

void Stepper::precondition(std::span<const cplx> in, std::span<cplx> out, double tau) const {
    if (precondition_in_fourier_) {
        const auto t = h_.symbol();
        ComplexVector spec(in.size());
        fft_->forward(in, spec);
        for (std::size_t m = 0; m < spec.size(); ++m) spec[m] /= 1.0 + I * tau * t[m];
        fft_->inverse(spec, out);
    } else {
        const auto v = h_.multiplier();
        for (std::size_t k = 0; k < in.size(); ++k) out[k] = in[k] / (1.0 + I * tau * v[k]);
    }
}

void Stepper::step_cn(GridState& state, double dt) {
    const std::size_t n = state.amplitudes.size();
    const double tau = 0.5 * dt;
    const int m = std::max(1, solver_.restart);

    ComplexVector b(n), x(n), r(n), w(n), z(n);
    h_.apply(state.amplitudes, b);
    for (std::size_t k = 0; k < n; ++k) b[k] = state.amplitudes[k] - I * tau * b[k];
    const double bnorm = euclid(b);
    const double target = solver_.tolerance * bnorm;

    precondition(b, x, tau);
    auto true_residual = [&] {
        apply_system(x, r, tau);
        for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - r[k];
        return euclid(r);
    };
    double beta = true_residual();

    std::vector<ComplexVector> basis(static_cast<std::size_t>(m) + 1, ComplexVector(n));
    std::vector<std::vector<cplx>> hess(static_cast<std::size_t>(m) + 1, std::vector<cplx>(static_cast<std::size_t>(m)));
    std::vector<double> cs(static_cast<std::size_t>(m));
    std::vector<cplx> sn(static_cast<std::size_t>(m)), g(static_cast<std::size_t>(m) + 1);

    int iterations = 0;
    while (beta > target && iterations < solver_.max_iterations) {
        for (std::size_t k = 0; k < n; ++k) basis[0][k] = r[k] / beta;
        std::fill(g.begin(), g.end(), cplx(0.0));
        g[0] = beta;

        int cols = 0;
        for (int j = 0; j < m && iterations < solver_.max_iterations; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            precondition(basis[ju], z, tau);
            apply_system(z, w, tau);
            for (std::size_t i = 0; i <= ju; ++i) {
                hess[i][ju] = dot(basis[i], w);
                for (std::size_t k = 0; k < n; ++k) w[k] -= hess[i][ju] * basis[i][k];
            }
            const double hnext = euclid(w);
            hess[ju + 1][ju] = hnext;
            if (hnext > 0.0)
                for (std::size_t k = 0; k < n; ++k) basis[ju + 1][k] = w[k] / hnext;

            for (std::size_t i = 0; i < ju; ++i) {
                const cplx tmp = cs[i] * hess[i][ju] + sn[i] * hess[i + 1][ju];
                hess[i + 1][ju] = -std::conj(sn[i]) * hess[i][ju] + cs[i] * hess[i + 1][ju];
                hess[i][ju] = tmp;
            }
            const cplx a = hess[ju][ju];
            const double bmag = std::abs(hess[ju + 1][ju]);
            const double t = std::hypot(std::abs(a), bmag);
            if (std::abs(a) == 0.0) {
                cs[ju] = 0.0;
                sn[ju] = 1.0;
            } else {
                cs[ju] = std::abs(a) / t;
                sn[ju] = (a / std::abs(a)) * std::conj(hess[ju + 1][ju]) / t;
            }
            hess[ju][ju] = cs[ju] * a + sn[ju] * hess[ju + 1][ju];
            hess[ju + 1][ju] = 0.0;
            g[ju + 1] = -std::conj(sn[ju]) * g[ju];
            g[ju] = cs[ju] * g[ju];

            ++iterations;
            cols = j + 1;
            if (std::abs(g[ju + 1]) <= 0.5 * target || hnext == 0.0) break;
        }

        std::vector<cplx> y(static_cast<std::size_t>(cols));
        for (int i = cols - 1; i >= 0; --i) {
            const auto iu = static_cast<std::size_t>(i);
            cplx acc = g[iu];
            for (std::size_t k = iu + 1; k < static_cast<std::size_t>(cols); ++k) acc -= hess[iu][k] * y[k];
            y[iu] = acc / hess[iu][iu];
        }
        std::fill(w.begin(), w.end(), cplx(0.0));
        for (std::size_t i = 0; i < y.size(); ++i)
            for (std::size_t k = 0; k < n; ++k) w[k] += y[i] * basis[i][k];
        precondition(w, z, tau);
        for (std::size_t k = 0; k < n; ++k) x[k] += z[k];
        beta = true_residual();
    }

    last_ = {iterations, bnorm > 0.0 ? beta / bnorm : 0.0};
    if (beta > target)
        fail(Errc::solver, "Crank-Nicolson solve did not converge: relative residual " + sci(last_.residual) +
                               " after " + std::to_string(iterations) + " iterations");
    state.amplitudes = std::move(x);
}

void Stepper::step_split(GridState& state) {
    auto& psi = state.amplitudes;
    ComplexVector spec(psi.size());
    for (std::size_t k = 0; k < psi.size(); ++k) psi[k] *= half_potential_phase_[k];
    fft_->forward(psi, spec);
    for (std::size_t m = 0; m < spec.size(); ++m) spec[m] *= kinetic_phase_[m];
    fft_->inverse(spec, psi);
    for (std::size_t k = 0; k < psi.size(); ++k) psi[k] *= half_potential_phase_[k];
}

GridState step_crank_nicolson(const GridState& state, const Observable& hamiltonian, double dt,
                              const SolverOptions& solver) {
    GridState out = state;
    Stepper(hamiltonian, dt, Scheme::crank_nicolson, solver).step(out);
    return out;
}

GridState step_split_fourier(const GridState& state, const Observable& hamiltonian, double dt) {
    GridState out = state;
    Stepper(hamiltonian, dt, Scheme::split_fourier).step(out);
    return out;
}

double expectation(const GridState& state, const Observable& a) {
    const Grid& grid = a.grid();
    const auto a_psi = a.apply(state.amplitudes);
    const cplx q = inner(grid, state.amplitudes, a_psi);
    const double scale = norm(grid, state.amplitudes) * norm(grid, a_psi);
    if (std::abs(q.imag()) > 1e-10 * scale)
        fail(Errc::check_failed, "expectation of '" + a.name() + "' has imaginary part " + sci(q.imag()) +
                                     "; the observable is not hermitean on this state");
    return q.real();
}

double commutator_form(const Grid& grid, std::span<const cplx> h_psi, std::span<const cplx> a_psi) {
    const cplx d = inner(grid, h_psi, a_psi) - inner(grid, a_psi, h_psi);
    const double scale = norm(grid, h_psi) * norm(grid, a_psi);
    if (std::abs(d.real()) > 1e-10 * scale)
        fail(Errc::check_failed, "commutator form has real part " + sci(d.real()));
    return (I * d).real();
}

double commutator_form(const GridState& state, const Observable& h, const Observable& a) {
    return commutator_form(h.grid(), h.apply(state.amplitudes), a.apply(state.amplitudes));
}

std::vector<double> sampled_derivative(std::span<const double> f, double spacing, int order) {
    const std::size_t n = f.size();
    std::vector<double> d(n);
    if (order == 2) {
        if (n < 3) fail(Errc::invalid_argument, "second-order derivative needs at least 3 samples");
        const double s = 1.0 / (2.0 * spacing);
        d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * s;
        for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) * s;
        d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * s;
    } else if (order == 4) {
        if (n < 5) fail(Errc::invalid_argument, "fourth-order derivative needs at least 5 samples");
        const double s = 1.0 / (12.0 * spacing);
        d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) * s;
        d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) * s;
        for (std::size_t i = 2; i + 2 < n; ++i) d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) * s;
        d[n - 2] = (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5]) * s;
        d[n - 1] = (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4] + 3.0 * f[n - 5]) * s;
    } else {
        fail(Errc::invalid_argument, "derivative order must be 2 or 4");
    }
    return d;
}

double edge_mass(const Grid& grid, std::span<const cplx> psi) {
    const double cut = 0.4 * grid.length();
    double acc = 0.0;
    for (std::size_t k = 0; k < psi.size(); ++k)
        if (std::abs(grid.node(k)) > cut) acc += std::norm(psi[k]);
    return grid.spacing() * acc;
}

EhrenfestReport evolve_and_report(const GridState& initial, const Observable& hamiltonian,
                                  std::span<const Observable> observables, const EvolveOptions& options) {
    if (!(options.total_time > 0.0)) fail(Errc::invalid_argument, "evolve: T must be positive");
    if (!(options.dt > 0.0)) fail(Errc::invalid_argument, "evolve: dt must be positive");
    if (options.save_every < 1) fail(Errc::invalid_argument, "evolve: save_every must be >= 1");
    const Grid& grid = hamiltonian.grid();
    for (const auto& a : observables)
        if (!(a.grid() == grid)) fail(Errc::invalid_argument, "evolve: observable '" + a.name() + "' is on another grid");

    const auto steps = static_cast<long long>(std::llround(options.total_time / options.dt));
    const long long samples = steps / options.save_every + 1;
    if (samples < (options.derivative_order == 2 ? 3 : 5))
        fail(Errc::invalid_argument, "evolve: too few saved samples for the time derivative");

    EhrenfestReport rep;
    rep.scheme = options.scheme;
    rep.dt = options.dt;
    rep.save_every = options.save_every;
    rep.observables.resize(observables.size());
    for (std::size_t i = 0; i < observables.size(); ++i) rep.observables[i].name = observables[i].name();

    Stepper stepper(hamiltonian, options.dt, options.scheme, options.solver);
    GridState state = initial;
    ComplexVector h_psi(grid.size()), a_psi(grid.size());

    auto record = [&] {
        require_finite_state(state.amplitudes, state.time);
        const double edge = edge_mass(grid, state.amplitudes);
        rep.max_edge_mass = std::max(rep.max_edge_mass, edge);
        if (edge > options.wrap_threshold)
            fail(Errc::numeric, "wavefunction reached the box edge (mass " + sci(edge) + " in the outer 10%) at t = " +
                                    std::to_string(state.time));
        hamiltonian.apply(state.amplitudes, h_psi);
        rep.times.push_back(state.time);
        rep.norm.push_back(norm(grid, state.amplitudes));
        rep.energy.push_back(inner(grid, state.amplitudes, h_psi).real());
        for (std::size_t i = 0; i < observables.size(); ++i) {
            auto& s = rep.observables[i];
            observables[i].apply(state.amplitudes, a_psi);
            const cplx q = inner(grid, state.amplitudes, a_psi);
            const double a_norm = norm(grid, a_psi);
            if (std::abs(q.imag()) > 1e-10 * rep.norm.back() * a_norm)
                fail(Errc::check_failed, "expectation of '" + s.name + "' is not real");
            s.expectation.push_back(q.real());
            s.rhs.push_back(commutator_form(grid, h_psi, a_psi));
            s.a_norm.push_back(a_norm);
            s.sup_a_norm = std::max(s.sup_a_norm, a_norm);
            s.sup_running.push_back(s.sup_a_norm);
        }
    };

    // Use the exact saved time k * save_every * dt rather than the summed
    // step times.
    for (long long s = 0; s <= steps; ++s) {
        if (s % options.save_every == 0) {
            state.time = static_cast<double>(s) * options.dt;
            record();
        }
        if (s < steps) stepper.step(state);
    }
    rep.max_solver_iterations = stepper.max_iterations_seen();

    const double spacing = options.dt * options.save_every;
    for (auto& s : rep.observables) {
        s.lhs = sampled_derivative(s.expectation, spacing, options.derivative_order);
        s.residual.resize(s.lhs.size());
        for (std::size_t k = 0; k < s.lhs.size(); ++k) {
            s.residual[k] = s.lhs[k] - s.rhs[k];
            if (!std::isfinite(s.residual[k])) fail(Errc::numeric, "non-finite Ehrenfest residual for " + s.name);
            s.max_residual = std::max(s.max_residual, std::abs(s.residual[k]));
        }
    }
    const double e0 = rep.energy.front();
    for (std::size_t k = 0; k < rep.times.size(); ++k) {
        rep.norm_drift = std::max(rep.norm_drift, std::abs(rep.norm[k] - rep.norm.front()));
        const double de = std::abs(rep.energy[k] - e0);
        rep.energy_drift = std::max(rep.energy_drift, e0 != 0.0 ? de / std::abs(e0) : de);
    }
    return rep;
}

void write_csv(const EhrenfestReport& report, std::size_t observable, std::ostream& os) {
    const auto& s = report.observables.at(observable);
    os << "t,expectation,lhs,rhs,residual,norm,energy,sup_A_norm_running\n";
    char buf[64];
    auto put = [&](double v, char sep) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf << sep;
    };
    for (std::size_t k = 0; k < report.times.size(); ++k) {
        put(report.times[k], ',');
        put(s.expectation[k], ',');
        put(s.lhs[k], ',');
        put(s.rhs[k], ',');
        put(s.residual[k], ',');
        put(report.norm[k], ',');
        put(report.energy[k], ',');
        put(s.sup_running[k], '\n');
    }
}

}  // namespace ehrenfest::propagator
