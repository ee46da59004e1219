#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ehrenfest/grid.hpp"
#include "ehrenfest/observable.hpp"

// Discrete unitary evolution i d/dt psi = H psi and both sides of the
// Ehrenfest identity d/dt <A> = i <[H, A]>.
namespace ehrenfest::propagator {

// cayley4 composes three Crank-Nicolson steps of lengths g1 dt, g2 dt, g1 dt
// (Yoshida); every substep is a function of H, so it keeps the norm and <H>
// like plain Crank-Nicolson but is fourth order in dt.
enum class Scheme { crank_nicolson, split_fourier, cayley4 };

std::string to_string(Scheme s);
std::optional<Scheme> scheme_from_name(std::string_view name);

struct SolverOptions {
    double tolerance = 1e-14;  // relative residual of the linear solve
    int max_iterations = 300;
    int restart = 40;
};

struct SolveStats {
    int iterations = 0;
    double residual = 0.0;  // relative
};

// Time stepper for a fixed Hamiltonian and step. Crank-Nicolson solves
// (I + i dt H/2) psi+ = (I - i dt H/2) psi with right-preconditioned
// restarted GMRES; the preconditioner is whichever diagonal part of H
// (potential in x, kinetic in k) dominates, so the iteration contracts at
// rate <= dt/2 * max|other part|. Split-Fourier is Strang splitting
// e^{-i dt V/2} e^{-i dt T} e^{-i dt V/2}.
class Stepper {
public:
    Stepper(Observable hamiltonian, double dt, Scheme scheme, SolverOptions solver = {});

    /// Throws Error(solver) if GMRES does not reach the tolerance. For
    /// cayley4, last_solve().iterations is summed over the substeps.
    void step(GridState& state);
    const SolveStats& last_solve() const { return last_; }
    int max_iterations_seen() const { return max_seen_; }
    double dt() const { return dt_; }
    Scheme scheme() const { return scheme_; }

private:
    void step_cn(GridState& state, double dt);
    void step_split(GridState& state);
    void precondition(std::span<const cplx> in, std::span<cplx> out, double tau) const;
    void apply_system(std::span<const cplx> in, std::span<cplx> out, double tau) const;

    Observable h_;
    double dt_;
    Scheme scheme_;
    SolverOptions solver_;
    std::shared_ptr<const Fft> fft_;
    bool precondition_in_fourier_ = true;
    ComplexVector half_potential_phase_;  // split: exp(-i dt V / 2)
    ComplexVector kinetic_phase_;         // split: exp(-i dt T)
    std::vector<double> substeps_;
    SolveStats last_;
    int max_seen_ = 0;
};

GridState step_crank_nicolson(const GridState& state, const Observable& hamiltonian, double dt,
                              const SolverOptions& solver = {});
/// Uses the multiplication part of the Hamiltonian as V.
GridState step_split_fourier(const GridState& state, const Observable& hamiltonian, double dt);

/// Re <psi, A psi>; throws Error(check_failed) if the imaginary part exceeds
/// 1e-10 relative to ||psi|| ||A psi||.
double expectation(const GridState& state, const Observable& a);

/// i (<H psi, A psi> - <A psi, H psi>), real for hermitean H and A. Throws
/// Error(check_failed) if the difference has a real part above 1e-10
/// relative to ||H psi|| ||A psi||.
double commutator_form(const GridState& state, const Observable& h, const Observable& a);
double commutator_form(const Grid& grid, std::span<const cplx> h_psi, std::span<const cplx> a_psi);

/// Derivative of uniformly spaced samples. order 2: centered interior,
/// one-sided three-point ends. order 4: five-point centered interior,
/// one-sided five-point at the first/last two samples.
std::vector<double> sampled_derivative(std::span<const double> f, double spacing, int order);

struct EvolveOptions {
    double total_time = 6.4;
    double dt = 1e-3;
    int save_every = 10;
    Scheme scheme = Scheme::crank_nicolson;
    int derivative_order = 4;
    SolverOptions solver;
    double wrap_threshold = 1e-8;  // max mass in the outer 10% of the box
};

struct ObservableSeries {
    std::string name;
    std::vector<double> expectation;
    std::vector<double> lhs;  // d<A>/dt from the samples
    std::vector<double> rhs;  // commutator form
    std::vector<double> residual;
    std::vector<double> a_norm;      // ||A psi(t)||
    std::vector<double> sup_running; // running max of a_norm
    double max_residual = 0.0;
    double sup_a_norm = 0.0;
};

struct EhrenfestReport {
    std::vector<double> times;
    std::vector<double> norm;
    std::vector<double> energy;
    std::vector<ObservableSeries> observables;
    double norm_drift = 0.0;    // max |norm(t) - norm(0)|
    double energy_drift = 0.0;  // max |E(t) - E(0)| / |E(0)|
    double max_edge_mass = 0.0;
    int max_solver_iterations = 0;
    Scheme scheme = Scheme::crank_nicolson;
    double dt = 0.0;
    int save_every = 1;
};

/// Throws Error(numeric) on NaN or when mass reaches the box edge, and
/// Error(invalid_argument) on bad options.
EhrenfestReport evolve_and_report(const GridState& initial, const Observable& hamiltonian,
                                  std::span<const Observable> observables, const EvolveOptions& options);

/// Mass in |x| > 0.4 L.
double edge_mass(const Grid& grid, std::span<const cplx> psi);

/// Header t,expectation,lhs,rhs,residual,norm,energy,sup_A_norm_running;
/// 17 significant digits.
void write_csv(const EhrenfestReport& report, std::size_t observable, std::ostream& os);

}  // namespace ehrenfest::propagator
