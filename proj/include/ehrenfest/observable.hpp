#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ehrenfest/grid.hpp"

namespace ehrenfest::propagator {

/// Named potential V(x). Units: mass = hbar = 1, H = p^2/2 + V.
struct Potential {
    enum class Kind { free, harmonic, quartic, barrier, custom };

    Kind kind = Kind::free;
    double omega = 1.0;     // harmonic: omega^2 x^2 / 2
    double coupling = 1.0;  // quartic: coupling x^4 / 4
    double height = 1.0;    // barrier: height exp(-(x - center)^2 / (2 width^2))
    double width = 1.0;
    double center = 0.0;
    std::function<double(double)> custom_fn;  // Kind::custom only

    static Potential free() { return {}; }
    static Potential harmonic(double omega = 1.0);
    static Potential quartic(double coupling = 1.0);
    static Potential barrier(double height = 1.0, double width = 1.0, double center = 0.0);
    static Potential custom(std::function<double(double)> fn);
    /// "free" | "harmonic" | "quartic" | "barrier"
    static std::optional<Kind> kind_from_name(std::string_view name);

    std::string name() const;
    double operator()(double x) const;
};

std::vector<double> sample(const Grid& grid, const Potential& v);

/// Spectral derivative of real nodal values (Nyquist mode dropped).
std::vector<double> spectral_derivative(const Grid& grid, std::span<const double> values);

// A hermitean operator on the periodic grid, stored as the sum of a
// multiplication part (real nodal values), a Fourier multiplier (real
// symbol) and an optional rank-one projector |v><v|. Every shipped
// observable is one of these shapes, which keeps discrete hermiticity exact
// up to roundoff. Cheap to copy; shares its immutable data.
class Observable {
public:
    enum class Kind { identity, position, momentum, kinetic, potential, hamiltonian, projector, multiplication };

    Kind kind() const { return data_->kind; }
    const std::string& name() const { return data_->name; }
    const Grid& grid() const { return data_->grid; }

    /// Position-space part; empty when absent.
    std::span<const double> multiplier() const { return data_->multiplier; }
    /// Fourier symbol in transform order; empty when absent.
    std::span<const double> symbol() const { return data_->symbol; }

    /// out = A in. in and out must not alias.
    void apply(std::span<const cplx> in, std::span<cplx> out) const;
    ComplexVector apply(std::span<const cplx> in) const;
    GridState apply(const GridState& s) const;

    static Observable identity(const Grid& grid);
    static Observable position(const Grid& grid);
    /// -i d/dx via Fourier differentiation.
    static Observable momentum(const Grid& grid);
    /// p^2 / 2
    static Observable kinetic(const Grid& grid);
    static Observable potential_energy(const Grid& grid, const Potential& v);
    static Observable multiplication(const Grid& grid, std::string name, std::vector<double> values);
    /// |v><v| with the grid inner product; v is normalized first.
    static Observable projector(const Grid& grid, std::string name, ComplexVector v);

private:
    struct Data {
        Kind kind;
        std::string name;
        Grid grid;
        std::vector<double> multiplier;
        std::vector<double> symbol;
        ComplexVector projector;
        std::shared_ptr<const Fft> fft;
    };
    explicit Observable(std::shared_ptr<const Data> d) : data_(std::move(d)) {}
    friend Observable make_hamiltonian(const Grid& grid, const Potential& v);
    friend Observable make_hamiltonian(const Grid& grid, std::string name, std::vector<double> potential_values);

    std::shared_ptr<const Data> data_;
};

/// H = -1/2 d^2/dx^2 (spectral) + V. Throws Error(invalid_argument) when V
/// is not finite at some node.
Observable make_hamiltonian(const Grid& grid, const Potential& v);
Observable make_hamiltonian(const Grid& grid, std::string name, std::vector<double> potential_values);

/// Observable by short name: identity | x | p | kinetic | potential | H.
Observable observable_by_name(std::string_view name, const Grid& grid, const Potential& v);

}  // namespace ehrenfest::propagator
