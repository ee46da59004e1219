#include "ehrenfest/observable.hpp"

#include <cmath>

#include "ehrenfest/error.hpp"

namespace ehrenfest::propagator {

Potential Potential::harmonic(double omega) {
    Potential v;
    v.kind = Kind::harmonic;
    v.omega = omega;
    return v;
}

Potential Potential::quartic(double coupling) {
    Potential v;
    v.kind = Kind::quartic;
    v.coupling = coupling;
    return v;
}

Potential Potential::barrier(double height, double width, double center) {
    if (!(width > 0.0)) fail(Errc::invalid_argument, "barrier: width must be positive");
    Potential v;
    v.kind = Kind::barrier;
    v.height = height;
    v.width = width;
    v.center = center;
    return v;
}

Potential Potential::custom(std::function<double(double)> fn) {
    Potential v;
    v.kind = Kind::custom;
    v.custom_fn = std::move(fn);
    return v;
}

std::optional<Potential::Kind> Potential::kind_from_name(std::string_view name) {
    if (name == "free") return Kind::free;
    if (name == "harmonic") return Kind::harmonic;
    if (name == "quartic") return Kind::quartic;
    if (name == "barrier") return Kind::barrier;
    return std::nullopt;
}

std::string Potential::name() const {
    switch (kind) {
        case Kind::free: return "free";
        case Kind::harmonic: return "harmonic";
        case Kind::quartic: return "quartic";
        case Kind::barrier: return "barrier";
        case Kind::custom: return "custom";
    }
    return "unknown";
}

double Potential::operator()(double x) const {
    switch (kind) {
        case Kind::free: return 0.0;
        case Kind::harmonic: return 0.5 * omega * omega * x * x;
        case Kind::quartic: return 0.25 * coupling * x * x * x * x;
        case Kind::barrier: {
            const double d = (x - center) / width;
            return height * std::exp(-0.5 * d * d);
        }
        case Kind::custom: return custom_fn ? custom_fn(x) : 0.0;
    }
    return 0.0;
}

std::vector<double> sample(const Grid& grid, const Potential& v) {
    std::vector<double> out(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) out[k] = v(grid.node(k));
    return out;
}

std::vector<double> spectral_derivative(const Grid& grid, std::span<const double> values) {
    const auto fft = Fft::of_size(grid.size());
    ComplexVector a(values.begin(), values.end()), b(grid.size());
    fft->forward(a, b);
    for (std::size_t m = 0; m < grid.size(); ++m)
        b[m] *= m == grid.nyquist() ? cplx(0.0) : cplx(0.0, grid.wavenumber(m));
    fft->inverse(b, a);
    std::vector<double> out(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) out[k] = a[k].real();
    return out;
}

void Observable::apply(std::span<const cplx> in, std::span<cplx> out) const {
    const Data& d = *data_;
    const std::size_t n = d.grid.size();
    if (in.size() != n || out.size() != n) fail(Errc::invalid_argument, "observable: state has wrong length");

    if (!d.symbol.empty()) {
        ComplexVector spec(n);
        d.fft->forward(in, spec);
        for (std::size_t m = 0; m < n; ++m) spec[m] *= d.symbol[m];
        d.fft->inverse(spec, out);
    } else {
        for (auto& z : out) z = 0.0;
    }
    if (!d.multiplier.empty())
        for (std::size_t k = 0; k < n; ++k) out[k] += d.multiplier[k] * in[k];
    if (!d.projector.empty()) {
        const cplx c = inner(d.grid, d.projector, in);
        for (std::size_t k = 0; k < n; ++k) out[k] += c * d.projector[k];
    }
}

ComplexVector Observable::apply(std::span<const cplx> in) const {
    ComplexVector out(in.size());
    apply(in, out);
    return out;
}

GridState Observable::apply(const GridState& s) const { return {apply(s.amplitudes), s.time}; }

namespace {

template <typename Fn>
std::vector<double> symbol_from(const Grid& grid, Fn fn) {
    std::vector<double> s(grid.size());
    for (std::size_t m = 0; m < grid.size(); ++m) s[m] = fn(m);
    return s;
}

std::vector<double> kinetic_symbol(const Grid& grid) {
    return symbol_from(grid, [&](std::size_t m) {
        const double k = grid.wavenumber(m);
        return 0.5 * k * k;
    });
}

void require_finite(std::span<const double> values, const std::string& what) {
    for (std::size_t k = 0; k < values.size(); ++k)
        if (!std::isfinite(values[k]))
            fail(Errc::invalid_argument, what + ": non-finite value at node " + std::to_string(k));
}

}  // namespace

Observable Observable::identity(const Grid& grid) {
    return Observable(std::make_shared<const Data>(
        Data{Kind::identity, "identity", grid, std::vector<double>(grid.size(), 1.0), {}, {}, nullptr}));
}

Observable Observable::position(const Grid& grid) {
    return Observable(std::make_shared<const Data>(Data{Kind::position, "x", grid, grid.nodes(), {}, {}, nullptr}));
}

Observable Observable::momentum(const Grid& grid) {
    auto sym = symbol_from(grid, [&](std::size_t m) { return m == grid.nyquist() ? 0.0 : grid.wavenumber(m); });
    return Observable(std::make_shared<const Data>(
        Data{Kind::momentum, "p", grid, {}, std::move(sym), {}, Fft::of_size(grid.size())}));
}

Observable Observable::kinetic(const Grid& grid) {
    return Observable(std::make_shared<const Data>(
        Data{Kind::kinetic, "kinetic", grid, {}, kinetic_symbol(grid), {}, Fft::of_size(grid.size())}));
}

Observable Observable::potential_energy(const Grid& grid, const Potential& v) {
    auto values = sample(grid, v);
    require_finite(values, "potential");
    return Observable(
        std::make_shared<const Data>(Data{Kind::potential, "potential", grid, std::move(values), {}, {}, nullptr}));
}

Observable Observable::multiplication(const Grid& grid, std::string name, std::vector<double> values) {
    if (values.size() != grid.size()) fail(Errc::invalid_argument, "multiplication: wrong length");
    require_finite(values, "multiplication");
    return Observable(std::make_shared<const Data>(
        Data{Kind::multiplication, std::move(name), grid, std::move(values), {}, {}, nullptr}));
}

Observable Observable::projector(const Grid& grid, std::string name, ComplexVector v) {
    if (v.size() != grid.size()) fail(Errc::invalid_argument, "projector: wrong length");
    const double nrm = norm(grid, v);
    if (!(nrm > 0.0) || !std::isfinite(nrm)) fail(Errc::invalid_argument, "projector: vector must be nonzero");
    for (auto& z : v) z /= nrm;
    return Observable(
        std::make_shared<const Data>(Data{Kind::projector, std::move(name), grid, {}, {}, std::move(v), nullptr}));
}

Observable make_hamiltonian(const Grid& grid, std::string name, std::vector<double> potential_values) {
    if (potential_values.size() != grid.size()) fail(Errc::invalid_argument, "hamiltonian: wrong potential length");
    require_finite(potential_values, "potential");
    return Observable(std::make_shared<const Observable::Data>(
        Observable::Data{Observable::Kind::hamiltonian, std::move(name), grid, std::move(potential_values),
                         kinetic_symbol(grid), {}, Fft::of_size(grid.size())}));
}

Observable make_hamiltonian(const Grid& grid, const Potential& v) { return make_hamiltonian(grid, "H", sample(grid, v)); }

Observable observable_by_name(std::string_view name, const Grid& grid, const Potential& v) {
    if (name == "identity") return Observable::identity(grid);
    if (name == "x") return Observable::position(grid);
    if (name == "p") return Observable::momentum(grid);
    if (name == "kinetic") return Observable::kinetic(grid);
    if (name == "potential") return Observable::potential_energy(grid, v);
    if (name == "H") return make_hamiltonian(grid, v);
    fail(Errc::invalid_argument, "unknown observable '" + std::string(name) + "'");
}

}  // namespace ehrenfest::propagator
