#include "ehrenfest/grid.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "ehrenfest/error.hpp"

namespace ehrenfest::propagator {

namespace {

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

fftw_complex* as_fftw(const cplx* p) { return reinterpret_cast<fftw_complex*>(const_cast<cplx*>(p)); }

void normalize(const Grid& grid, ComplexVector& v) {
    const double nrm = norm(grid, v);
    if (!(nrm > 0.0) || !std::isfinite(nrm)) fail(Errc::numeric, "cannot normalize a zero or non-finite state");
    for (auto& z : v) z /= nrm;
}

}  // namespace

Grid::Grid(double length, std::size_t nodes) : length_(length), n_(nodes) {
    if (!(length > 0.0) || !std::isfinite(length)) fail(Errc::invalid_argument, "grid: length must be positive");
    if (nodes < 16 || (nodes & (nodes - 1)) != 0)
        fail(Errc::invalid_argument, "grid: node count must be a power of two >= 16");
}

std::vector<double> Grid::nodes() const {
    std::vector<double> x(n_);
    for (std::size_t k = 0; k < n_; ++k) x[k] = node(k);
    return x;
}

double Grid::wavenumber(std::size_t m) const {
    const auto n = static_cast<long>(n_);
    long idx = static_cast<long>(m);
    if (idx >= n / 2) idx -= n;
    return 2.0 * std::numbers::pi * static_cast<double>(idx) / length_;
}

cplx inner(const Grid& grid, std::span<const cplx> a, std::span<const cplx> b) {
    cplx acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) acc += std::conj(a[k]) * b[k];
    return grid.spacing() * acc;
}

double norm(const Grid& grid, std::span<const cplx> a) {
    double acc = 0.0;
    for (const auto& z : a) acc += std::norm(z);
    return std::sqrt(grid.spacing() * acc);
}

double distance(const Grid& grid, std::span<const cplx> a, std::span<const cplx> b) {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) acc += std::norm(a[k] - b[k]);
    return std::sqrt(grid.spacing() * acc);
}

GridState gaussian(const Grid& grid, double x0, double p0, double sigma) {
    if (!(sigma > 0.0)) fail(Errc::invalid_argument, "gaussian: sigma must be positive");
    GridState s;
    s.amplitudes.resize(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double x = grid.node(k);
        const double d = (x - x0) / sigma;
        s.amplitudes[k] = std::exp(-0.5 * d * d) * std::polar(1.0, p0 * x);
    }
    normalize(grid, s.amplitudes);
    return s;
}

GridState plane_wave(const Grid& grid, long m) {
    GridState s;
    s.amplitudes.resize(grid.size());
    const double k = 2.0 * std::numbers::pi * static_cast<double>(m) / grid.length();
    for (std::size_t j = 0; j < grid.size(); ++j) s.amplitudes[j] = std::polar(1.0, k * grid.node(j));
    normalize(grid, s.amplitudes);
    return s;
}

std::shared_ptr<const Fft> Fft::of_size(std::size_t n) {
    static std::mutex cache_mutex;
    static std::map<std::size_t, std::shared_ptr<const Fft>> cache;
    std::lock_guard lock(cache_mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_shared<const Fft>(n);
    return slot;
}

Fft::Fft(std::size_t n) : n_(n) {
    ComplexVector a(n), b(n);
    std::lock_guard lock(planner_mutex());
    const int size = static_cast<int>(n);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_plan_ = fftw_plan_dft_1d(size, as_fftw(a.data()), as_fftw(b.data()), FFTW_FORWARD, flags);
    inverse_plan_ = fftw_plan_dft_1d(size, as_fftw(a.data()), as_fftw(b.data()), FFTW_BACKWARD, flags);
    if (!forward_plan_ || !inverse_plan_) fail(Errc::numeric, "FFTW planning failed");
}

Fft::~Fft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
    fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

void Fft::forward(std::span<const cplx> in, std::span<cplx> out) const {
    fftw_execute_dft(static_cast<fftw_plan>(forward_plan_), as_fftw(in.data()), as_fftw(out.data()));
}

void Fft::inverse(std::span<const cplx> in, std::span<cplx> out) const {
    fftw_execute_dft(static_cast<fftw_plan>(inverse_plan_), as_fftw(in.data()), as_fftw(out.data()));
    const double scale = 1.0 / static_cast<double>(n_);
    for (auto& z : out) z *= scale;
}

}  // namespace ehrenfest::propagator
