#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace ehrenfest::propagator {

using cplx = std::complex<double>;
using ComplexVector = std::vector<cplx>;

/// Uniform periodic grid on [-L/2, L/2) with n nodes, n a power of two >= 16.
class Grid {
public:
    Grid(double length, std::size_t nodes);

    double length() const { return length_; }
    std::size_t size() const { return n_; }
    double spacing() const { return length_ / static_cast<double>(n_); }
    double node(std::size_t k) const { return -0.5 * length_ + static_cast<double>(k) * spacing(); }
    std::vector<double> nodes() const;

    /// Angular wavenumber of Fourier index m in transform order. The Nyquist
    /// index maps to -pi n / L.
    double wavenumber(std::size_t m) const;
    std::size_t nyquist() const { return n_ / 2; }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    double length_;
    std::size_t n_;
};

struct GridState {
    ComplexVector amplitudes;
    double time = 0.0;
};

/// h * sum conj(a_k) b_k
cplx inner(const Grid& grid, std::span<const cplx> a, std::span<const cplx> b);
double norm(const Grid& grid, std::span<const cplx> a);
/// sqrt(h * sum |a_k - b_k|^2)
double distance(const Grid& grid, std::span<const cplx> a, std::span<const cplx> b);

/// psi(x) ~ exp(-(x - x0)^2 / (2 sigma^2) + i p0 x), normalized on the grid.
GridState gaussian(const Grid& grid, double x0, double p0, double sigma);
/// exp(i 2 pi m x / L), normalized on the grid.
GridState plane_wave(const Grid& grid, long m);

// Forward (unnormalized) and inverse (1/n) complex DFT of one size. Plans
// are immutable after construction and executed through the new-array
// interface, so one instance may be shared by concurrent callers. Input and
// output must not alias.
class Fft {
public:
    static std::shared_ptr<const Fft> of_size(std::size_t n);

    explicit Fft(std::size_t n);
    ~Fft();
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    std::size_t size() const { return n_; }
    void forward(std::span<const cplx> in, std::span<cplx> out) const;
    void inverse(std::span<const cplx> in, std::span<cplx> out) const;

private:
    std::size_t n_;
    void* forward_plan_;
    void* inverse_plan_;
};

}  // namespace ehrenfest::propagator
