#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ehrenfest/counterexample.hpp"
#include "ehrenfest/grid.hpp"

// Floating-point shadow of the exact counterexample: psi(t) and the bumps
// phi_j are sampled on a periodic grid and <psi(t), A psi(t)> is evaluated
// with the grid inner product, then compared with the exact rational value.
namespace ehrenfest::crosscheck {

using counterexample::CounterexampleSystem;
using exact::BigRational;
using propagator::Grid;

struct Sample {
    BigRational t;
    double exact = 0.0;     // exact rational expectation, rounded
    double discrete = 0.0;  // grid expectation
    double gap = 0.0;       // |discrete - exact|
    std::optional<int> resonant;  // bump j with frac(t) in I_j
};

struct Report {
    double spacing = 0.0;
    std::size_t nodes = 0;
    std::vector<Sample> samples;
    double max_resonant_relative_gap = 0.0;  // max gap / exact over resonant samples
    double max_nonresonant_gap = 0.0;
};

/// Minimum number of grid spacings across 2 eta_j for every bump.
inline constexpr double min_nodes_per_bump = 8.0;

/// Throws Error(invalid_argument) when the grid does not cover [-1, 4] or
/// some bump has 2 eta_j < 8 h ("grid too coarse").
Report counterexample_crosscheck(const CounterexampleSystem& system, const Grid& grid,
                                 std::span<const BigRational> times);

/// Resonance times t_j, the zero-expectation witnesses, and the midpoints
/// between consecutive intervals (outside every I_k + Z).
std::vector<BigRational> default_times(const CounterexampleSystem& system);

/// gap(coarse) / gap(fine) per resonant sample; coarse and fine must carry
/// the same times.
std::vector<double> refinement_ratios(const Report& coarse, const Report& fine);

}  // namespace ehrenfest::crosscheck
