#pragma once

// Test-only oracles. Nothing here calls into the code paths it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "ehrenfest/pwlin.hpp"

namespace oracle {

using ehrenfest::exact::BigRational;
using ehrenfest::exact::Breakpoint;
using ehrenfest::exact::PiecewiseLinear;

struct DoublePwl {
    std::vector<double> x, y;
    double operator()(double t) const {
        if (x.empty() || t <= x.front() || t >= x.back()) return 0.0;
        const auto it = std::upper_bound(x.begin(), x.end(), t);
        const std::size_t k = static_cast<std::size_t>(it - x.begin());
        const double w = (t - x[k - 1]) / (x[k] - x[k - 1]);
        return y[k - 1] + w * (y[k] - y[k - 1]);
    }
};

inline DoublePwl to_double(const PiecewiseLinear& f) {
    DoublePwl d;
    for (const auto& p : f.breakpoints()) {
        d.x.push_back(p.x.to_double());
        d.y.push_back(p.y.to_double());
    }
    return d;
}

// Composite Simpson on the mesh refined by both breakpoint sets; each
// sub-interval carries a quadratic integrand, so this is exact up to roundoff.
inline double simpson_inner(const PiecewiseLinear& f, const PiecewiseLinear& g) {
    const auto df = to_double(f), dg = to_double(g);
    std::vector<double> xs = df.x;
    xs.insert(xs.end(), dg.x.begin(), dg.x.end());
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
        const double a = xs[k], b = xs[k + 1], m = 0.5 * (a + b);
        // Evaluate just inside the piece so kinks at a or b do not matter.
        const double eps = 1e-15 * (b - a);
        const double fa = df(a + eps) * dg(a + eps), fb = df(b - eps) * dg(b - eps);
        acc += (b - a) / 6.0 * (fa + 4.0 * df(m) * dg(m) + fb);
    }
    return acc;
}

// Random canonical-or-not piecewise-linear function with denominators <= max_den.
inline PiecewiseLinear random_pwl(std::mt19937_64& rng, int max_den = 64, int max_points = 8) {
    std::uniform_int_distribution<int> count(3, max_points);
    std::uniform_int_distribution<std::int64_t> den(1, max_den);
    std::uniform_int_distribution<std::int64_t> step(1, 40);
    std::uniform_int_distribution<std::int64_t> val(-40, 40);
    const int n = count(rng);
    std::vector<Breakpoint> pts;
    BigRational x(std::uniform_int_distribution<std::int64_t>(-50, 50)(rng), den(rng));
    for (int i = 0; i < n; ++i) {
        const bool end = i == 0 || i == n - 1;
        pts.push_back({x, end ? BigRational(0) : BigRational(val(rng), den(rng))});
        x += BigRational(step(rng), den(rng));
    }
    return PiecewiseLinear(std::move(pts));
}

inline BigRational random_rational(std::mt19937_64& rng, int max_den = 64, int range = 4) {
    const std::int64_t q = std::uniform_int_distribution<std::int64_t>(1, max_den)(rng);
    return BigRational(std::uniform_int_distribution<std::int64_t>(-range * q, range * q)(rng), q);
}

}  // namespace oracle
