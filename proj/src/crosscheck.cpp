#include "ehrenfest/crosscheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ehrenfest/error.hpp"

namespace ehrenfest::crosscheck {

namespace {

struct Sampled {
    std::size_t first = 0;  // node index of values[0]
    std::vector<double> values;
};

std::size_t first_node_at_or_after(const Grid& g, double x) {
    return static_cast<std::size_t>(std::max(0.0, std::ceil((x + 0.5 * g.length()) / g.spacing())));
}

Sampled sample_pwl(const Grid& g, const exact::PiecewiseLinear& f) {
    Sampled s;
    const auto& bp = f.breakpoints();
    if (bp.empty()) return s;
    std::vector<double> x, y;
    for (const auto& p : bp) {
        x.push_back(p.x.to_double());
        y.push_back(p.y.to_double());
    }
    s.first = first_node_at_or_after(g, x.front());
    std::size_t seg = 0;
    for (std::size_t k = s.first; k < g.size(); ++k) {
        const double xk = g.node(k);
        if (xk > x.back()) break;
        while (seg + 2 < x.size() && xk > x[seg + 1]) ++seg;
        const double w = (xk - x[seg]) / (x[seg + 1] - x[seg]);
        s.values.push_back(y[seg] + w * (y[seg + 1] - y[seg]));
    }
    return s;
}

double tent(double x, double t) { return std::max(0.0, 1.0 - std::abs(x - t - 1.0)); }

}  // namespace

Report counterexample_crosscheck(const CounterexampleSystem& system, const Grid& grid,
                                 std::span<const BigRational> times) {
    const double h = grid.spacing();
    if (grid.node(0) > -1.0 || grid.node(grid.size() - 1) < 4.0)
        fail(Errc::invalid_argument, "crosscheck: grid must cover [-1, 4] (length > 8)");
    for (const auto& b : system.bumps()) {
        const double across = 2.0 * b.spec.eta.to_double() / h;
        if (across < min_nodes_per_bump)
            fail(Errc::invalid_argument,
                 "crosscheck: grid too coarse: bump " + std::to_string(b.j) + " spans " + std::to_string(across) +
                     " spacings across 2 eta, need at least " + std::to_string(static_cast<int>(min_nodes_per_bump)) +
                     "; increase n");
    }

    std::vector<Sampled> phis;
    std::vector<double> weights, norms;
    for (const auto& b : system.bumps()) {
        phis.push_back(sample_pwl(grid, b.phi));
        double acc = 0.0;
        for (double v : phis.back().values) acc += v * v;
        norms.push_back(h * acc);
        weights.push_back(b.weight.to_double());
    }

    Report rep;
    rep.spacing = h;
    rep.nodes = grid.size();
    for (const auto& t : times) {
        Sample s;
        s.t = t;
        s.exact = counterexample::expectation_A(system, t).to_double();
        s.resonant = counterexample::resonant_bump(system, t);
        const double td = t.to_double();
        double value = 0.0;
        for (std::size_t j = 0; j < phis.size(); ++j) {
            double ov = 0.0;
            for (std::size_t i = 0; i < phis[j].values.size(); ++i)
                ov += phis[j].values[i] * tent(grid.node(phis[j].first + i), td);
            ov *= h;
            value += weights[j] * ov * ov / norms[j];
        }
        s.discrete = value;
        s.gap = std::abs(value - s.exact);
        if (s.resonant && s.exact != 0.0)
            rep.max_resonant_relative_gap = std::max(rep.max_resonant_relative_gap, s.gap / std::abs(s.exact));
        if (s.exact == 0.0) rep.max_nonresonant_gap = std::max(rep.max_nonresonant_gap, s.gap);
        rep.samples.push_back(std::move(s));
    }
    return rep;
}

std::vector<BigRational> default_times(const CounterexampleSystem& system) {
    std::vector<BigRational> out;
    const auto cert = counterexample::unboundedness_certificate(system);
    for (const auto& row : cert.rows) out.push_back(row.t_j);
    for (const auto& row : cert.rows) out.push_back(row.witness_zero_t);
    BigRational lowest(1);
    for (const auto& b : system.bumps()) lowest = std::min(lowest, b.spec.interval.left);
    for (const auto& t : {BigRational(3, 4), BigRational(7, 8), lowest / BigRational(2)})
        if (!counterexample::resonant_bump(system, t)) out.push_back(t);
    return out;
}

std::vector<double> refinement_ratios(const Report& coarse, const Report& fine) {
    if (coarse.samples.size() != fine.samples.size())
        fail(Errc::invalid_argument, "refinement_ratios: reports carry different samples");
    std::vector<double> out;
    for (std::size_t i = 0; i < coarse.samples.size(); ++i) {
        if (!(coarse.samples[i].t == fine.samples[i].t))
            fail(Errc::invalid_argument, "refinement_ratios: reports carry different samples");
        if (!coarse.samples[i].resonant || coarse.samples[i].exact == 0.0) continue;
        out.push_back(fine.samples[i].gap > 0.0 ? coarse.samples[i].gap / fine.samples[i].gap
                                                : std::numeric_limits<double>::infinity());
    }
    return out;
}

}  // namespace ehrenfest::crosscheck
