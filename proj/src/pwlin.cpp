#include "ehrenfest/pwlin.hpp"

#include <algorithm>
#include <sstream>

#include "ehrenfest/error.hpp"

namespace ehrenfest::exact {

namespace {

bool collinear(const Breakpoint& a, const Breakpoint& b, const Breakpoint& c) {
    return (b.y - a.y) * (c.x - b.x) == (c.y - b.y) * (b.x - a.x);
}

// Value of f at x given the index of the first breakpoint with abscissa >= x.
BigRational value_at(std::span<const Breakpoint> pts, std::size_t upper, const BigRational& x) {
    if (upper == pts.size() || upper == 0) {
        if (upper < pts.size() && pts[upper].x == x) return pts[upper].y;
        return BigRational(0);
    }
    const Breakpoint& hi = pts[upper];
    if (hi.x == x) return hi.y;
    const Breakpoint& lo = pts[upper - 1];
    return lo.y + (hi.y - lo.y) * (x - lo.x) / (hi.x - lo.x);
}

// Sorted, deduplicated union of all abscissae.
std::vector<BigRational> merged_abscissae(std::span<const PiecewiseLinear> fs) {
    std::vector<BigRational> xs;
    for (const auto& f : fs)
        for (const auto& p : f.breakpoints()) xs.push_back(p.x);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
}

// Values of f on an increasing list of abscissae, in one merge pass.
std::vector<BigRational> sample_sorted(const PiecewiseLinear& f, std::span<const BigRational> xs) {
    const auto pts = f.breakpoints();
    std::vector<BigRational> out;
    out.reserve(xs.size());
    std::size_t upper = 0;
    for (const auto& x : xs) {
        while (upper < pts.size() && pts[upper].x < x) ++upper;
        out.push_back(value_at(pts, upper, x));
    }
    return out;
}

}  // namespace

std::vector<Breakpoint> canonicalize(std::vector<Breakpoint> points) {
    std::vector<Breakpoint> out;
    out.reserve(points.size());
    for (auto& p : points) {
        while (out.size() >= 2 && collinear(out[out.size() - 2], out.back(), p)) out.pop_back();
        out.push_back(std::move(p));
    }
    if (out.size() >= 2 && out[0].y.is_zero() && out[1].y.is_zero()) out.erase(out.begin());
    if (out.size() >= 2 && out[out.size() - 1].y.is_zero() && out[out.size() - 2].y.is_zero()) out.pop_back();
    if (std::all_of(out.begin(), out.end(), [](const Breakpoint& b) { return b.y.is_zero(); })) out.clear();
    return out;
}

PiecewiseLinear::PiecewiseLinear(std::vector<Breakpoint> points) {
    for (std::size_t i = 1; i < points.size(); ++i)
        if (!(points[i - 1].x < points[i].x))
            fail(Errc::invalid_argument, "PiecewiseLinear: breakpoints must be strictly increasing");
    if (!points.empty() && (!points.front().y.is_zero() || !points.back().y.is_zero()))
        fail(Errc::invalid_argument, "PiecewiseLinear: first and last values must be 0");
    points_ = canonicalize(std::move(points));
}

PiecewiseLinear tent_psi0() {
    return PiecewiseLinear({{BigRational(0), BigRational(0)}, {BigRational(1), BigRational(1)},
                            {BigRational(2), BigRational(0)}});
}

PiecewiseLinear translate(const PiecewiseLinear& f, const BigRational& t) {
    std::vector<Breakpoint> pts(f.breakpoints().begin(), f.breakpoints().end());
    for (auto& p : pts) p.x += t;
    return PiecewiseLinear(std::move(pts));
}

PiecewiseLinear combine(std::span<const BigRational> coeffs, std::span<const PiecewiseLinear> fs) {
    if (coeffs.size() != fs.size() || fs.empty())
        fail(Errc::invalid_argument, "combine: coefficient and function lists must have equal nonzero length");
    const auto xs = merged_abscissae(fs);
    std::vector<BigRational> ys(xs.size(), BigRational(0));
    for (std::size_t i = 0; i < fs.size(); ++i) {
        if (coeffs[i].is_zero()) continue;
        const auto vals = sample_sorted(fs[i], xs);
        for (std::size_t k = 0; k < xs.size(); ++k) ys[k] += coeffs[i] * vals[k];
    }
    std::vector<Breakpoint> pts;
    pts.reserve(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k) pts.push_back({xs[k], std::move(ys[k])});
    return PiecewiseLinear(std::move(pts));
}

BigRational evaluate(const PiecewiseLinear& f, const BigRational& x) {
    const auto pts = f.breakpoints();
    const auto it = std::lower_bound(pts.begin(), pts.end(), x,
                                     [](const Breakpoint& b, const BigRational& v) { return b.x < v; });
    return value_at(pts, static_cast<std::size_t>(it - pts.begin()), x);
}

BigRational inner_product(const PiecewiseLinear& f, const PiecewiseLinear& g) {
    if (f.is_zero() || g.is_zero()) return BigRational(0);
    // Restrict to the overlap of the two supports.
    const BigRational lo = std::max(f.breakpoints().front().x, g.breakpoints().front().x);
    const BigRational hi = std::min(f.breakpoints().back().x, g.breakpoints().back().x);
    if (!(lo < hi)) return BigRational(0);

    const PiecewiseLinear both[] = {f, g};
    auto xs = merged_abscissae(both);
    std::erase_if(xs, [&](const BigRational& x) { return x < lo || x > hi; });
    const auto fv = sample_sorted(f, xs);
    const auto gv = sample_sorted(g, xs);

    // Product of two affine pieces is quadratic; Simpson is exact:
    // (b - a)/6 * (2 f_a g_a + f_a g_b + f_b g_a + 2 f_b g_b).
    BigRational acc(0);
    for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
        const BigRational w = xs[k + 1] - xs[k];
        acc += w * (BigRational(2) * fv[k] * gv[k] + fv[k] * gv[k + 1] + fv[k + 1] * gv[k] +
                    BigRational(2) * fv[k + 1] * gv[k + 1]);
    }
    return acc / BigRational(6);
}

BigRational first_moment(const PiecewiseLinear& f, const BigRational& a, const BigRational& b) {
    if (!(a < b)) fail(Errc::invalid_argument, "first_moment: requires a < b");
    std::vector<BigRational> xs{a, b};
    for (const auto& p : f.breakpoints())
        if (a < p.x && p.x < b) xs.push_back(p.x);
    std::sort(xs.begin(), xs.end());
    const auto v = sample_sorted(f, xs);

    // x f(x) is quadratic on each piece: Simpson with the midpoint.
    BigRational acc(0);
    for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
        const BigRational mid = (xs[k] + xs[k + 1]) / BigRational(2);
        const BigRational fmid = (v[k] + v[k + 1]) / BigRational(2);
        acc += (xs[k + 1] - xs[k]) * (xs[k] * v[k] + BigRational(4) * mid * fmid + xs[k + 1] * v[k + 1]);
    }
    return acc / BigRational(6);
}

std::vector<ClosedInterval> support(const PiecewiseLinear& f) {
    std::vector<ClosedInterval> out;
    const auto pts = f.breakpoints();
    bool open = false;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        const bool nonzero = !(pts[k].y.is_zero() && pts[k + 1].y.is_zero());
        if (nonzero && !open) {
            out.push_back({pts[k].x, pts[k + 1].x});
            open = true;
        } else if (nonzero) {
            out.back().right = pts[k + 1].x;
        } else {
            open = false;
        }
    }
    return out;
}

std::string serialize(const PiecewiseLinear& f) {
    std::ostringstream os;
    os << "pwlin v1\n" << f.breakpoints().size() << '\n';
    for (const auto& p : f.breakpoints()) os << p.x.to_string() << ' ' << p.y.to_string() << '\n';
    return os.str();
}

PiecewiseLinear deserialize(std::string_view text) {
    std::istringstream is{std::string(text)};
    std::string line;
    if (!std::getline(is, line) || line != "pwlin v1") fail(Errc::parse, "pwlin: missing 'pwlin v1' header");
    if (!std::getline(is, line)) fail(Errc::parse, "pwlin: missing breakpoint count");
    std::size_t n = 0;
    try {
        std::size_t used = 0;
        n = std::stoul(line, &used);
        if (used != line.size()) throw std::invalid_argument(line);
    } catch (const std::exception&) {
        fail(Errc::parse, "pwlin: bad breakpoint count '" + line + "'");
    }
    std::vector<Breakpoint> pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::getline(is, line)) fail(Errc::parse, "pwlin: expected " + std::to_string(n) + " breakpoint lines");
        std::istringstream ls(line);
        std::string xs, ys, extra;
        if (!(ls >> xs >> ys) || (ls >> extra))
            fail(Errc::parse, "pwlin: line " + std::to_string(i + 3) + ": expected '<x> <y>'");
        pts.push_back({BigRational::parse(xs), BigRational::parse(ys)});
    }
    while (std::getline(is, line))
        if (!line.empty()) fail(Errc::parse, "pwlin: trailing content after breakpoints");
    return PiecewiseLinear(std::move(pts));
}

}  // namespace ehrenfest::exact
