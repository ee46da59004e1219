#include "ehrenfest/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ehrenfest/counterexample.hpp"
#include "ehrenfest/crosscheck.hpp"
#include "ehrenfest/error.hpp"

namespace ehrenfest::harness {

using json = nlohmann::ordered_json;
namespace ce = counterexample;
namespace pr = propagator;

const char* version() { return EHRENFEST_VERSION; }

std::string to_string(Mode m) {
    switch (m) {
        case Mode::counterexample: return "counterexample";
        case Mode::evolve: return "evolve";
        case Mode::crosscheck: return "crosscheck";
    }
    return "unknown";
}

std::optional<Mode> mode_from_name(std::string_view name) {
    if (name == "counterexample") return Mode::counterexample;
    if (name == "evolve") return Mode::evolve;
    if (name == "crosscheck") return Mode::crosscheck;
    return std::nullopt;
}

std::string format(const Diagnostic& d) {
    std::string out;
    if (d.line > 0) out += "line " + std::to_string(d.line) + ": ";
    if (!d.field.empty()) out += d.field + ": ";
    return out + d.message;
}

// ---------------------------------------------------------------- parsing

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

std::optional<std::string> nearest(std::string_view key, const std::vector<std::string>& known) {
    std::optional<std::string> best;
    std::size_t best_d = std::numeric_limits<std::size_t>::max();
    for (const auto& k : known) {
        const auto d = levenshtein(key, k);
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    if (best && best_d <= std::max<std::size_t>(2, best->size() / 3)) return best;
    return std::nullopt;
}

using Setter = std::function<std::optional<std::string>(ScenarioConfig&, std::string_view)>;

std::optional<std::string> read_double(std::string_view v, double& out) {
    if (v.find('/') != std::string_view::npos) {
        try {
            out = BigRational::parse(std::string(v)).to_double();
            return std::nullopt;
        } catch (const Error& e) {
            return std::string("not a rational number: ") + e.what();
        }
    }
    double d = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(d))
        return "expected a finite number, got '" + std::string(v) + "'";
    out = d;
    return std::nullopt;
}

std::optional<std::string> read_rational(std::string_view v, BigRational& out, Mode mode) {
    try {
        out = BigRational::parse(std::string(v));
        return std::nullopt;
    } catch (const Error&) {
        if (v.find('.') != std::string_view::npos || v.find('e') != std::string_view::npos ||
            v.find('E') != std::string_view::npos)
            return "decimal literal '" + std::string(v) + "' is not allowed in " + to_string(mode) +
                   " mode; write p/q";
        return "expected p/q or an integer, got '" + std::string(v) + "'";
    }
}

template <typename Int>
std::optional<std::string> read_int(std::string_view v, Int& out) {
    Int x{};
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size()) return "expected an integer, got '" + std::string(v) + "'";
    out = x;
    return std::nullopt;
}

std::optional<std::string> read_bool(std::string_view v, bool& out) {
    if (v == "true") {
        out = true;
        return std::nullopt;
    }
    if (v == "false") {
        out = false;
        return std::nullopt;
    }
    return "expected true or false, got '" + std::string(v) + "'";
}

std::vector<std::string> split_list(std::string_view v) {
    std::vector<std::string> out;
    while (true) {
        const auto c = v.find(',');
        const auto item = trim(v.substr(0, c));
        if (!item.empty()) out.emplace_back(item);
        if (c == std::string_view::npos) break;
        v.remove_prefix(c + 1);
    }
    return out;
}

Setter real(double EvolveConfig::*m) {
    return [m](ScenarioConfig& c, std::string_view v) { return read_double(v, c.evolve.*m); };
}

std::map<std::string, Setter> evolve_fields() {
    std::map<std::string, Setter> f;
    f["potential"] = [](ScenarioConfig& c, std::string_view v) -> std::optional<std::string> {
        if (!pr::Potential::kind_from_name(v)) return "unknown potential '" + std::string(v) + "' (free, harmonic, quartic, barrier)";
        c.evolve.potential = std::string(v);
        return std::nullopt;
    };
    f["omega"] = real(&EvolveConfig::omega);
    f["coupling"] = real(&EvolveConfig::coupling);
    f["height"] = real(&EvolveConfig::height);
    f["width"] = real(&EvolveConfig::width);
    f["center"] = real(&EvolveConfig::center);
    f["x0"] = real(&EvolveConfig::x0);
    f["p0"] = real(&EvolveConfig::p0);
    f["sigma"] = real(&EvolveConfig::sigma);
    f["L"] = real(&EvolveConfig::length);
    f["T"] = real(&EvolveConfig::total_time);
    f["dt"] = real(&EvolveConfig::dt);
    f["residual_tol"] = real(&EvolveConfig::residual_tol);
    f["conserved_tol"] = real(&EvolveConfig::conserved_tol);
    f["norm_tol"] = real(&EvolveConfig::norm_tol);
    f["energy_tol"] = real(&EvolveConfig::energy_tol);
    f["min_slope"] = real(&EvolveConfig::min_slope);
    f["sup_tol"] = real(&EvolveConfig::sup_tol);
    f["n"] = [](ScenarioConfig& c, std::string_view v) { return read_int(v, c.evolve.nodes); };
    f["save_every"] = [](ScenarioConfig& c, std::string_view v) { return read_int(v, c.evolve.save_every); };
    f["derivative_order"] = [](ScenarioConfig& c, std::string_view v) { return read_int(v, c.evolve.derivative_order); };
    f["convergence"] = [](ScenarioConfig& c, std::string_view v) { return read_bool(v, c.evolve.convergence); };
    f["scheme"] = [](ScenarioConfig& c, std::string_view v) -> std::optional<std::string> {
        const auto s = pr::scheme_from_name(v);
        if (!s) return "unknown scheme '" + std::string(v) + "' (crank_nicolson, split_fourier, cayley4)";
        c.evolve.scheme = *s;
        return std::nullopt;
    };
    f["observables"] = [](ScenarioConfig& c, std::string_view v) -> std::optional<std::string> {
        auto list = split_list(v);
        if (list.empty()) return "at least one observable is required";
        static const std::set<std::string> known{"identity", "x", "p", "kinetic", "potential", "H"};
        std::set<std::string> seen;
        for (const auto& o : list) {
            if (!known.count(o)) return "unknown observable '" + o + "' (identity, x, p, kinetic, potential, H)";
            if (!seen.insert(o).second) return "observable '" + o + "' listed twice";
        }
        c.evolve.observables = std::move(list);
        return std::nullopt;
    };
    return f;
}

template <typename Section>
void add_bump_fields(std::map<std::string, Setter>& f, Section ScenarioConfig::*sec, Mode mode) {
    f["n_bumps"] = [sec](ScenarioConfig& c, std::string_view v) { return read_int(v, (c.*sec).n_bumps); };
    f["rule"] = [sec](ScenarioConfig& c, std::string_view v) -> std::optional<std::string> {
        if (v != "harmonic" && v != "dyadic") return "unknown interval rule '" + std::string(v) + "' (harmonic, dyadic)";
        (c.*sec).rule = std::string(v);
        return std::nullopt;
    };
    f["t0_fraction"] = [sec, mode](ScenarioConfig& c, std::string_view v) {
        return read_rational(v, (c.*sec).t0_fraction, mode);
    };
    f["eta_fraction"] = [sec, mode](ScenarioConfig& c, std::string_view v) {
        return read_rational(v, (c.*sec).eta_fraction, mode);
    };
}

std::map<std::string, Setter> counterexample_fields() {
    std::map<std::string, Setter> f;
    add_bump_fields(f, &ScenarioConfig::counterexample, Mode::counterexample);
    f["samples"] = [](ScenarioConfig& c, std::string_view v) { return read_int(v, c.counterexample.samples); };
    f["hermitean_pairs"] = [](ScenarioConfig& c, std::string_view v) {
        return read_int(v, c.counterexample.hermitean_pairs);
    };
    return f;
}

std::map<std::string, Setter> crosscheck_fields() {
    std::map<std::string, Setter> f;
    add_bump_fields(f, &ScenarioConfig::crosscheck, Mode::crosscheck);
    f["L"] = [](ScenarioConfig& c, std::string_view v) { return read_double(v, c.crosscheck.length); };
    f["n"] = [](ScenarioConfig& c, std::string_view v) { return read_int(v, c.crosscheck.nodes); };
    f["refine"] = [](ScenarioConfig& c, std::string_view v) { return read_bool(v, c.crosscheck.refine); };
    f["relative_tol"] = [](ScenarioConfig& c, std::string_view v) {
        return read_double(v, c.crosscheck.relative_tol);
    };
    f["min_ratio"] = [](ScenarioConfig& c, std::string_view v) { return read_double(v, c.crosscheck.min_ratio); };
    f["times"] = [](ScenarioConfig& c, std::string_view v) -> std::optional<std::string> {
        std::vector<BigRational> ts;
        for (const auto& item : split_list(v)) {
            BigRational t;
            if (auto err = read_rational(item, t, Mode::crosscheck)) return err;
            ts.push_back(t);
        }
        if (ts.empty()) return "at least one time is required";
        c.crosscheck.times = std::move(ts);
        return std::nullopt;
    };
    return f;
}

std::vector<std::string> keys_of(const std::map<std::string, Setter>& f) {
    std::vector<std::string> out;
    for (const auto& [k, _] : f) out.push_back(k);
    return out;
}

bool power_of_two(std::size_t n) { return n >= 16 && (n & (n - 1)) == 0; }

// Range checks on the parsed values; `line_of` maps a key to where it was
// set (0 when defaulted).
void validate(const ScenarioConfig& c, const std::function<int(const std::string&, const std::string&)>& line_of,
              std::vector<Diagnostic>& errors) {
    auto err = [&](const std::string& section, const std::string& key, std::string msg) {
        errors.push_back({line_of(section, key), section + "." + key, std::move(msg)});
    };
    if (c.mode == Mode::evolve) {
        const auto& e = c.evolve;
        const std::string s = "evolve";
        if (!(e.length > 0.0)) err(s, "L", "must be positive");
        if (!power_of_two(e.nodes) || e.nodes > (std::size_t{1} << 22))
            err(s, "n", "must be a power of two between 16 and 4194304");
        if (!(e.dt > 0.0)) err(s, "dt", "must be positive");
        if (!(e.total_time > 0.0)) err(s, "T", "must be positive");
        if (e.dt > 0.0 && e.total_time > 0.0) {
            const double steps = e.total_time / e.dt;
            if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps))
                err(s, "T", "must be an integer multiple of dt");
        }
        if (e.save_every < 1) err(s, "save_every", "must be >= 1");
        if (e.derivative_order != 2 && e.derivative_order != 4) err(s, "derivative_order", "must be 2 or 4");
        if (!(e.sigma > 0.0)) err(s, "sigma", "must be positive");
        if (e.potential == "harmonic" && !(e.omega > 0.0)) err(s, "omega", "must be positive");
        if (e.potential == "quartic" && !(e.coupling > 0.0)) err(s, "coupling", "must be positive");
        if (e.potential == "barrier" && !(e.width > 0.0)) err(s, "width", "must be positive");
        if (e.sigma > 0.0 && e.length > 0.0 && std::abs(e.x0) + 6.0 * e.sigma > 0.5 * e.length)
            err(s, "x0", "initial state must stay 6 sigma inside the box (|x0| + 6 sigma <= L/2)");
        const std::pair<const char*, double> positive[]{{"residual_tol", e.residual_tol},
                                                         {"conserved_tol", e.conserved_tol},
                                                         {"norm_tol", e.norm_tol},
                                                         {"energy_tol", e.energy_tol},
                                                         {"sup_tol", e.sup_tol},
                                                         {"min_slope", e.min_slope}};
        for (const auto& [k, v] : positive)
            if (!(v > 0.0)) err(s, k, "must be positive");
    }
    auto bumps = [&](const std::string& s, int n, int max_n, const BigRational& t0f, const BigRational& etaf) {
        if (n < 2 || n > max_n) err(s, "n_bumps", "must be between 2 and " + std::to_string(max_n));
        if (!(t0f > BigRational(0)) || !(t0f < BigRational(1))) err(s, "t0_fraction", "must lie in (0, 1)");
        if (!(etaf > BigRational(0))) err(s, "eta_fraction", "must be positive");
        else if (!(t0f + BigRational(6) * etaf < BigRational(1)))
            err(s, "eta_fraction", "t0_fraction + 6 eta_fraction must be below 1");
    };
    if (c.mode == Mode::counterexample) {
        const auto& x = c.counterexample;
        bumps("counterexample", x.n_bumps, 5000, x.t0_fraction, x.eta_fraction);
        if (x.samples < 1) err("counterexample", "samples", "must be >= 1");
        if (x.hermitean_pairs < 1) err("counterexample", "hermitean_pairs", "must be >= 1");
    }
    if (c.mode == Mode::crosscheck) {
        const auto& x = c.crosscheck;
        bumps("crosscheck", x.n_bumps, 30, x.t0_fraction, x.eta_fraction);
        if (!(x.length > 8.0)) err("crosscheck", "L", "must exceed 8 so the nodes cover [-1, 4]");
        if (!power_of_two(x.nodes) || x.nodes > (std::size_t{1} << 24))
            err("crosscheck", "n", "must be a power of two between 16 and 16777216");
        if (!(x.relative_tol > 0.0)) err("crosscheck", "relative_tol", "must be positive");
        if (!(x.min_ratio > 0.0)) err("crosscheck", "min_ratio", "must be positive");
    }
}

}  // namespace

ParseResult parse_config(std::string_view text) {
    ParseResult res;
    ScenarioConfig cfg;
    const std::map<std::string, std::map<std::string, Setter>> sections{
        {"evolve", evolve_fields()}, {"counterexample", counterexample_fields()}, {"crosscheck", crosscheck_fields()}};
    const std::vector<std::string> section_names{"counterexample", "crosscheck", "evolve"};
    const std::vector<std::string> top_keys{"mode", "seed"};

    std::map<std::pair<std::string, std::string>, int> seen;
    std::map<std::string, int> section_lines;
    struct Pending {
        int line;
        std::string section, key, value;
    };
    std::vector<Pending> deferred;  // section keys are applied once mode is known
    std::string section;
    bool mode_set = false;
    int lineno = 0;

    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
        const auto line = trim(raw);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') {
                res.errors.push_back({lineno, "", "syntax error: section header must end with ']'"});
                continue;
            }
            const std::string name(trim(line.substr(1, line.size() - 2)));
            if (!sections.count(name)) {
                std::string msg = "unknown section [" + name + "]";
                if (auto s = nearest(name, section_names)) msg += " (did you mean [" + *s + "]?)";
                res.errors.push_back({lineno, name, msg});
                section = "?";
                continue;
            }
            if (section_lines.count(name)) {
                res.errors.push_back({lineno, name, "section [" + name + "] appears twice"});
            }
            section_lines[name] = lineno;
            section = name;
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            res.errors.push_back({lineno, "", "syntax error: expected 'key = value' or '[section]'"});
            continue;
        }
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        const std::string field = section.empty() ? key : section + "." + key;
        if (key.empty()) {
            res.errors.push_back({lineno, "", "syntax error: missing key before '='"});
            continue;
        }
        if (section == "?") continue;  // already reported the section
        if (value.empty()) {
            res.errors.push_back({lineno, field, "missing value"});
            continue;
        }
        if (auto [it, fresh] = seen.emplace(std::make_pair(section, key), lineno); !fresh) {
            res.errors.push_back({lineno, field, "duplicate key (first set on line " + std::to_string(it->second) + ")"});
            continue;
        }

        if (section.empty()) {
            if (key == "mode") {
                if (auto m = mode_from_name(value)) {
                    cfg.mode = *m;
                    mode_set = true;
                } else {
                    res.errors.push_back(
                        {lineno, "mode", "unknown mode '" + std::string(value) + "' (counterexample, evolve, crosscheck)"});
                    mode_set = true;  // reported; don't also complain that it is missing
                }
            } else if (key == "seed") {
                if (auto e = read_int(value, cfg.seed)) res.errors.push_back({lineno, "seed", *e});
            } else {
                std::string msg = "unknown key";
                if (auto s = nearest(key, top_keys)) msg += " (did you mean '" + *s + "'?)";
                else msg += "; top-level keys are mode and seed, other settings belong in a [section]";
                res.errors.push_back({lineno, key, msg});
            }
            continue;
        }
        const auto& fields = sections.at(section);
        const auto it = fields.find(key);
        if (it == fields.end()) {
            std::string msg = "unknown key";
            if (auto s = nearest(key, keys_of(fields))) msg += " (did you mean '" + *s + "'?)";
            res.errors.push_back({lineno, field, msg});
            continue;
        }
        deferred.push_back({lineno, section, key, std::string(value)});
    }

    if (!mode_set) res.errors.push_back({0, "mode", "required (counterexample, evolve, crosscheck)"});
    for (const auto& [name, line] : section_lines)
        if (mode_set && name != to_string(cfg.mode) && mode_from_name(name))
            res.errors.push_back({line, name, "section [" + name + "] does not apply to mode " + to_string(cfg.mode)});

    for (const auto& d : deferred)
        if (auto e = sections.at(d.section).at(d.key)(cfg, d.value))
            res.errors.push_back({d.line, d.section + "." + d.key, *e});

    if (res.errors.empty()) {
        validate(
            cfg,
            [&](const std::string& s, const std::string& k) {
                const auto it = seen.find({s, k});
                return it == seen.end() ? 0 : it->second;
            },
            res.errors);
    }
    std::stable_sort(res.errors.begin(), res.errors.end(),
                     [](const Diagnostic& a, const Diagnostic& b) { return a.line < b.line; });
    if (res.errors.empty()) res.config = cfg;
    return res;
}

ScenarioConfig parse_config_or_throw(std::string_view text) {
    auto res = parse_config(text);
    if (res.config) return *res.config;
    std::string msg = "invalid configuration:";
    for (const auto& d : res.errors) msg += "\n  " + format(d);
    fail(Errc::parse, msg);
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::io, "cannot read config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_or_throw(ss.str());
}

// ----------------------------------------------------------- canonical form

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string canonical_text(const ScenarioConfig& c) {
    std::ostringstream o;
    o << "mode = " << to_string(c.mode) << "\nseed = " << c.seed << "\n";
    if (c.mode == Mode::evolve) {
        const auto& e = c.evolve;
        o << "[evolve]\npotential = " << e.potential << "\nomega = " << num(e.omega) << "\ncoupling = " << num(e.coupling)
          << "\nheight = " << num(e.height) << "\nwidth = " << num(e.width) << "\ncenter = " << num(e.center)
          << "\nx0 = " << num(e.x0) << "\np0 = " << num(e.p0) << "\nsigma = " << num(e.sigma) << "\nL = " << num(e.length)
          << "\nn = " << e.nodes << "\nT = " << num(e.total_time) << "\ndt = " << num(e.dt)
          << "\nsave_every = " << e.save_every << "\nobservables = ";
        for (std::size_t i = 0; i < e.observables.size(); ++i) o << (i ? ", " : "") << e.observables[i];
        o << "\nscheme = " << pr::to_string(e.scheme) << "\nderivative_order = " << e.derivative_order
          << "\nresidual_tol = " << num(e.residual_tol) << "\nconserved_tol = " << num(e.conserved_tol)
          << "\nnorm_tol = " << num(e.norm_tol) << "\nenergy_tol = " << num(e.energy_tol)
          << "\nconvergence = " << (e.convergence ? "true" : "false") << "\nmin_slope = " << num(e.min_slope)
          << "\nsup_tol = " << num(e.sup_tol) << "\n";
    } else if (c.mode == Mode::counterexample) {
        const auto& x = c.counterexample;
        o << "[counterexample]\nn_bumps = " << x.n_bumps << "\nrule = " << x.rule
          << "\nt0_fraction = " << x.t0_fraction.to_string() << "\neta_fraction = " << x.eta_fraction.to_string()
          << "\nsamples = " << x.samples << "\nhermitean_pairs = " << x.hermitean_pairs << "\n";
    } else {
        const auto& x = c.crosscheck;
        o << "[crosscheck]\nn_bumps = " << x.n_bumps << "\nrule = " << x.rule
          << "\nt0_fraction = " << x.t0_fraction.to_string() << "\neta_fraction = " << x.eta_fraction.to_string()
          << "\nL = " << num(x.length) << "\nn = " << x.nodes << "\ntimes = ";
        if (x.times.empty()) o << "default";
        for (std::size_t i = 0; i < x.times.size(); ++i) o << (i ? ", " : "") << x.times[i].to_string();
        o << "\nrefine = " << (x.refine ? "true" : "false") << "\nrelative_tol = " << num(x.relative_tol)
          << "\nmin_ratio = " << num(x.min_ratio) << "\n";
    }
    return o.str();
}

std::string config_hash(const ScenarioConfig& c) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical_text(c)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// -------------------------------------------------------------------- run

bool RunManifest::ok() const {
    if (partial || checks.empty()) return false;
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

namespace {

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string brief(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

class Writer {
public:
    Writer(std::filesystem::path dir, RunManifest& m) : dir_(std::move(dir)), m_(m) {}

    void text(const std::string& name, const std::string& body) {
        const auto path = dir_ / name;
        std::ofstream out(path, std::ios::binary);
        out << body;
        out.close();
        if (!out) fail(Errc::io, "cannot write " + path.string());
        m_.outputs.push_back(name);
    }

private:
    std::filesystem::path dir_;
    RunManifest& m_;
};

void note(std::ostream* log, const std::string& line) {
    if (log) *log << line << '\n';
}

void add(RunManifest& m, std::ostream* log, std::string name, bool passed, std::string detail) {
    note(log, std::string(passed ? "  pass " : "  FAIL ") + name + ": " + detail);
    m.checks.push_back({std::move(name), passed, std::move(detail)});
}

ce::IntervalRule make_rule(const std::string& name, const BigRational& t0f, const BigRational& etaf) {
    return name == "dyadic" ? ce::IntervalRule::dyadic(t0f, etaf) : ce::IntervalRule::harmonic(t0f, etaf);
}

void run_counterexample(const CounterexampleConfig& cfg, std::uint64_t seed, Writer& w, RunManifest& m,
                        std::ostream* log) {
    note(log, "assembling " + std::to_string(cfg.n_bumps) + " bumps (" + cfg.rule + " rule)");
    const auto sys = ce::assemble_system(cfg.n_bumps, make_rule(cfg.rule, cfg.t0_fraction, cfg.eta_fraction));

    const bool gram = ce::gram_is_diagonal(sys);
    add(m, log, "gram_orthogonal", gram, gram ? "Gram matrix is exactly diagonal" : "off-diagonal entry is nonzero");

    int bad_moments = 0;
    for (const auto& b : sys.bumps())
        for (int k = 0; k <= 2; ++k) {
            const BigRational a = b.spec.t0 + BigRational(k);
            if (!exact::first_moment(b.phi, a, a + BigRational(6) * b.spec.eta).is_zero()) ++bad_moments;
        }
    add(m, log, "moments_vanish", bad_moments == 0,
        std::to_string(3 * sys.size() - static_cast<std::size_t>(bad_moments)) + "/" + std::to_string(3 * sys.size()) +
            " cell moments are exactly 0");

    std::size_t checked = 0, failures = 0;
    for (const auto& b : sys.bumps()) {
        const auto ts = ce::sample_outside(b.spec, cfg.samples, seed + static_cast<std::uint64_t>(b.j));
        const auto cert = ce::verify_orthogonality(b.phi, b.spec, ts);
        checked += cert.checked.size();
        failures += cert.failures.size() + (cert.ok() ? 0 : (cert.failures.empty() ? 1 : 0));
    }
    add(m, log, "orthogonality", failures == 0,
        std::to_string(checked) + " samples t outside I_j + Z, " + std::to_string(failures) + " nonzero");

    const auto cert = ce::unboundedness_certificate(sys);
    bool exact_value = true;
    for (const auto& r : cert.rows)
        if (!(r.expectation == BigRational(r.j + 1))) exact_value = false;
    add(m, log, "expectation_exceeds_index", cert.exceeds_index && cert.strictly_increasing && exact_value,
        exact_value ? "<A> at t_j equals j + 1 for every j" : "some <A>(t_j) differs from j + 1");
    add(m, log, "witnesses_zero", cert.witnesses_zero,
        cert.witnesses_zero ? "every j has t' with |t' - t_j| < width(I_j) and <A>(t') = 0" : "missing witness");

    const bool herm = ce::check_hermitean(sys, cfg.hermitean_pairs, seed);
    add(m, log, "hermitean", herm, std::to_string(cfg.hermitean_pairs) + " random pairs, <Af, g> == <f, Ag> exactly");

    json c;
    c["n"] = cfg.n_bumps;
    c["rows"] = json::array();
    for (const auto& r : cert.rows)
        c["rows"].push_back({{"j", r.j},
                             {"t_j", r.t_j.to_string()},
                             {"expectation", r.expectation.to_string()},
                             {"witness_zero_t", r.witness_zero_t.to_string()}});
    c["gram_ok"] = gram;
    c["hermitean_ok"] = herm;
    w.text("certificate.json", c.dump(2) + "\n");
}

pr::Potential make_potential(const EvolveConfig& e) {
    const auto kind = *pr::Potential::kind_from_name(e.potential);
    switch (kind) {
        case pr::Potential::Kind::harmonic: return pr::Potential::harmonic(e.omega);
        case pr::Potential::Kind::quartic: return pr::Potential::quartic(e.coupling);
        case pr::Potential::Kind::barrier: return pr::Potential::barrier(e.height, e.width, e.center);
        default: return pr::Potential::free();
    }
}

bool conserved(const pr::Observable& a) {
    return a.kind() == pr::Observable::Kind::identity || a.kind() == pr::Observable::Kind::hamiltonian;
}

void run_evolve(const EvolveConfig& e, Writer& w, RunManifest& m, std::ostream* log) {
    const pr::Grid grid(e.length, e.nodes);
    const auto pot = make_potential(e);
    const auto h = pr::make_hamiltonian(grid, pot);
    std::vector<pr::Observable> obs;
    for (const auto& name : e.observables) obs.push_back(pr::observable_by_name(name, grid, pot));
    const auto psi0 = pr::gaussian(grid, e.x0, e.p0, e.sigma);

    pr::EvolveOptions opt;
    opt.total_time = e.total_time;
    opt.dt = e.dt;
    opt.save_every = e.save_every;
    opt.scheme = e.scheme;
    opt.derivative_order = e.derivative_order;

    note(log, "evolving " + e.potential + " scenario with " + pr::to_string(e.scheme) + ", dt = " + brief(e.dt));
    const auto rep = pr::evolve_and_report(psi0, h, obs, opt);
    for (std::size_t i = 0; i < obs.size(); ++i) {
        std::ostringstream csv;
        pr::write_csv(rep, i, csv);
        w.text("observable_" + obs[i].name() + ".csv", csv.str());
    }

    add(m, log, "norm_drift", rep.norm_drift <= e.norm_tol, sci(rep.norm_drift) + " <= " + sci(e.norm_tol));
    add(m, log, "energy_drift", rep.energy_drift <= e.energy_tol, sci(rep.energy_drift) + " <= " + sci(e.energy_tol));
    for (std::size_t i = 0; i < obs.size(); ++i) {
        const auto& s = rep.observables[i];
        const double tol = conserved(obs[i]) ? e.conserved_tol : e.residual_tol;
        add(m, log, "residual_" + s.name, s.max_residual <= tol, sci(s.max_residual) + " <= " + sci(tol));
        add(m, log, "sup_finite_" + s.name, std::isfinite(s.sup_a_norm), "sup ||A psi|| = " + brief(s.sup_a_norm));
    }

    json summary;
    summary["scenario"] = {{"potential", e.potential},
                           {"omega", e.omega},
                           {"coupling", e.coupling},
                           {"height", e.height},
                           {"width", e.width},
                           {"center", e.center},
                           {"x0", e.x0},
                           {"p0", e.p0},
                           {"sigma", e.sigma},
                           {"L", e.length},
                           {"n", e.nodes},
                           {"T", e.total_time},
                           {"dt", e.dt},
                           {"save_every", e.save_every},
                           {"scheme", pr::to_string(e.scheme)},
                           {"derivative_order", e.derivative_order}};
    summary["samples"] = rep.times.size();
    summary["norm_drift"] = rep.norm_drift;
    summary["energy_drift"] = rep.energy_drift;
    summary["max_edge_mass"] = rep.max_edge_mass;
    summary["max_solver_iterations"] = rep.max_solver_iterations;
    summary["observables"] = json::array();
    for (std::size_t i = 0; i < obs.size(); ++i) {
        const auto& s = rep.observables[i];
        summary["observables"].push_back({{"name", s.name},
                                          {"max_residual", s.max_residual},
                                          {"tolerance", conserved(obs[i]) ? e.conserved_tol : e.residual_tol},
                                          {"sup_A_norm", s.sup_a_norm}});
    }
    summary["convergence"] = nullptr;

    if (e.convergence) {
        auto half = opt;
        half.dt = 0.5 * e.dt;
        half.save_every = 2 * e.save_every;
        note(log, "rerunning at dt = " + brief(half.dt));
        const auto fine = pr::evolve_and_report(psi0, h, obs, half);
        json conv;
        conv["dt_half"] = half.dt;
        conv["observables"] = json::array();
        for (std::size_t i = 0; i < obs.size(); ++i) {
            const auto& a = rep.observables[i];
            const auto& b = fine.observables[i];
            json row{{"name", a.name}, {"max_residual_half", b.max_residual}, {"ratio", nullptr}, {"slope", nullptr}};
            const double sup_change = std::abs(b.sup_a_norm - a.sup_a_norm) / std::max(a.sup_a_norm, 1e-300);
            row["sup_A_norm_half"] = b.sup_a_norm;
            row["sup_relative_change"] = sup_change;
            add(m, log, "sup_stable_" + a.name, sup_change <= e.sup_tol, sci(sup_change) + " <= " + sci(e.sup_tol));
            if (!conserved(obs[i])) {
                const double ratio = a.max_residual / b.max_residual;
                const double slope = std::log2(ratio);
                row["ratio"] = ratio;
                row["slope"] = slope;
                add(m, log, "convergence_" + a.name, slope >= e.min_slope,
                    "log2 slope " + brief(slope) + " >= " + brief(e.min_slope));
            }
            conv["observables"].push_back(row);
        }
        summary["convergence"] = conv;
    }
    w.text("summary.json", summary.dump(2) + "\n");
}

json samples_json(const crosscheck::Report& r) {
    json out = json::array();
    for (const auto& s : r.samples)
        out.push_back({{"t", s.t.to_string()},
                       {"exact", s.exact},
                       {"discrete", s.discrete},
                       {"gap", s.gap},
                       {"resonant_j", s.resonant ? json(*s.resonant) : json(nullptr)}});
    return out;
}

void run_crosscheck(const CrosscheckConfig& cfg, Writer& w, RunManifest& m, std::ostream* log) {
    const auto sys = ce::assemble_system(cfg.n_bumps, make_rule(cfg.rule, cfg.t0_fraction, cfg.eta_fraction));
    const auto times = cfg.times.empty() ? crosscheck::default_times(sys) : cfg.times;
    note(log, "crosscheck on " + std::to_string(cfg.nodes) + " nodes, L = " + brief(cfg.length));
    const auto rep = crosscheck::counterexample_crosscheck(sys, pr::Grid(cfg.length, cfg.nodes), times);

    double max_res_gap = 0.0;
    bool any_resonant = false;
    for (const auto& s : rep.samples)
        if (s.resonant && s.exact != 0.0) {
            any_resonant = true;
            max_res_gap = std::max(max_res_gap, s.gap);
        }
    add(m, log, "resonant_agreement", rep.max_resonant_relative_gap <= cfg.relative_tol,
        "max relative gap " + sci(rep.max_resonant_relative_gap) + " <= " + sci(cfg.relative_tol));
    const double zero_bound = any_resonant ? max_res_gap : rep.spacing * rep.spacing;
    add(m, log, "nonresonant_near_zero", rep.max_nonresonant_gap <= zero_bound,
        "max |discrete| at exact zeros " + sci(rep.max_nonresonant_gap) + " <= " + sci(zero_bound));

    json out;
    out["n_bumps"] = cfg.n_bumps;
    out["rule"] = cfg.rule;
    out["L"] = cfg.length;
    out["n"] = cfg.nodes;
    out["spacing"] = rep.spacing;
    out["samples"] = samples_json(rep);
    out["refinement"] = nullptr;

    if (cfg.refine) {
        const auto fine =
            crosscheck::counterexample_crosscheck(sys, pr::Grid(cfg.length, 2 * cfg.nodes), times);
        const auto ratios = crosscheck::refinement_ratios(rep, fine);
        const double worst = ratios.empty() ? 0.0 : *std::min_element(ratios.begin(), ratios.end());
        add(m, log, "refinement_ratio", !ratios.empty() && worst >= cfg.min_ratio,
            ratios.empty() ? "no resonant samples to refine"
                           : "min gap ratio under h -> h/2 " + brief(worst) + " >= " + brief(cfg.min_ratio));
        out["refinement"] = {{"n", 2 * cfg.nodes}, {"spacing", fine.spacing}, {"samples", samples_json(fine)},
                             {"ratios", ratios}};
    }
    w.text("crosscheck.json", out.dump(2) + "\n");
}

}  // namespace

std::string manifest_json(const RunManifest& m) {
    json j;
    j["mode"] = m.mode;
    j["config_hash"] = m.config_hash;
    j["version"] = m.version;
    j["seed"] = m.seed;
    j["started"] = m.started;
    j["finished"] = m.finished;
    j["outputs"] = m.outputs;
    j["checks"] = json::array();
    for (const auto& c : m.checks) j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    j["partial"] = m.partial;
    j["error"] = m.error.empty() ? json(nullptr) : json(m.error);
    j["ok"] = m.ok();
    return j.dump(2) + "\n";
}

RunManifest run(const ScenarioConfig& config, const std::filesystem::path& out_dir, std::ostream* log) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) fail(Errc::io, "cannot create output directory " + out_dir.string() + ": " + ec.message());

    RunManifest m;
    m.mode = to_string(config.mode);
    m.config_hash = config_hash(config);
    m.version = version();
    m.seed = config.seed;
    m.started = utc_now();
    Writer w(out_dir, m);
    w.text("config.canonical", canonical_text(config));
    try {
        switch (config.mode) {
            case Mode::counterexample: run_counterexample(config.counterexample, config.seed, w, m, log); break;
            case Mode::evolve: run_evolve(config.evolve, w, m, log); break;
            case Mode::crosscheck: run_crosscheck(config.crosscheck, w, m, log); break;
        }
    } catch (const Error& e) {
        m.partial = true;
        const std::string prefix = to_string(config.mode) + ": ";
        m.error = e.what();
        if (m.error.rfind(prefix, 0) != 0) m.error = prefix + m.error;
        note(log, "error: " + m.error);
    }
    m.finished = utc_now();

    const auto path = out_dir / "manifest.json";
    std::ofstream out(path, std::ios::binary);
    out << manifest_json(m);
    out.close();
    if (!out) fail(Errc::io, "cannot write " + path.string());
    return m;
}

}  // namespace ehrenfest::harness
