#include "wavespeed/config.hpp"

#include "wavespeed/errors.hpp"
#include "wavespeed/parallel.hpp"

#include <toml.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace wavespeed {

namespace {

struct KindName {
    ExperimentKind kind;
    const char* name;
};

constexpr KindName kKinds[] = {
    {ExperimentKind::sweep, "sweep"},
    {ExperimentKind::rapid_rate, "rapid-rate"},
    {ExperimentKind::slow_rate, "slow-rate"},
    {ExperimentKind::sign_reversal, "sign-reversal"},
    {ExperimentKind::lemma_check, "lemma-check"},
    {ExperimentKind::frozen_curve, "frozen-curve"},
};

[[noreturn]] void invalid(const std::string& what) { fail(ErrorKind::validation, what); }

void check_keys(const toml::table& t, const std::string& where, std::initializer_list<const char*> allowed) {
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : t) {
        if (!ok.count(std::string(key.str()))) invalid("unknown key '" + std::string(key.str()) + "' in " + where);
    }
}

double number(const toml::node& n, const std::string& what) {
    if (auto v = n.value<double>()) return *v;
    invalid(what + " must be a number");
}

template <typename T>
T read(const toml::table& t, const char* key, T fallback, const std::string& where) {
    const toml::node* n = t.get(key);
    if (!n) return fallback;
    if constexpr (std::is_same_v<T, double>) {
        return number(*n, where + "." + key);
    } else if constexpr (std::is_same_v<T, bool>) {
        if (auto v = n->value<bool>()) return *v;
        invalid(where + "." + key + " must be a boolean");
    } else if constexpr (std::is_same_v<T, std::string>) {
        if (auto v = n->value<std::string>()) return *v;
        invalid(where + "." + key + " must be a string");
    } else {
        if (auto v = n->value<std::int64_t>()) return static_cast<T>(*v);
        invalid(where + "." + key + " must be an integer");
    }
}

std::optional<double> read_opt(const toml::table& t, const char* key, const std::string& where) {
    const toml::node* n = t.get(key);
    if (!n) return std::nullopt;
    return number(*n, where + "." + key);
}

std::vector<double> numbers(const toml::node& n, const std::string& what) {
    const auto* arr = n.as_array();
    if (!arr) invalid(what + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : *arr) out.push_back(number(e, what));
    return out;
}

std::vector<std::vector<double>> rows(const toml::node& n, std::size_t width, const std::string& what) {
    const auto* arr = n.as_array();
    if (!arr) invalid(what + " must be an array of arrays");
    std::vector<std::vector<double>> out;
    for (const auto& e : *arr) {
        auto r = numbers(e, what);
        if (r.size() != width) invalid(what + " rows need " + std::to_string(width) + " entries");
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<TrigMode> modes_of(const toml::table& t, const std::string& where) {
    std::vector<TrigMode> modes;
    if (const toml::node* n = t.get("modes")) {
        for (const auto& r : rows(*n, 3, where + ".modes")) modes.push_back({r[0], r[1], r[2]});
    }
    return modes;
}

TemporalCoefficient coefficient(const toml::node* node, const std::string& where) {
    if (!node) invalid("missing coefficient " + where);
    const auto* t = node->as_table();
    if (!t) invalid(where + " must be a table");
    const std::string kind = read<std::string>(*t, "kind", "constant", where);
    if (kind == "constant") {
        check_keys(*t, where, {"kind", "mean"});
        return TemporalCoefficient::constant(read<double>(*t, "mean", 0.0, where));
    }
    if (kind == "trig" || kind == "trig-polynomial") {
        check_keys(*t, where, {"kind", "mean", "modes"});
        return TemporalCoefficient::trig_polynomial(read<double>(*t, "mean", 0.0, where), modes_of(*t, where));
    }
    if (kind == "quasi-periodic") {
        check_keys(*t, where, {"kind", "mean", "modes", "basis"});
        std::vector<double> basis;
        if (const toml::node* n = t->get("basis")) basis = numbers(*n, where + ".basis");
        return TemporalCoefficient::quasi_periodic(read<double>(*t, "mean", 0.0, where), modes_of(*t, where),
                                                   std::move(basis));
    }
    if (kind == "smoothed-step") {
        check_keys(*t, where, {"kind", "intervals", "width", "period"});
        const toml::node* n = t->get("intervals");
        if (!n) invalid(where + " needs intervals");
        std::vector<StepInterval> steps;
        for (const auto& r : rows(*n, 3, where + ".intervals")) steps.push_back({r[0], r[1], r[2]});
        return TemporalCoefficient::smoothed_step(std::move(steps), read<double>(*t, "width", 0.02, where),
                                                  read<double>(*t, "period", 1.0, where));
    }
    invalid("unknown coefficient kind '" + kind + "' in " + where);
}

toml::array row_array(std::initializer_list<double> values) {
    toml::array r;
    for (double v : values) r.push_back(v);
    return r;
}

toml::table coefficient_table(const TemporalCoefficient& c) {
    toml::table t;
    toml::array modes;
    for (const auto& m : c.modes()) modes.push_back(row_array({m.freq, m.cos_amp, m.sin_amp}));
    switch (c.kind()) {
        case CoefficientKind::constant:
            t.insert("kind", "constant");
            t.insert("mean", c.mean());
            break;
        case CoefficientKind::trig_polynomial:
            t.insert("kind", "trig-polynomial");
            t.insert("mean", c.mean());
            t.insert("modes", modes);
            break;
        case CoefficientKind::quasi_periodic: {
            t.insert("kind", "quasi-periodic");
            t.insert("mean", c.mean());
            t.insert("modes", modes);
            toml::array basis;
            for (double w : c.basis()) basis.push_back(w);
            t.insert("basis", basis);
            break;
        }
        case CoefficientKind::smoothed_step: {
            t.insert("kind", "smoothed-step");
            toml::array steps;
            for (const auto& s : c.steps()) steps.push_back(row_array({s.t0, s.t1, s.value}));
            t.insert("intervals", steps);
            t.insert("width", c.width());
            t.insert("period", c.period().value_or(1.0));
            break;
        }
    }
    return t;
}

}  // namespace

const char* to_string(ExperimentKind kind) {
    for (const auto& k : kKinds) {
        if (k.kind == kind) return k.name;
    }
    return "?";
}

ExperimentKind parse_kind(const std::string& name) {
    for (const auto& k : kKinds) {
        if (name == k.name) return k.kind;
    }
    invalid("unknown experiment kind '" + name + "'");
}

std::vector<double> default_grid(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::rapid_rate:
            return {0.05, 0.1, 0.2, 0.4};
        case ExperimentKind::slow_rate:
            return {10.0, 20.0, 40.0, 80.0};
        case ExperimentKind::sign_reversal:
            return {0.1, 50.0};
        case ExperimentKind::sweep:
            return {0.1, 1.0, 10.0};
        default:
            return {};
    }
}

bool LemmaSettings::wants(const std::string& part) const {
    return std::find(parts.begin(), parts.end(), part) != parts.end();
}

Nonlinearity ExperimentConfig::nonlinearity() const { return Nonlinearity::cubic(a, b, ergodic_horizon); }

double ExperimentConfig::horizon(double T) const {
    return std::max(solver.horizon, solver.horizon_periods * T);
}

void validate(const ExperimentConfig& c) {
    const bool needs_grid = c.kind == ExperimentKind::sweep || c.kind == ExperimentKind::rapid_rate ||
                            c.kind == ExperimentKind::slow_rate || c.kind == ExperimentKind::sign_reversal;
    if (needs_grid && c.T.empty()) invalid("T-grid is empty");
    if (c.kind == ExperimentKind::sign_reversal && c.T.size() < 2) invalid("sign-reversal needs a small and a large T");
    for (std::size_t i = 0; i < c.T.size(); ++i) {
        if (!(c.T[i] > 0.0) || !std::isfinite(c.T[i])) invalid("T-grid values must be positive and finite");
        if (i > 0 && !(c.T[i] > c.T[i - 1])) invalid("T-grid must be sorted ascending without repeats");
    }
    const auto& s = c.solver;
    if (s.dx && !(*s.dx > 0.0)) invalid("solver.dx must be positive");
    if (s.half_width && !(*s.half_width > 0.0)) invalid("solver.L must be positive");
    if (s.dt) {
        if (!(*s.dt > 0.0)) invalid("solver.dt must be positive");
        for (double T : c.T) {
            if (T < 1.0 && *s.dt > T / 50.0) invalid("solver.dt exceeds T/50 at T = " + std::to_string(T));
        }
    }
    if (!(s.horizon > 0.0) || !(s.horizon_periods >= 0.0)) invalid("solver horizon must be positive");
    if (!(s.burn_in >= 0.0 && s.burn_in < 1.0)) invalid("solver.burn_in must lie in [0, 1)");
    if (!(s.sample_interval > 0.0)) invalid("solver.sample_interval must be positive");
    if (c.resolution < 16) invalid("resolution must be at least 16");
    if (c.jobs < 1) invalid("jobs must be at least 1");
    const auto& l = c.lemma;
    if (!(l.eps1_fraction > 0.0 && l.eps1_fraction < 0.5)) invalid("lemma.eps1_fraction must lie in (0, 1/2)");
    if (!(l.eps2_fraction > 0.0 && l.eps2_fraction < 0.5)) invalid("lemma.eps2_fraction must lie in (0, 1/2)");
    if (!(l.rapid_divisor > 1.0)) invalid("lemma.rapid_divisor must exceed 1");
    if (!(l.slow_multiplier > 1.0)) invalid("lemma.slow_multiplier must exceed 1");
    if (!(l.rapid_horizon > 0.0) || !(l.slow_periods > 0.0)) invalid("lemma horizons must be positive");
    if (l.residual_nt < 2 || l.residual_nx < 2) invalid("lemma residual grids need at least 2 points");
    if (!(l.sandwich_half_width > 0.0) || !(l.sandwich_dx > 0.0)) invalid("lemma sandwich grid must be positive");
    if (l.time_stride < 1) invalid("lemma.time_stride must be at least 1");
    if (!(l.tolerance >= 0.0)) invalid("lemma.tolerance must be non-negative");
    if (c.kind == ExperimentKind::lemma_check && l.parts.empty()) invalid("lemma.parts is empty");
    for (const auto& p : l.parts) {
        if (p != "rapid" && p != "smoothed" && p != "slow") invalid("unknown lemma part '" + p + "'");
    }
    if (c.ergodic_horizon && !(*c.ergodic_horizon > 0.0)) invalid("nonlinearity.horizon must be positive");
}

ExperimentConfig parse_config(const std::string& text) {
    toml::table root;
    try {
        root = toml::parse(text);
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << "config syntax: " << e.description() << " at line " << e.source().begin.line;
        invalid(msg.str());
    }
    check_keys(root, "config",
               {"kind", "T", "output", "seed", "jobs", "traces", "resolution", "nonlinearity", "solver", "lemma"});

    ExperimentConfig c;
    c.kind = parse_kind(read<std::string>(root, "kind", "sweep", "config"));
    c.output = read<std::string>(root, "output", c.output, "config");
    const auto seed = read<std::int64_t>(root, "seed", 1, "config");
    if (seed < 0) invalid("seed must be non-negative");
    c.seed = static_cast<std::uint64_t>(seed);
    const auto jobs = read<std::int64_t>(root, "jobs", default_jobs(), "config");
    if (jobs < 1) invalid("jobs must be at least 1");
    c.jobs = static_cast<unsigned>(jobs);
    c.traces = read<bool>(root, "traces", false, "config");
    c.resolution = read<int>(root, "resolution", c.resolution, "config");
    c.T = root.get("T") ? numbers(*root.get("T"), "T") : default_grid(c.kind);

    const auto* nl = root.get_as<toml::table>("nonlinearity");
    if (!nl) invalid("missing [nonlinearity] table");
    check_keys(*nl, "nonlinearity", {"type", "a", "b", "horizon"});
    if (read<std::string>(*nl, "type", "cubic", "nonlinearity") != "cubic") {
        invalid("nonlinearity.type must be 'cubic'");
    }
    c.a = coefficient(nl->get("a"), "nonlinearity.a");
    c.b = coefficient(nl->get("b"), "nonlinearity.b");
    c.ergodic_horizon = read_opt(*nl, "horizon", "nonlinearity");

    if (const auto* s = root.get_as<toml::table>("solver")) {
        check_keys(*s, "solver", {"dx", "dt", "L", "horizon", "horizon_periods", "burn_in", "sample_interval"});
        c.solver.dx = read_opt(*s, "dx", "solver");
        c.solver.dt = read_opt(*s, "dt", "solver");
        c.solver.half_width = read_opt(*s, "L", "solver");
        c.solver.horizon = read<double>(*s, "horizon", c.solver.horizon, "solver");
        c.solver.horizon_periods = read<double>(*s, "horizon_periods", c.solver.horizon_periods, "solver");
        c.solver.burn_in = read<double>(*s, "burn_in", c.solver.burn_in, "solver");
        c.solver.sample_interval = read<double>(*s, "sample_interval", c.solver.sample_interval, "solver");
    }
    if (const auto* l = root.get_as<toml::table>("lemma")) {
        check_keys(*l, "lemma",
                   {"eps1_fraction", "eps2_fraction", "rapid_divisor", "slow_multiplier", "rapid_horizon",
                    "slow_periods", "residual_nt", "residual_nx", "residual_margin", "sandwich_L", "sandwich_dx",
                    "time_stride", "tolerance", "sandwich", "parts"});
        auto& d = c.lemma;
        d.eps1_fraction = read<double>(*l, "eps1_fraction", d.eps1_fraction, "lemma");
        d.eps2_fraction = read<double>(*l, "eps2_fraction", d.eps2_fraction, "lemma");
        d.rapid_divisor = read<double>(*l, "rapid_divisor", d.rapid_divisor, "lemma");
        d.slow_multiplier = read<double>(*l, "slow_multiplier", d.slow_multiplier, "lemma");
        d.rapid_horizon = read<double>(*l, "rapid_horizon", d.rapid_horizon, "lemma");
        d.slow_periods = read<double>(*l, "slow_periods", d.slow_periods, "lemma");
        d.residual_nt = read<int>(*l, "residual_nt", d.residual_nt, "lemma");
        d.residual_nx = read<int>(*l, "residual_nx", d.residual_nx, "lemma");
        d.residual_margin = read<double>(*l, "residual_margin", d.residual_margin, "lemma");
        d.sandwich_half_width = read<double>(*l, "sandwich_L", d.sandwich_half_width, "lemma");
        d.sandwich_dx = read<double>(*l, "sandwich_dx", d.sandwich_dx, "lemma");
        d.time_stride = read<int>(*l, "time_stride", d.time_stride, "lemma");
        d.tolerance = read<double>(*l, "tolerance", d.tolerance, "lemma");
        d.sandwich = read<bool>(*l, "sandwich", d.sandwich, "lemma");
        if (const toml::node* n = l->get("parts")) {
            const auto* arr = n->as_array();
            if (!arr) invalid("lemma.parts must be an array of strings");
            d.parts.clear();
            for (const auto& e : *arr) {
                auto v = e.value<std::string>();
                if (!v) invalid("lemma.parts must be an array of strings");
                d.parts.push_back(*v);
            }
        }
    }
    validate(c);
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::io, "cannot read config '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string ExperimentConfig::canonical() const {
    toml::table root;
    root.insert("kind", to_string(kind));
    toml::array grid;
    for (double t : T) grid.push_back(t);
    root.insert("T", grid);
    root.insert("seed", static_cast<std::int64_t>(seed));
    root.insert("traces", traces);
    root.insert("resolution", resolution);

    toml::table nl;
    nl.insert("type", "cubic");
    nl.insert("a", coefficient_table(a));
    nl.insert("b", coefficient_table(b));
    if (ergodic_horizon) nl.insert("horizon", *ergodic_horizon);
    root.insert("nonlinearity", nl);

    toml::table s;
    if (solver.dx) s.insert("dx", *solver.dx);
    if (solver.dt) s.insert("dt", *solver.dt);
    if (solver.half_width) s.insert("L", *solver.half_width);
    s.insert("horizon", solver.horizon);
    s.insert("horizon_periods", solver.horizon_periods);
    s.insert("burn_in", solver.burn_in);
    s.insert("sample_interval", solver.sample_interval);
    root.insert("solver", s);

    toml::table l;
    l.insert("eps1_fraction", lemma.eps1_fraction);
    l.insert("eps2_fraction", lemma.eps2_fraction);
    l.insert("rapid_divisor", lemma.rapid_divisor);
    l.insert("slow_multiplier", lemma.slow_multiplier);
    l.insert("rapid_horizon", lemma.rapid_horizon);
    l.insert("slow_periods", lemma.slow_periods);
    l.insert("residual_nt", lemma.residual_nt);
    l.insert("residual_nx", lemma.residual_nx);
    l.insert("residual_margin", lemma.residual_margin);
    l.insert("sandwich_L", lemma.sandwich_half_width);
    l.insert("sandwich_dx", lemma.sandwich_dx);
    l.insert("time_stride", lemma.time_stride);
    l.insert("tolerance", lemma.tolerance);
    l.insert("sandwich", lemma.sandwich);
    toml::array parts;
    for (const auto& p : lemma.parts) parts.push_back(p);
    l.insert("parts", parts);
    root.insert("lemma", l);

    std::ostringstream out;
    out << root << '\n';
    return out.str();
}

}  // namespace wavespeed
