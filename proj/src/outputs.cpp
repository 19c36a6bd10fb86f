#include "wavespeed/outputs.hpp"

#include "wavespeed/errors.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace wavespeed {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 20.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 50.0;

std::string fixed(double v, int digits = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string short_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

/// Linear map from [lo, hi] onto the plot box.
struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    double p0 = 0.0;
    double p1 = 1.0;

    double operator()(double v) const { return p0 + (v - lo) / (hi - lo) * (p1 - p0); }
};

Axis padded(double lo, double hi, double p0, double p1) {
    if (!(hi > lo)) {
        const double pad = std::max(std::abs(lo) * 0.1, 1e-12);
        lo -= pad;
        hi += pad;
    }
    const double pad = 0.08 * (hi - lo);
    return {lo - pad, hi + pad, p0, p1};
}

class Svg {
public:
    Svg() {
        out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(kWidth, 0) << "\" height=\""
             << fixed(kHeight, 0) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
        out_ << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    }

    void line(double x0, double y0, double x1, double y1, const char* stroke, const char* dash = nullptr) {
        out_ << "<line x1=\"" << fixed(x0) << "\" y1=\"" << fixed(y0) << "\" x2=\"" << fixed(x1) << "\" y2=\""
             << fixed(y1) << "\" stroke=\"" << stroke << '"';
        if (dash) out_ << " stroke-dasharray=\"" << dash << '"';
        out_ << "/>\n";
    }

    void circle(double x, double y, bool filled, const char* colour) {
        out_ << "<circle cx=\"" << fixed(x) << "\" cy=\"" << fixed(y) << "\" r=\"4\" stroke=\"" << colour
             << "\" fill=\"" << (filled ? colour : "none") << "\"/>\n";
    }

    void text(double x, double y, const std::string& s, const char* anchor = "start") {
        out_ << "<text x=\"" << fixed(x) << "\" y=\"" << fixed(y) << "\" text-anchor=\"" << anchor << "\">" << s
             << "</text>\n";
    }

    void frame(const std::string& title, const std::string& xlabel, const std::string& ylabel) {
        out_ << "<rect x=\"" << fixed(kLeft) << "\" y=\"" << fixed(kTop) << "\" width=\""
             << fixed(kWidth - kLeft - kRight) << "\" height=\"" << fixed(kHeight - kTop - kBottom)
             << "\" fill=\"none\" stroke=\"black\"/>\n";
        text(kWidth / 2, 18, title, "middle");
        text(kWidth / 2, kHeight - 10, xlabel, "middle");
        out_ << "<text x=\"16\" y=\"" << fixed(kHeight / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
             << fixed(kHeight / 2) << ")\">" << ylabel << "</text>\n";
    }

    void ticks(const Axis& x, const Axis& y, bool logx, bool logy) {
        const auto label = [](double v, bool log) { return short_number(log ? std::pow(10.0, v) : v); };
        for (int i = 0; i <= 4; ++i) {
            const double vx = x.lo + (x.hi - x.lo) * i / 4.0;
            const double vy = y.lo + (y.hi - y.lo) * i / 4.0;
            line(x(vx), kHeight - kBottom, x(vx), kHeight - kBottom + 5, "black");
            text(x(vx), kHeight - kBottom + 18, label(vx, logx), "middle");
            line(kLeft - 5, y(vy), kLeft, y(vy), "black");
            text(kLeft - 8, y(vy) + 4, label(vy, logy), "end");
        }
    }

    std::string str() const { return out_.str() + "</svg>\n"; }

private:
    std::ostringstream out_;
};

std::string plain_name(double T) {
    std::string s = format_number(T);
    std::replace(s.begin(), s.end(), '+', 'p');
    return s;
}

ordered_json number_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ordered_json optional_number(const std::optional<double>& v) {
    return v ? number_or_null(*v) : ordered_json(nullptr);
}

ordered_json points_json(const std::vector<RatePoint>& pts) {
    ordered_json a = ordered_json::array();
    for (const auto& p : pts) {
        a.push_back({{"scale", number_or_null(p.scale)},
                     {"deviation", number_or_null(p.deviation)},
                     {"noise", number_or_null(p.noise)}});
    }
    return a;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot write '" + path.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) fail(ErrorKind::io, "write failed for '" + path.string() + "'");
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::io, "cannot read '" + path.string() + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        fail(ErrorKind::numeric, "SHA-256 digest failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

std::string curve_csv(const FrozenSpeedCurve& curve) {
    std::string out = "s,speed\n";
    for (std::size_t i = 0; i < curve.s.size(); ++i) {
        out += format_number(curve.s[i]) + ',' + format_number(curve.speeds[i]) + '\n';
    }
    return out;
}

std::string limits_csv(const RunRecord& r) {
    const auto cell = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
    const auto& rep = r.report;
    return "c0,cstar,d0,dstar,kpp,rate_rapid,rate_slow\n" + cell(r.has_c0 ? std::optional(rep.c0) : std::nullopt) +
           ',' + cell(r.has_cstar ? std::optional(rep.cstar) : std::nullopt) + ',' + cell(rep.d0) + ',' +
           cell(rep.dstar) + ',' + cell(rep.kpp) + ',' + cell(rep.rate_rapid) + ',' + cell(rep.rate_slow) + '\n';
}

std::string speeds_svg(const RunRecord& r) {
    const auto& est = r.report.estimates;
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
    for (const auto& e : est) {
        xlo = std::min(xlo, std::log10(e.T));
        xhi = std::max(xhi, std::log10(e.T));
        ylo = std::min(ylo, e.cbar - e.uncertainty);
        yhi = std::max(yhi, e.cbar + e.uncertainty);
    }
    if (r.has_c0) ylo = std::min(ylo, r.report.c0), yhi = std::max(yhi, r.report.c0);
    if (r.has_cstar) ylo = std::min(ylo, r.report.cstar), yhi = std::max(yhi, r.report.cstar);
    const Axis x = padded(xlo, xhi, kLeft, kWidth - kRight);
    const Axis y = padded(ylo, yhi, kHeight - kBottom, kTop);

    Svg svg;
    svg.frame("average speed against period", "T", "average speed");
    svg.ticks(x, y, true, false);
    if (r.has_c0) {
        svg.line(kLeft, y(r.report.c0), kWidth - kRight, y(r.report.c0), "#1f77b4", "6 4");
        svg.text(kWidth - kRight - 4, y(r.report.c0) - 4, "c0", "end");
    }
    if (r.has_cstar) {
        svg.line(kLeft, y(r.report.cstar), kWidth - kRight, y(r.report.cstar), "#d62728", "2 3");
        svg.text(kLeft + 4, y(r.report.cstar) - 4, "c*");
    }
    for (const auto& e : est) {
        const double px = x(std::log10(e.T));
        svg.line(px, y(e.cbar - e.uncertainty), px, y(e.cbar + e.uncertainty), "black");
        svg.circle(px, y(e.cbar), true, "black");
    }
    return svg.str();
}

std::string rate_svg(const RunRecord& r) {
    if (!r.rate) return {};
    const auto& fit = *r.rate;
    const bool rapid = r.config.kind == ExperimentKind::rapid_rate;
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
    for (const auto* set : {&fit.used, &fit.dropped}) {
        for (const auto& p : *set) {
            if (!(p.scale > 0.0) || !(p.deviation > 0.0)) continue;
            xlo = std::min(xlo, std::log10(p.scale));
            xhi = std::max(xhi, std::log10(p.scale));
            ylo = std::min(ylo, std::log10(p.deviation));
            yhi = std::max(yhi, std::log10(p.deviation));
        }
    }
    const Axis x = padded(xlo, xhi, kLeft, kWidth - kRight);
    const Axis y = padded(ylo, yhi, kHeight - kBottom, kTop);

    Svg svg;
    svg.frame(std::string(rapid ? "deviation from c0" : "deviation from c*") + ", slope " +
                  short_number(fit.exponent) + ", r2 " + short_number(fit.r2),
              rapid ? "T" : "1/T", "deviation");
    svg.ticks(x, y, true, true);
    // fitted line in log10 coordinates
    const auto line_y = [&](double lx) { return (fit.intercept + fit.exponent * lx * std::log(10.0)) / std::log(10.0); };
    svg.line(x(x.lo), y(line_y(x.lo)), x(x.hi), y(line_y(x.hi)), "#1f77b4");
    for (const auto& p : fit.used) svg.circle(x(std::log10(p.scale)), y(std::log10(p.deviation)), true, "black");
    for (const auto& p : fit.dropped) {
        if (p.scale > 0.0 && p.deviation > 0.0) {
            svg.circle(x(std::log10(p.scale)), y(std::log10(p.deviation)), false, "#d62728");
        }
    }
    return svg.str();
}

std::vector<std::pair<std::string, std::string>> render_outputs(const RunRecord& r, bool plots) {
    std::vector<std::pair<std::string, std::string>> files;
    if (!r.report.estimates.empty()) files.emplace_back("speeds.csv", r.report.speeds_csv());
    files.emplace_back("limits.csv", limits_csv(r));
    if (r.curve) files.emplace_back("frozen_curve.csv", curve_csv(*r.curve));
    if (r.config.traces) {
        for (std::size_t i = 0; i < r.traces.size(); ++i) {
            files.emplace_back("front_trace_T" + plain_name(r.report.estimates[i].T) + ".csv", trace_csv(r.traces[i]));
        }
    }
    if (plots) {
        if (!r.report.estimates.empty()) files.emplace_back("speeds.svg", speeds_svg(r));
        if (r.rate) files.emplace_back("rate.svg", rate_svg(r));
    }
    return files;
}

std::string manifest_json(const RunRecord& r) {
    ordered_json m;
    m["tool"] = "wavespeed-lab";
    m["version"] = r.tool_version;
    m["kind"] = to_string(r.config.kind);
    m["config_digest"] = r.config_digest;
    m["config"] = r.config.canonical();
    m["seed"] = r.config.seed;
    m["ok"] = r.ok();
    m["exit_code"] = r.exit_code();

    ordered_json stages = ordered_json::array();
    for (const auto& s : r.stages) {
        ordered_json e{{"name", s.name}, {"seconds", s.seconds}, {"status", s.ok() ? "ok" : to_string(*s.error)}};
        if (!s.ok()) e["message"] = s.message;
        stages.push_back(e);
    }
    m["stages"] = stages;

    ordered_json rep;
    rep["c0"] = r.has_c0 ? number_or_null(r.report.c0) : ordered_json(nullptr);
    rep["cstar"] = r.has_cstar ? number_or_null(r.report.cstar) : ordered_json(nullptr);
    rep["cstar_error"] = r.has_cstar ? number_or_null(r.cstar_error) : ordered_json(nullptr);
    rep["d0"] = optional_number(r.report.d0);
    rep["dstar"] = optional_number(r.report.dstar);
    rep["kpp"] = optional_number(r.report.kpp);
    rep["rate_rapid"] = optional_number(r.report.rate_rapid);
    rep["rate_slow"] = optional_number(r.report.rate_slow);
    ordered_json est = ordered_json::array();
    for (const auto& e : r.report.estimates) {
        est.push_back({{"T", e.T}, {"cbar", number_or_null(e.cbar)}, {"uncertainty", number_or_null(e.uncertainty)}});
    }
    rep["estimates"] = est;
    m["report"] = rep;

    if (r.rate) {
        m["rate_fit"] = {{"exponent", number_or_null(r.rate->exponent)},
                         {"intercept", number_or_null(r.rate->intercept)},
                         {"r2", number_or_null(r.rate->r2)},
                         {"used", points_json(r.rate->used)},
                         {"dropped", points_json(r.rate->dropped)}};
    }

    ordered_json checks = ordered_json::array();
    for (const auto& c : r.checks) {
        checks.push_back({{"name", c.name},
                          {"passed", c.passed},
                          {"value", number_or_null(c.value)},
                          {"threshold", number_or_null(c.threshold)},
                          {"detail", c.detail},
                          {"informational", c.informational}});
    }
    m["checks"] = checks;

    ordered_json files = ordered_json::array();
    for (const auto& f : r.files) files.push_back({{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    m["files"] = files;
    return m.dump(2) + '\n';
}

void emit_outputs(RunRecord& record, const std::string& dir, bool plots) {
    const fs::path root(dir);
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec || !fs::is_directory(root)) fail(ErrorKind::io, "cannot create output directory '" + dir + "'");

    std::vector<FileEntry> entries;
    std::set<std::string> written;
    for (const auto& [name, content] : render_outputs(record, plots)) {
        write_file(root / name, content);
        entries.push_back({name, sha256_hex(content), content.size()});
        written.insert(name);
    }
    // Files already in the directory are listed too so the inventory is complete.
    std::vector<std::string> others;
    for (const auto& e : fs::directory_iterator(root, ec)) {
        const std::string name = e.path().filename().string();
        if (e.is_regular_file() && name != "manifest.json" && !written.count(name)) others.push_back(name);
    }
    if (ec) fail(ErrorKind::io, "cannot list '" + dir + "'");
    std::sort(others.begin(), others.end());
    for (const auto& name : others) {
        const std::string content = read_file(root / name);
        entries.push_back({name, sha256_hex(content), content.size()});
    }

    RunRecord copy = record;
    copy.files = entries;
    write_file(root / "manifest.json", manifest_json(copy));
    record.files = std::move(entries);
}

}  // namespace wavespeed
