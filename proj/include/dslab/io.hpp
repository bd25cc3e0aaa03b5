#pragma once

// Serialization: field/spinor/surface CSV, OBJ meshes of coordinate
// projections, JSON-lines diagnostics, deterministic SVG drift charts and a
// flat sectioned key=value config format. Numbers are written with
// round-trip precision ("%.17g"); identical inputs produce identical bytes.

#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dslab/flow.hpp"
#include "dslab/weierstrass.hpp"

namespace dslab {

using Json = nlohmann::ordered_json;

namespace detail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string fmt2(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    return out;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open for reading: " + path);
    return in;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Field / spinor / surface CSV
// ---------------------------------------------------------------------------

inline void write_field_csv(const std::string& path, const ComplexField& f) {
    auto out = detail::open_out(path);
    const GridSpec& g = f.spec();
    out << "# field nx=" << g.nx << " ny=" << g.ny << " lx=" << detail::fmt(g.lx)
        << " ly=" << detail::fmt(g.ly) << "\n";
    out << "x,y,re,im\n";
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            out << detail::fmt(g.x(i)) << ',' << detail::fmt(g.y(j)) << ','
                << detail::fmt(f.at(i, j).real()) << ',' << detail::fmt(f.at(i, j).imag())
                << "\n";
}

namespace detail {

inline GridSpec parse_grid_header(const std::string& line, const char* tag) {
    int nx = 0, ny = 0;
    double lx = 0, ly = 0;
    char tagbuf[32];
    if (std::sscanf(line.c_str(), "# %31s nx=%d ny=%d lx=%lf ly=%lf", tagbuf, &nx, &ny, &lx,
                    &ly) != 5 ||
        std::string(tagbuf) != tag)
        throw ConfigError(std::string("bad CSV header (expected '") + tag + "')");
    return GridSpec(nx, ny, lx, ly);
}

}  // namespace detail

inline ComplexField read_field_csv(const std::string& path) {
    auto in = detail::open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty field CSV: " + path);
    GridSpec g = detail::parse_grid_header(line, "field");
    if (!std::getline(in, line)) throw ConfigError("missing column header: " + path);
    ComplexField f(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!std::getline(in, line)) throw ConfigError("truncated field CSV: " + path);
            double x, y, re, im;
            if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &x, &y, &re, &im) != 4)
                throw ConfigError("bad field CSV row: " + line);
            f.at(i, j) = Complex(re, im);
        }
    return f;
}

/// Two blocks in one file, component 1 first.
inline void write_spinor_csv(const std::string& path, const SpinorField& s) {
    auto out = detail::open_out(path);
    const GridSpec& g = s.spec();
    out << "# spinor nx=" << g.nx << " ny=" << g.ny << " lx=" << detail::fmt(g.lx)
        << " ly=" << detail::fmt(g.ly) << "\n";
    out << "component,x,y,re,im\n";
    for (int comp = 1; comp <= 2; ++comp) {
        const ComplexField& c = (comp == 1) ? s.c1 : s.c2;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                out << comp << ',' << detail::fmt(g.x(i)) << ',' << detail::fmt(g.y(j)) << ','
                    << detail::fmt(c.at(i, j).real()) << ',' << detail::fmt(c.at(i, j).imag())
                    << "\n";
    }
}

inline SpinorField read_spinor_csv(const std::string& path) {
    auto in = detail::open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty spinor CSV: " + path);
    GridSpec g = detail::parse_grid_header(line, "spinor");
    if (!std::getline(in, line)) throw ConfigError("missing column header: " + path);
    ComplexField c1(g), c2(g);
    for (int comp = 1; comp <= 2; ++comp)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                if (!std::getline(in, line)) throw ConfigError("truncated spinor CSV: " + path);
                int cc;
                double x, y, re, im;
                if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lf,%lf", &cc, &x, &y, &re, &im) != 5 ||
                    cc != comp)
                    throw ConfigError("bad spinor CSV row: " + line);
                (comp == 1 ? c1 : c2).at(i, j) = Complex(re, im);
            }
    return SpinorField{std::move(c1), std::move(c2)};
}

inline void write_surface_csv(const std::string& path, const SurfaceR4& s) {
    auto out = detail::open_out(path);
    const GridSpec& g = s.grid;
    out << "# surface nx=" << g.nx << " ny=" << g.ny << " lx=" << detail::fmt(g.lx)
        << " ly=" << detail::fmt(g.ly) << "\n";
    out << "x,y,X1,X2,X3,X4\n";
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            out << detail::fmt(g.x(i)) << ',' << detail::fmt(g.y(j));
            for (int k = 0; k < 4; ++k) out << ',' << detail::fmt(s.x[k].at(i, j).real());
            out << "\n";
        }
}

/// Coordinates-only surface read-back (enough to re-render meshes).
struct SurfaceCoordinates {
    GridSpec grid;
    std::array<ComplexField, 4> x;
};

inline SurfaceCoordinates read_surface_csv(const std::string& path) {
    auto in = detail::open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty surface CSV: " + path);
    GridSpec g = detail::parse_grid_header(line, "surface");
    if (!std::getline(in, line)) throw ConfigError("missing column header: " + path);
    SurfaceCoordinates s{g, {ComplexField(g), ComplexField(g), ComplexField(g), ComplexField(g)}};
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!std::getline(in, line)) throw ConfigError("truncated surface CSV: " + path);
            double x, y, c[4];
            if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf", &x, &y, &c[0], &c[1], &c[2],
                            &c[3]) != 6)
                throw ConfigError("bad surface CSV row: " + line);
            for (int k = 0; k < 4; ++k) s.x[k].at(i, j) = c[k];
        }
    return s;
}

// ---------------------------------------------------------------------------
// OBJ export
// ---------------------------------------------------------------------------

/// ASCII OBJ of a 3-of-4 coordinate projection with grid connectivity:
/// nx*ny vertices, (nx-1)(ny-1) quads split into triangles (the fundamental
/// domain is meshed open, no wrap-around).
inline void write_obj(const std::string& path, const std::array<ComplexField, 4>& x,
                      const std::array<int, 3>& projection) {
    for (int k : projection)
        if (k < 1 || k > 4) throw ConfigError("obj projection indices must be in 1..4");
    const GridSpec& g = x[0].spec();
    auto out = detail::open_out(path);
    out << "# surface projection X" << projection[0] << " X" << projection[1] << " X"
        << projection[2] << "\n";
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            out << 'v';
            for (int k : projection) out << ' ' << detail::fmt(x[k - 1].at(i, j).real());
            out << "\n";
        }
    auto vid = [&](int i, int j) { return j * g.nx + i + 1; };
    for (int j = 0; j + 1 < g.ny; ++j)
        for (int i = 0; i + 1 < g.nx; ++i) {
            out << "f " << vid(i, j) << ' ' << vid(i + 1, j) << ' ' << vid(i + 1, j + 1) << "\n";
            out << "f " << vid(i, j) << ' ' << vid(i + 1, j + 1) << ' ' << vid(i, j + 1) << "\n";
        }
}

inline void write_obj(const std::string& path, const SurfaceR4& s,
                      const std::array<int, 3>& projection) {
    write_obj(path, s.x, projection);
}

// ---------------------------------------------------------------------------
// Diagnostics records: JSON lines and CSV
// ---------------------------------------------------------------------------

inline Json to_json(const DiagnosticsRecord& r) {
    Json j;
    j["t"] = r.t;
    j["W"] = r.W;
    Json jj;
    for (size_t k = 0; k < 4; ++k)
        jj[to_string(kAllJKinds[k])] = Json::array({r.J[k].real(), r.J[k].imag()});
    j["J"] = std::move(jj);
    j["dirac_residual_max"] = r.dirac_residual_max;
    j["closedness_max"] = r.closedness_max;
    return j;
}

inline DiagnosticsRecord record_from_json(const Json& j) {
    DiagnosticsRecord r;
    r.t = j.at("t").get<double>();
    r.W = j.at("W").get<double>();
    for (size_t k = 0; k < 4; ++k) {
        const Json& a = j.at("J").at(to_string(kAllJKinds[k]));
        r.J[k] = Complex(a.at(0).get<double>(), a.at(1).get<double>());
    }
    r.dirac_residual_max = j.at("dirac_residual_max").get<double>();
    r.closedness_max = j.at("closedness_max").get<double>();
    return r;
}

inline void write_diagnostics_jsonl(const std::string& path,
                                    const std::vector<DiagnosticsRecord>& records) {
    auto out = detail::open_out(path);
    for (const auto& r : records) out << to_json(r).dump() << "\n";
}

inline std::vector<DiagnosticsRecord> read_diagnostics_jsonl(const std::string& path) {
    auto in = detail::open_in(path);
    std::vector<DiagnosticsRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        records.push_back(record_from_json(Json::parse(line)));
    }
    if (records.empty()) throw ConfigError("no diagnostics records in " + path);
    return records;
}

inline void write_conservation_csv(const std::string& path,
                                   const std::vector<DiagnosticsRecord>& records) {
    auto out = detail::open_out(path);
    out << "t,W";
    for (auto kind : kAllJKinds) out << ',' << to_string(kind) << "_re," << to_string(kind)
                                     << "_im";
    out << ",dirac_residual_max,closedness_max\n";
    for (const auto& r : records) {
        out << detail::fmt(r.t) << ',' << detail::fmt(r.W);
        for (size_t k = 0; k < 4; ++k)
            out << ',' << detail::fmt(r.J[k].real()) << ',' << detail::fmt(r.J[k].imag());
        out << ',' << detail::fmt(r.dirac_residual_max) << ',' << detail::fmt(r.closedness_max)
            << "\n";
    }
}

// ---------------------------------------------------------------------------
// SVG drift charts
// ---------------------------------------------------------------------------

struct SvgSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;  // (t, value)
};

/// Minimal SVG 1.1 line chart, log10 ordinate, fixed palette; byte-stable for
/// identical inputs.
inline void write_svg_chart(const std::string& path, const std::string& title,
                            const std::vector<SvgSeries>& series) {
    const double W = 900, H = 480, ml = 90, mr = 30, mt = 50, mb = 60;
    const double floor_value = 1e-18;
    double tmin = 0, tmax = 1, vmin = 1e300, vmax = -1e300;
    bool any = false;
    for (const auto& s : series)
        for (auto [t, v] : s.points) {
            const double lv = std::log10(std::max(std::abs(v), floor_value));
            if (!any) {
                tmin = tmax = t;
                any = true;
            }
            tmin = std::min(tmin, t);
            tmax = std::max(tmax, t);
            vmin = std::min(vmin, lv);
            vmax = std::max(vmax, lv);
        }
    if (!any) {
        vmin = -18;
        vmax = 0;
    }
    if (tmax <= tmin) tmax = tmin + 1;
    if (vmax <= vmin) vmax = vmin + 1;
    auto px = [&](double t) { return ml + (t - tmin) / (tmax - tmin) * (W - ml - mr); };
    auto py = [&](double lv) { return H - mb - (lv - vmin) / (vmax - vmin) * (H - mt - mb); };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
    auto out = detail::open_out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"900\" "
           "height=\"480\" viewBox=\"0 0 900 480\">\n";
    out << "<rect x=\"0\" y=\"0\" width=\"900\" height=\"480\" fill=\"white\"/>\n";
    out << "<text x=\"450\" y=\"28\" font-family=\"monospace\" font-size=\"16\" "
           "text-anchor=\"middle\">" << title << "</text>\n";
    out << "<line x1=\"" << detail::fmt2(ml) << "\" y1=\"" << detail::fmt2(H - mb) << "\" x2=\""
        << detail::fmt2(W - mr) << "\" y2=\"" << detail::fmt2(H - mb)
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << detail::fmt2(ml) << "\" y1=\"" << detail::fmt2(mt) << "\" x2=\""
        << detail::fmt2(ml) << "\" y2=\"" << detail::fmt2(H - mb) << "\" stroke=\"black\"/>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        const double t = tmin + (tmax - tmin) * tick / 4.0;
        const double lv = vmin + (vmax - vmin) * tick / 4.0;
        char lbl[40];
        std::snprintf(lbl, sizeof lbl, "%.3g", t);
        out << "<text x=\"" << detail::fmt2(px(t)) << "\" y=\"" << detail::fmt2(H - mb + 20)
            << "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\">" << lbl
            << "</text>\n";
        std::snprintf(lbl, sizeof lbl, "1e%.1f", lv);
        out << "<text x=\"" << detail::fmt2(ml - 8) << "\" y=\"" << detail::fmt2(py(lv) + 4)
            << "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"end\">" << lbl
            << "</text>\n";
    }
    int idx = 0;
    for (const auto& s : series) {
        const char* color = palette[idx % 5];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (auto [t, v] : s.points) {
            const double lv = std::log10(std::max(std::abs(v), floor_value));
            if (!first) out << ' ';
            out << detail::fmt2(px(t)) << ',' << detail::fmt2(py(lv));
            first = false;
        }
        out << "\"/>\n";
        out << "<text x=\"" << detail::fmt2(W - mr - 200) << "\" y=\""
            << detail::fmt2(mt + 16 * (idx + 1)) << "\" font-family=\"monospace\" "
            << "font-size=\"12\" fill=\"" << color << "\">" << s.label << "</text>\n";
        ++idx;
    }
    out << "</svg>\n";
}

/// Relative-drift charts rendered from diagnostics records.
inline void write_drift_svgs(const std::string& w_path, const std::string& j_path,
                             const std::vector<DiagnosticsRecord>& records) {
    SvgSeries w{"|W(t)-W(0)| / max(|W(0)|,1)", {}};
    const double w0 = records.front().W;
    const double wscale = std::max(std::abs(w0), 1.0);
    std::vector<SvgSeries> js;
    for (auto kind : kAllJKinds) js.push_back({std::string("|dJ| ") + to_string(kind), {}});
    for (const auto& r : records) {
        w.points.push_back({r.t, std::abs(r.W - w0) / wscale});
        for (size_t k = 0; k < 4; ++k)
            js[k].points.push_back(
                {r.t, std::abs(r.J[k] - records.front().J[k]) / (1.0 + std::abs(records.front().J[k]))});
    }
    write_svg_chart(w_path, "Willmore drift", {w});
    write_svg_chart(j_path, "J(h) drift", js);
}

// ---------------------------------------------------------------------------
// Flat sectioned key=value config
// ---------------------------------------------------------------------------

struct ConfigMap {
    std::map<std::string, std::map<std::string, std::string>> sections;

    bool has(const std::string& sec, const std::string& key) const {
        auto s = sections.find(sec);
        return s != sections.end() && s->second.count(key) > 0;
    }
    std::string get(const std::string& sec, const std::string& key,
                    const std::string& fallback) const {
        auto s = sections.find(sec);
        if (s == sections.end()) return fallback;
        auto k = s->second.find(key);
        return k == s->second.end() ? fallback : k->second;
    }
    double get_double(const std::string& sec, const std::string& key, double fallback) const {
        const std::string v = get(sec, key, "");
        if (v.empty()) return fallback;
        try {
            size_t pos = 0;
            const double d = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return d;
        } catch (const std::exception&) {
            throw ConfigError("bad numeric value for [" + sec + "] " + key + ": " + v);
        }
    }
    long get_long(const std::string& sec, const std::string& key, long fallback) const {
        const std::string v = get(sec, key, "");
        if (v.empty()) return fallback;
        try {
            size_t pos = 0;
            const long l = std::stol(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return l;
        } catch (const std::exception&) {
            throw ConfigError("bad integer value for [" + sec + "] " + key + ": " + v);
        }
    }
};

inline ConfigMap parse_config_text(const std::string& text) {
    ConfigMap cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line.erase(comment);
        auto strip = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        line = strip(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) + ": bad section");
            section = strip(line.substr(1, line.size() - 2));
            cfg.sections[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        cfg.sections[section][key] = value;
    }
    return cfg;
}

inline ConfigMap parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config file not found: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace dslab
