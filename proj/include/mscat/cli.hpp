#pragma once
// Command-line front end: run specifications, validation diagnostics,
// execution into a column table, and deterministic CSV/JSON rendering.
//
// Subcommands and their scan variable:
//   fermi-two-spheres    sweep r      -> E / mu per separation
//   fermi-sphere-plate   sweep gap    -> E / mu per gap
//   fermi-n-spheres      sweep k_F    -> E / mu per Fermi level
//   scalar-two-spheres   sweep r      -> E / (hbar c) per separation
//   scalar-sphere-plate  sweep gap    -> E / (hbar c) per gap
//   dos-scan             k grid       -> counting function n_c(k)
//   fig2                 log2(L/a)    -> normalized sphere-plate curves
//
// Output is CSV (default) or JSON, always with a `.meta.json` sidecar when
// written to a file.  Values are printed with 17 significant digits so that
// reruns are byte-identical.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "casimir.hpp"
#include "geometry.hpp"
#include "parallel.hpp"
#include "scattering.hpp"

namespace mscat::cli {

using ordered_json = nlohmann::ordered_json;

struct Diagnostic {
    std::string code;
    std::string message;
};

struct ScanRange {
    double lo = 0.0, hi = 0.0;
    int n = 0;
    bool present = false;
};

struct RunSpec {
    std::string command;
    // inline geometry
    double a1 = 1.0, a2 = 1.0, r = 0.0;  // two-sphere family
    double a = 1.0, gap = 0.0;           // sphere-plate family
    std::string geometry_file;           // n-sphere / dos-scan arrangements
    // physics
    double k_F = 1.0;
    int nu_deg = 1;
    // scan
    ScanRange scan;
    // fig2 grid
    int points = 29;
    double log2_lo = -2.0, log2_hi = 5.0;
    // numerics
    double tol = 1e-7;
    int lmax_override = -1;
    // io
    std::string out;
    std::string format = "csv";
};

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<bool> converged;       // one flag per row
    bool converged_column = true;      // fig2 reports convergence in the sidecar
    int l_max_max = 0;
};

struct RunResult {
    Table table;
    int exit_code = 0;  // 0 ok, 3 when any row failed to converge
};

// "lo:hi:n" -> ScanRange; returns false on malformed input
inline bool parse_scan(const std::string& text, ScanRange& out) {
    double lo = 0.0, hi = 0.0;
    int n = 0;
    char tail = 0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%d%c", &lo, &hi, &n, &tail) != 3)
        return false;
    out = {lo, hi, n, true};
    return true;
}

// geometry file schema:
// { "spheres": [ {"id": 0, "radius": 1.0, "center": [x, y, z]}, ... ],
//   "frames":  [ {"euler_zyz": [alpha, beta, gamma]}, ... ] }   (optional)
inline Configuration load_geometry_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open geometry file: " + path);
    ordered_json doc = ordered_json::parse(in);  // throws on bad JSON
    if (!doc.contains("spheres") || !doc["spheres"].is_array() ||
        doc["spheres"].empty())
        throw std::runtime_error("geometry file needs a non-empty 'spheres' array");
    std::vector<Scatterer> spheres;
    int next_id = 0;
    for (const auto& s : doc["spheres"]) {
        Scatterer sc;
        sc.id = s.value("id", next_id);
        ++next_id;
        if (!s.contains("radius") || !s.contains("center"))
            throw std::runtime_error("each sphere needs 'radius' and 'center'");
        sc.radius = s["radius"].get<double>();
        const auto& c = s["center"];
        if (!c.is_array() || c.size() != 3)
            throw std::runtime_error("'center' must be [x, y, z]");
        sc.center = {c[0].get<double>(), c[1].get<double>(), c[2].get<double>()};
        spheres.push_back(sc);
    }
    std::vector<Rot3> frames;
    if (doc.contains("frames")) {
        for (const auto& f : doc["frames"]) {
            const auto& e = f.at("euler_zyz");
            if (!e.is_array() || e.size() != 3)
                throw std::runtime_error("'euler_zyz' must be [alpha, beta, gamma]");
            frames.push_back(Rot3::from_euler_zyz(e[0].get<double>(),
                                                  e[1].get<double>(),
                                                  e[2].get<double>()));
        }
        if (frames.size() != spheres.size())
            throw std::runtime_error("'frames' must match 'spheres' in length");
    }
    return build_configuration(spheres, frames);
}

namespace detail_cli {

inline bool is_two_sphere_cmd(const std::string& c) {
    return c == "fermi-two-spheres" || c == "scalar-two-spheres";
}
inline bool is_plate_cmd(const std::string& c) {
    return c == "fermi-sphere-plate" || c == "scalar-sphere-plate";
}
inline bool is_fermi_cmd(const std::string& c) {
    return c.rfind("fermi", 0) == 0;
}

inline std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail_cli

// compact echo of the resolved specification, stable key order
inline ordered_json spec_to_json(const RunSpec& s) {
    using namespace detail_cli;
    ordered_json j;
    j["command"] = s.command;
    if (is_two_sphere_cmd(s.command) ||
        (s.command == "dos-scan" && s.geometry_file.empty())) {
        j["a1"] = s.a1;
        j["a2"] = s.a2;
        if (!s.scan.present || s.command == "dos-scan") j["r"] = s.r;
    }
    if (is_plate_cmd(s.command)) {
        j["a"] = s.a;
        if (!s.scan.present) j["gap"] = s.gap;
    }
    if (!s.geometry_file.empty()) j["geometry"] = s.geometry_file;
    if (is_fermi_cmd(s.command)) {
        if (!(s.command == "fermi-n-spheres" && s.scan.present)) j["kf"] = s.k_F;
        j["nu_deg"] = s.nu_deg;
    }
    if (s.command == "dos-scan") j["nu_deg"] = s.nu_deg;
    if (s.scan.present) {
        j["scan"] = {{"lo", s.scan.lo}, {"hi", s.scan.hi}, {"n", s.scan.n}};
    }
    if (s.command == "fig2") {
        j["points"] = s.points;
        j["log2_lo"] = s.log2_lo;
        j["log2_hi"] = s.log2_hi;
    }
    j["tol"] = s.tol;
    j["lmax_override"] = s.lmax_override;
    j["format"] = s.format;
    return j;
}

inline std::vector<Diagnostic> validate(const RunSpec& s) {
    using namespace detail_cli;
    std::vector<Diagnostic> out;
    auto add = [&](const char* code, const std::string& msg) {
        out.push_back({code, msg});
    };

    static const std::vector<std::string> known{
        "fermi-two-spheres", "fermi-sphere-plate", "fermi-n-spheres",
        "scalar-two-spheres", "scalar-sphere-plate", "dos-scan", "fig2"};
    if (std::find(known.begin(), known.end(), s.command) == known.end()) {
        add("CMD_UNKNOWN", "unknown command: " + s.command);
        return out;
    }

    if (!(s.tol > 0.0)) add("TOL_NONPOSITIVE", "tol must be positive");
    if (s.lmax_override < -1 || s.lmax_override > 64)
        add("LMAX_INVALID", "lmax-override must be -1 (auto) or 0..64");
    if (s.format != "csv" && s.format != "json")
        add("FORMAT_INVALID", "format must be csv or json");

    if (is_fermi_cmd(s.command)) {
        if (s.nu_deg < 1) add("PHYS_NU_NONPOSITIVE", "nu-deg must be >= 1");
        const bool kf_swept = (s.command == "fermi-n-spheres" && s.scan.present);
        if (!kf_swept && !(s.k_F > 0.0))
            add("PHYS_KF_NONPOSITIVE", "kf must be positive");
        if (kf_swept && !(s.scan.lo > 0.0))
            add("PHYS_KF_NONPOSITIVE", "swept kf must start above zero");
    }
    if (s.command == "dos-scan" && s.nu_deg < 1)
        add("PHYS_NU_NONPOSITIVE", "nu-deg must be >= 1");

    if (s.scan.present) {
        if (s.scan.n < 2) add("SCAN_TOO_FEW_POINTS", "scan needs at least 2 points");
        if (!(s.scan.lo < s.scan.hi))
            add("SCAN_BOUNDS_INVALID", "scan needs lo < hi");
    }

    if (is_two_sphere_cmd(s.command) ||
        (s.command == "dos-scan" && s.geometry_file.empty())) {
        if (!(s.a1 > 0.0) || !(s.a2 > 0.0))
            add("GEOM_RADIUS_NONPOSITIVE", "sphere radii must be positive");
        const double touch = s.a1 + s.a2;
        const double r_min = (is_two_sphere_cmd(s.command) && s.scan.present)
                                 ? s.scan.lo
                                 : s.r;
        if (!(r_min > touch))
            add("GEOM_OVERLAP",
                "spheres must be separated: need r > a1 + a2 = " +
                    fmt17(touch));
    }
    if (is_plate_cmd(s.command)) {
        if (!(s.a > 0.0))
            add("GEOM_RADIUS_NONPOSITIVE", "sphere radius must be positive");
        const double gap_min = s.scan.present ? s.scan.lo : s.gap;
        if (!(gap_min > 0.0))
            add("GEOM_OVERLAP", "sphere-plate gap must be positive");
    }

    if (s.command == "fermi-n-spheres" && s.geometry_file.empty())
        add("GEOM_FILE_INVALID", "fermi-n-spheres needs --geometry <file>");
    if (!s.geometry_file.empty()) {
        std::ifstream probe(s.geometry_file);
        if (!probe) {
            add("GEOM_FILE_MISSING", "cannot open geometry file: " + s.geometry_file);
        } else {
            try {
                (void)load_geometry_file(s.geometry_file);
            } catch (const OverlapError& e) {
                add("GEOM_OVERLAP", e.what());
            } catch (const DuplicateCenterError& e) {
                add("GEOM_DUPLICATE_CENTER", e.what());
            } catch (const DomainError& e) {
                add("GEOM_RADIUS_NONPOSITIVE", e.what());
            } catch (const std::exception& e) {
                add("GEOM_FILE_INVALID", e.what());
            }
        }
    }

    if (s.command == "dos-scan") {
        if (!s.scan.present) {
            add("SCAN_TOO_FEW_POINTS", "dos-scan needs --scan lo:hi:n");
        } else if (!(s.scan.lo > 0.0)) {
            add("SCAN_BOUNDS_INVALID", "dos-scan grid must start above k = 0");
        }
    }
    if (s.command == "fig2") {
        if (s.points < 1) add("SCAN_TOO_FEW_POINTS", "fig2 needs points >= 1");
        if (s.points > 1 && !(s.log2_lo < s.log2_hi))
            add("SCAN_BOUNDS_INVALID", "fig2 needs log2-lo < log2-hi");
    }
    return out;
}

namespace detail_cli {

inline std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(static_cast<size_t>(n));
    if (n == 1) {
        v[0] = lo;
        return v;
    }
    for (int i = 0; i < n; ++i)
        v[static_cast<size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
    return v;
}

// run one energy row, converting convergence failures into a flag
template <class F>
void energy_row(F&& compute, std::vector<double>& row, bool& ok) {
    try {
        const EnergyResult e = compute();
        row.push_back(e.value);
        row.push_back(static_cast<double>(e.l_max));
        row.push_back(e.quad_error);
        ok = true;
    } catch (const ToleranceNotMet& e) {
        row.push_back(e.best_estimate);
        row.push_back(-1.0);
        row.push_back(e.achieved_error);
        ok = false;
    } catch (const NoConvergence&) {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
        row.push_back(-1.0);
        row.push_back(std::numeric_limits<double>::quiet_NaN());
        ok = false;
    } catch (const RefinementBudgetExceeded&) {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
        row.push_back(-1.0);
        row.push_back(std::numeric_limits<double>::quiet_NaN());
        ok = false;
    }
}

}  // namespace detail_cli

inline RunResult execute(const RunSpec& s) {
    using namespace detail_cli;
    RunResult res;
    Table& t = res.table;

    auto finish = [&]() {
        bool all_ok = true;
        for (bool c : t.converged) all_ok = all_ok && c;
        for (size_t ci = 0; ci < t.columns.size(); ++ci)
            if (t.columns[ci] == "l_max")
                for (const auto& row : t.rows)
                    t.l_max_max = std::max(t.l_max_max, static_cast<int>(row[ci]));
        res.exit_code = all_ok ? 0 : 3;
        return res;
    };

    if (s.command == "fermi-two-spheres" || s.command == "scalar-two-spheres" ||
        s.command == "fermi-sphere-plate" || s.command == "scalar-sphere-plate" ||
        s.command == "fermi-n-spheres") {
        const bool fermi = is_fermi_cmd(s.command);
        const bool plate = is_plate_cmd(s.command);
        const bool nsph = (s.command == "fermi-n-spheres");
        std::vector<double> sweep;
        if (s.scan.present)
            sweep = linspace(s.scan.lo, s.scan.hi, s.scan.n);
        else
            sweep = {nsph ? s.k_F : (plate ? s.gap : s.r)};

        t.columns = {nsph ? "k_F" : (plate ? "gap" : "r"),
                     fermi ? "energy_mu" : "energy_hbar_c", "l_max", "quad_error"};
        t.rows.assign(sweep.size(), {});
        t.converged.assign(sweep.size(), false);

        Configuration file_cfg;
        if (nsph) file_cfg = load_geometry_file(s.geometry_file);

        parallel_for(static_cast<int>(sweep.size()), [&](int idx) {
            const auto i = static_cast<std::size_t>(idx);
            const double x = sweep[i];
            auto& row = t.rows[i];
            row.push_back(x);
            bool ok = false;
            energy_row(
                [&]() -> EnergyResult {
                    if (nsph)
                        return fermionic_energy_exact(
                            make_n_spheres(file_cfg), FermiGas{x, s.nu_deg}, s.tol,
                            4000, s.lmax_override);
                    GeometryQuery g = plate ? make_sphere_plate(s.a, x)
                                            : make_two_spheres(s.a1, s.a2, x);
                    if (fermi)
                        return fermionic_energy_exact(g, FermiGas{s.k_F, s.nu_deg},
                                                      s.tol, 4000, s.lmax_override);
                    return scalar_energy(g, s.tol, s.lmax_override);
                },
                row, ok);
            t.converged[i] = ok;
        });
        return finish();
    }

    if (s.command == "dos-scan") {
        const bool from_file = !s.geometry_file.empty();
        const Configuration cfg = from_file
                                      ? load_geometry_file(s.geometry_file)
                                      : two_sphere_config(s.a1, s.a2, s.r);
        const bool equal_pair = !from_file && s.a1 == s.a2;
        t.columns = {"k", "n_c"};
        if (equal_pair) {
            t.columns.push_back("n_c_swave");
            t.columns.push_back("n_c_semiclassical");
        } else {
            t.columns.push_back("n_c_swave");
        }
        const auto grid = linspace(s.scan.lo, s.scan.hi, s.scan.n);
        bool scan_ok = true;
        SpectralScan scan;
        int used_l = std::max(0, s.lmax_override);
        try {
            const DosScan ds = integrated_dos_exact(cfg, grid, s.tol, s.nu_deg,
                                                    4000, s.lmax_override);
            scan = ds.scan;
            used_l = ds.l_max;
        } catch (const ScanBudgetExceeded& e) {
            scan = e.partial;
            scan_ok = false;
        } catch (const NoConvergence&) {
            res.exit_code = 3;
            return res;
        }
        t.l_max_max = used_l;
        for (const double k : grid) {
            std::vector<double> row{k, -s.nu_deg * scan.phase_at(k) / pi};
            if (equal_pair) {
                row.push_back(nc_swave_two_spheres(s.a1, s.r, k, s.nu_deg).n_c);
                row.push_back(
                    nc_semiclassical_two_spheres(s.a1, s.r, k, s.nu_deg).n_c);
            } else {
                row.push_back(nc_swave_n_spheres(cfg, k, s.nu_deg).n_c);
            }
            t.rows.push_back(std::move(row));
            t.converged.push_back(scan_ok);
        }
        res.exit_code = scan_ok ? 0 : 3;
        return res;
    }

    if (s.command == "fig2") {
        t.columns = {"log2_L_over_a", "exact",      "swave",
                     "asymptote_2x90_pi4",          "gutzwiller_all_repeats",
                     "pfa_plate",     "pfa_sphere"};
        t.converged_column = false;
        const auto grid = linspace(s.log2_lo, s.log2_hi, s.points);
        t.rows.assign(grid.size(), {});
        t.converged.assign(grid.size(), false);
        const double asym = 2.0 * 90.0 / (pi * pi * pi * pi);
        parallel_for(static_cast<int>(grid.size()), [&](int idx) {
            const auto i = static_cast<std::size_t>(idx);
            const double L = std::exp2(grid[i]);  // sphere radius is the unit
            const double lead = pfa_leading_sphere_plate(1.0, L);
            auto& row = t.rows[i];
            row.assign(7, std::numeric_limits<double>::quiet_NaN());
            row[0] = grid[i];
            bool ok = true;
            try {
                row[1] = scalar_energy_sphere_plate(1.0, L, s.tol,
                                                    s.lmax_override).value / lead;
            } catch (const std::runtime_error&) {
                ok = false;
            }
            try {
                row[2] = scalar_energy_sphere_plate(1.0, L, s.tol, 0).value / lead;
            } catch (const std::runtime_error&) {
                ok = false;
            }
            row[3] = asym;
            row[4] = scalar_semiclassical_two_bounce(1.0, L, OrbitKind::sphere_plate,
                                                     0).value / lead;
            row[5] = pfa_sphere_plate(1.0, L, PfaBasis::plate).value / lead;
            row[6] = pfa_sphere_plate(1.0, L, PfaBasis::sphere).value / lead;
            t.converged[i] = ok;
        });
        bool all_ok = true;
        for (bool c : t.converged) all_ok = all_ok && c;
        res.exit_code = all_ok ? 0 : 3;
        return res;
    }

    throw DomainError("execute: unknown command " + s.command);
}

inline std::string render_csv(const RunSpec& s, const Table& t) {
    using detail_cli::fmt17;
    std::string out;
    out += "# mscat " + s.command + "\n";
    out += "# spec " + spec_to_json(s).dump() + "\n";
    for (size_t c = 0; c < t.columns.size(); ++c) {
        if (c) out += ",";
        out += t.columns[c];
    }
    if (t.converged_column) out += ",converged";
    out += "\n";
    for (size_t i = 0; i < t.rows.size(); ++i) {
        const auto& row = t.rows[i];
        for (size_t c = 0; c < row.size(); ++c) {
            if (c) out += ",";
            out += fmt17(row[c]);
        }
        if (t.converged_column) out += t.converged[i] ? ",1" : ",0";
        out += "\n";
    }
    return out;
}

inline std::string render_json(const RunSpec& s, const Table& t) {
    ordered_json doc;
    doc["command"] = s.command;
    doc["spec"] = spec_to_json(s);
    doc["columns"] = t.columns;
    doc["rows"] = t.rows;
    doc["converged"] = std::vector<int>();
    for (bool c : t.converged) doc["converged"].push_back(c ? 1 : 0);
    return doc.dump(2) + "\n";
}

inline std::string render_meta(const RunSpec& s, const Table& t, int exit_code) {
    ordered_json doc;
    doc["command"] = s.command;
    doc["format"] = s.format;
    doc["rows"] = t.rows.size();
    std::size_t conv = 0;
    for (bool c : t.converged) conv += c ? 1 : 0;
    doc["converged_rows"] = conv;
    doc["l_max_max"] = t.l_max_max;
    doc["exit_code"] = exit_code;
    doc["spec"] = spec_to_json(s);
    return doc.dump(2) + "\n";
}

// serialize an assembled scattering matrix for external inspection; entries
// are row-major [re, im] pairs in the sphere-major basis ordering
inline ordered_json mmatrix_to_json(const MMatrix& m) {
    ordered_json j;
    j["k"] = {m.k.real(), m.k.imag()};
    j["l_max"] = m.truncation.l_max;
    j["n_scatterers"] = m.n_scatterers;
    j["dim"] = m.dim();
    j["basis"] = "index = sphere * (l_max + 1)^2 + l * (l + 1) + m";
    j["symmetry"] =
        m.symmetry == MSymmetry::axial_m_blocks ? "axial_m_blocks" : "full";
    ordered_json rows = ordered_json::array();
    for (int i = 0; i < m.dim(); ++i) {
        ordered_json row = ordered_json::array();
        for (int c = 0; c < m.dim(); ++c) {
            const cplx z = m.blocks.at(i, c);
            row.push_back(ordered_json::array({z.real(), z.imag()}));
        }
        rows.push_back(std::move(row));
    }
    j["entries"] = std::move(rows);
    return j;
}

}  // namespace mscat::cli

#include <CLI11.hpp>

namespace mscat::cli {

namespace detail_cli {

struct OptionBinding {
    CLI::Option* opt = nullptr;
    std::function<void(const ordered_json&)> apply;
};
using Bindings = std::map<std::string, OptionBinding>;

inline void print_diags(const std::vector<Diagnostic>& diags) {
    for (const auto& d : diags)
        std::fprintf(stderr, "error [%s]: %s\n", d.code.c_str(),
                     d.message.c_str());
}

}  // namespace detail_cli

// Full command-line entry point.  Flags beat config-file values; validation
// failures exit 2 before any output file is touched; rows that fail to
// converge are flagged and turn the exit code into 3.
inline int main_entry(int argc, const char* const* argv) {
    using namespace detail_cli;
    CLI::App app{"multiple-scattering densities of states and Casimir energies"};
    app.require_subcommand(1);

    RunSpec spec;
    std::string scan_text, config_path;
    std::map<const CLI::App*, Bindings> bindings;

    auto bind = [&](CLI::App* sc, const std::string& flag, const std::string& key,
                    auto& target, const std::string& help) {
        CLI::Option* o = sc->add_option(flag, target, help);
        bindings[sc][key] = {o, [&target](const ordered_json& v) {
                                 target =
                                     v.get<std::remove_reference_t<decltype(target)>>();
                             }};
    };
    auto add_common = [&](CLI::App* sc) {
        bind(sc, "--tol", "tol", spec.tol, "relative tolerance");
        bind(sc, "--lmax-override", "lmax_override", spec.lmax_override,
             "fixed angular cutoff, -1 selects automatically");
        bind(sc, "--out", "out", spec.out,
             "output file (stdout when omitted); adds a .meta.json sidecar");
        bind(sc, "--format", "format", spec.format, "csv or json");
        sc->add_option("--config", config_path,
                       "JSON file supplying defaults for unset flags");
    };
    auto add_scan = [&](CLI::App* sc, const std::string& help) {
        bind(sc, "--scan", "scan", scan_text, help);
    };
    auto add_fermi = [&](CLI::App* sc) {
        bind(sc, "--kf", "kf", spec.k_F, "Fermi momentum");
        bind(sc, "--nu-deg", "nu_deg", spec.nu_deg, "internal degeneracy");
    };
    auto add_pair = [&](CLI::App* sc) {
        bind(sc, "--a1", "a1", spec.a1, "first sphere radius");
        bind(sc, "--a2", "a2", spec.a2, "second sphere radius");
        bind(sc, "--r", "r", spec.r, "center separation");
    };
    auto add_plate = [&](CLI::App* sc) {
        bind(sc, "--a", "a", spec.a, "sphere radius");
        bind(sc, "--gap", "gap", spec.gap, "closest sphere-plate distance");
    };

    CLI::App* c1 = app.add_subcommand("fermi-two-spheres",
                                      "Fermi-sea energy of two spheres");
    add_common(c1);
    add_pair(c1);
    add_fermi(c1);
    add_scan(c1, "separation sweep lo:hi:n");

    CLI::App* c2 = app.add_subcommand("fermi-sphere-plate",
                                      "Fermi-sea energy of a sphere facing a plate");
    add_common(c2);
    add_plate(c2);
    add_fermi(c2);
    add_scan(c2, "gap sweep lo:hi:n");

    CLI::App* c3 = app.add_subcommand("fermi-n-spheres",
                                      "Fermi-sea energy of an arrangement file");
    add_common(c3);
    bind(c3, "--geometry", "geometry", spec.geometry_file,
         "JSON arrangement file");
    add_fermi(c3);
    add_scan(c3, "Fermi momentum sweep lo:hi:n");

    CLI::App* c4 = app.add_subcommand("scalar-two-spheres",
                                      "zero-point energy of two spheres");
    add_common(c4);
    add_pair(c4);
    add_scan(c4, "separation sweep lo:hi:n");

    CLI::App* c5 = app.add_subcommand("scalar-sphere-plate",
                                      "zero-point energy of a sphere facing a plate");
    add_common(c5);
    add_plate(c5);
    add_scan(c5, "gap sweep lo:hi:n");

    CLI::App* c6 = app.add_subcommand("dos-scan",
                                      "counting function n_c(k) on a momentum grid");
    add_common(c6);
    add_pair(c6);
    bind(c6, "--geometry", "geometry", spec.geometry_file,
         "JSON arrangement file (overrides --a1/--a2/--r)");
    bind(c6, "--nu-deg", "nu_deg", spec.nu_deg, "internal degeneracy");
    add_scan(c6, "momentum grid lo:hi:n (required)");

    CLI::App* c7 = app.add_subcommand(
        "fig2", "normalized sphere-plate energy curves vs log2(gap/radius)");
    add_common(c7);
    bind(c7, "--points", "points", spec.points, "grid size");
    bind(c7, "--log2-lo", "log2_lo", spec.log2_lo, "smallest log2(gap/radius)");
    bind(c7, "--log2-hi", "log2_hi", spec.log2_hi, "largest log2(gap/radius)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);  // --help and friends
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    CLI::App* sub = app.get_subcommands().at(0);
    spec.command = sub->get_name();

    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) {
            print_diags({{"CONFIG_FILE_MISSING",
                          "cannot open config file: " + config_path}});
            return 2;
        }
        ordered_json doc;
        try {
            doc = ordered_json::parse(in);
        } catch (const std::exception& e) {
            print_diags({{"CONFIG_INVALID", e.what()}});
            return 2;
        }
        const Bindings& b = bindings[sub];
        for (const auto& [key, value] : doc.items()) {
            auto it = b.find(key);
            if (it == b.end()) {
                print_diags({{"CONFIG_UNKNOWN_KEY",
                              "config key not valid here: " + key}});
                return 2;
            }
            if (it->second.opt->count() > 0) continue;  // flags win
            try {
                it->second.apply(value);
            } catch (const std::exception& e) {
                print_diags({{"CONFIG_INVALID",
                              "config key " + key + ": " + e.what()}});
                return 2;
            }
        }
    }

    if (!scan_text.empty() && !parse_scan(scan_text, spec.scan)) {
        print_diags({{"SCAN_BOUNDS_INVALID",
                      "scan must be lo:hi:n, got: " + scan_text}});
        return 2;
    }

    const auto diags = validate(spec);
    if (!diags.empty()) {
        print_diags(diags);
        return 2;
    }

    RunResult rr;
    try {
        rr = execute(spec);
    } catch (const std::exception& e) {
        print_diags({{"INTERNAL", e.what()}});
        return 1;
    }

    const std::string body = spec.format == "json" ? render_json(spec, rr.table)
                                                   : render_csv(spec, rr.table);
    if (spec.out.empty()) {
        std::fwrite(body.data(), 1, body.size(), stdout);
    } else {
        std::ofstream f(spec.out, std::ios::binary);
        if (!f) {
            print_diags({{"IO_CANNOT_WRITE", "cannot open " + spec.out}});
            return 2;
        }
        f << body;
        f.close();
        if (!f) {
            print_diags({{"IO_CANNOT_WRITE", "short write to " + spec.out}});
            return 2;
        }
        std::ofstream m(spec.out + ".meta.json", std::ios::binary);
        if (!m) {
            print_diags({{"IO_CANNOT_WRITE",
                          "cannot open " + spec.out + ".meta.json"}});
            return 2;
        }
        m << render_meta(spec, rr.table, rr.exit_code);
    }
    return rr.exit_code;
}

}  // namespace mscat::cli
