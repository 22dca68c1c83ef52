#pragma once

// Artifact serialization: CSV writers for trajectories, maps, diagrams and
// eigenstructure tables; JSON builders for result summaries; INI parsing and
// emission for run configuration. Doubles are written in shortest
// round-trip form so artifacts reload bit-exactly.

#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "ujm/analysis.hpp"
#include "ujm/chaos.hpp"
#include "ujm/errors.hpp"
#include "ujm/fit.hpp"
#include "ujm/integrate.hpp"
#include "ujm/model.hpp"
#include "ujm/sweep.hpp"

namespace ujm {

inline std::string format_double(double v) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

// ---------------------------------------------------------------------------
// CSV

inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    out << "t,x,y,z,u\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const State& s = traj.states[i];
        out << format_double(traj.times[i]) << ',' << format_double(s.x) << ','
            << format_double(s.y) << ',' << format_double(s.z) << ',' << format_double(s.u)
            << '\n';
    }
}

inline void write_maxima_csv(std::ostream& out, const MaximaSeries& ms) {
    out << "t,value\n";
    for (std::size_t i = 0; i < ms.values.size(); ++i)
        out << format_double(ms.times[i]) << ',' << format_double(ms.values[i]) << '\n';
}

inline void write_poincare_csv(std::ostream& out, const NextMaximaMap& map) {
    out << "m_k,m_k1\n";
    for (const auto& [a, b] : map.points)
        out << format_double(a) << ',' << format_double(b) << '\n';
}

inline void write_hysteresis_csv(std::ostream& out, const HysteresisLoop& loop) {
    out << "drive,x\n";
    for (const auto& [drive, x] : loop.samples)
        out << format_double(drive) << ',' << format_double(x) << '\n';
}

// long form, one row per recorded maximum; failed columns contribute no rows
inline void write_bifurcation_csv(std::ostream& out, const BifurcationDiagram& d) {
    out << "m,u_max\n";
    for (const auto& pt : d.points) {
        if (pt.failed) continue;
        for (double v : pt.maxima) out << format_double(pt.m) << ',' << format_double(v) << '\n';
    }
}

inline void write_equilibria_csv(std::ostream& out, const std::vector<StabilityPoint>& rows) {
    out << "m,x,y,z,u,re1,im1,re2,im2,re3,im3,re4,im4,stable_pair_re,unstable_pair_re,"
           "is_unstable,residual\n";
    for (const auto& r : rows) {
        out << format_double(r.m) << ',' << format_double(r.fp.state.x) << ','
            << format_double(r.fp.state.y) << ',' << format_double(r.fp.state.z) << ','
            << format_double(r.fp.state.u);
        for (const auto& ev : r.eig.eigenvalues)
            out << ',' << format_double(ev.real()) << ',' << format_double(ev.imag());
        out << ',' << format_double(r.eig.stable_pair_re) << ','
            << format_double(r.eig.unstable_pair_re) << ',' << (r.eig.is_unstable ? 1 : 0) << ','
            << format_double(r.fp.residual) << '\n';
    }
}

inline void write_lyapunov_history_csv(std::ostream& out, const LyapunovResult& res) {
    out << "t,l1,l2,l3,l4\n";
    for (const auto& row : res.convergence_history) {
        out << format_double(row[0]);
        for (int j = 1; j <= 4; ++j) out << ',' << format_double(row[j]);
        out << '\n';
    }
}

template <class WriteFn>
void save_csv(const std::string& path, WriteFn&& write) {
    std::ofstream out(path);
    if (!out) throw error("cannot open " + path + " for writing");
    write(out);
    out.flush();
    if (!out) throw error("write to " + path + " failed");
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json state_json(const State& s) {
    return nlohmann::json{{"x", s.x}, {"y", s.y}, {"z", s.z}, {"u", s.u}};
}

inline nlohmann::json classification_json(const AttractorClassification& c) {
    return nlohmann::json{
        {"kind", to_string(c.kind)}, {"zero_threshold", c.zero_threshold}, {"label", c.label}};
}

inline nlohmann::json lyapunov_json(const LyapunovResult& r) {
    return nlohmann::json{{"spectrum", r.spectrum},
                          {"d_ky", r.d_ky},
                          {"renorm_interval", r.renorm_interval},
                          {"total_time", r.total_time},
                          {"mean_trace", r.mean_trace},
                          {"spectrum_sum", r.spectrum[0] + r.spectrum[1] + r.spectrum[2] +
                                               r.spectrum[3]},
                          {"attractor", classification_json(r.attractor)},
                          {"final_state", state_json(r.final_state)}};
}

inline nlohmann::json fit_json(const FitResult& r) {
    return nlohmann::json{{"a", r.coeffs.a},
                          {"b", r.coeffs.b},
                          {"c", r.coeffs.c},
                          {"r_squared", r.r_squared},
                          {"residual_norm", r.residual_norm},
                          {"iterations", r.iterations},
                          {"converged", r.converged},
                          {"rank_deficient", r.rank_deficient},
                          {"covariance_diag", r.covariance_diag}};
}

inline nlohmann::json derived_json(const DerivedParams& d,
                                   const std::vector<DiscrepancyNote>& notes) {
    nlohmann::json jnotes = nlohmann::json::array();
    for (const auto& n : notes)
        jnotes.push_back({{"quantity", n.quantity},
                          {"computed", n.computed},
                          {"reference", n.reference},
                          {"relative_deviation", n.relative_deviation},
                          {"detail", n.detail}});
    return nlohmann::json{{"k", d.k},
                          {"beta2", d.beta2},
                          {"v_bias_prime", d.v_bias_prime},
                          {"a0", d.a0},
                          {"a1", d.a1},
                          {"a2", d.a2},
                          {"mu", d.mu},
                          {"discrepancy_notes", jnotes}};
}

inline nlohmann::json summary_json(const DiagramSummary& s) {
    nlohmann::json cols = nlohmann::json::array();
    for (const auto& c : s.columns) {
        nlohmann::json col{{"m", c.m}, {"failed", c.failed}};
        if (c.failed) {
            col["diagnostic"] = c.diagnostic;
        } else {
            col["count"] = c.count;
            col["min"] = c.min;
            col["max"] = c.max;
            col["spread"] = c.spread;
            col["branch_count"] = c.branch_count;
        }
        cols.push_back(std::move(col));
    }
    return nlohmann::json{{"columns", cols}, {"failed_count", s.failed_count}};
}

inline nlohmann::json map_report_json(const MapStructureReport& r) {
    return nlohmann::json{{"kind", to_string(r.kind)},
                          {"cluster_count", r.cluster_count},
                          {"diameter", r.diameter},
                          {"max_gap_ratio", r.max_gap_ratio},
                          {"occupancy", r.occupancy},
                          {"detail", r.detail}};
}

inline nlohmann::json hysteresis_json(const HysteresisLoop& loop) {
    return nlohmann::json{{"drive_offset", loop.drive_offset},
                          {"drive_amplitude", loop.drive_amplitude},
                          {"drive_freq", loop.drive_freq},
                          {"loop_area", loop.loop_area},
                          {"pinch_distance", loop.pinch_distance},
                          {"samples", loop.samples.size()}};
}

inline nlohmann::json equilibria_json(const std::vector<StabilityPoint>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json eig = nlohmann::json::array();
        for (const auto& ev : r.eig.eigenvalues)
            eig.push_back({{"re", ev.real()}, {"im", ev.imag()}});
        arr.push_back({{"m", r.m},
                       {"state", state_json(r.fp.state)},
                       {"residual", r.fp.residual},
                       {"warning", r.fp.warning},
                       {"eigenvalues", eig},
                       {"stable_pair_re", r.eig.stable_pair_re},
                       {"unstable_pair_re", r.eig.unstable_pair_re},
                       {"is_unstable", r.eig.is_unstable}});
    }
    return nlohmann::json{{"points", arr}};
}

inline void save_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw error("cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
    out.flush();
    if (!out) throw error("write to " + path + " failed");
}

// ---------------------------------------------------------------------------
// INI configuration

struct IniDoc {
    // section -> key -> value; both levels sorted, so serialization is stable
    std::map<std::string, std::map<std::string, std::string>> sections;

    std::optional<std::string> get(const std::string& section, const std::string& key) const {
        const auto s = sections.find(section);
        if (s == sections.end()) return std::nullopt;
        const auto k = s->second.find(key);
        if (k == s->second.end()) return std::nullopt;
        return k->second;
    }
    void set(const std::string& section, const std::string& key, const std::string& value) {
        sections[section][key] = value;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_ini_double(const IniDoc& doc, const std::string& section,
                               const std::string& key, double fallback) {
    const auto raw = doc.get(section, key);
    if (!raw) return fallback;
    const std::string t = trim(*raw);
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
        throw config_error("[" + section + "] " + key + ": not a number: '" + *raw + "'");
    return v;
}

} // namespace detail

inline IniDoc parse_ini_text(const std::string& text, const std::string& origin = "<string>") {
    IniDoc doc;
    std::string section;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const std::string raw =
            text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
        pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const std::string line = detail::trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3)
                throw parse_error(origin + ": line " + std::to_string(line_no) +
                                      ": malformed section header",
                                  line_no);
            section = detail::trim(line.substr(1, line.size() - 2));
            doc.sections[section]; // record empty sections too
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw parse_error(origin + ": line " + std::to_string(line_no) +
                                  ": expected key = value",
                              line_no);
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty())
            throw parse_error(origin + ": line " + std::to_string(line_no) + ": empty key",
                              line_no);
        if (section.empty())
            throw parse_error(origin + ": line " + std::to_string(line_no) +
                                  ": key outside any [section]",
                              line_no);
        doc.sections[section][key] = value;
    }
    return doc;
}

inline IniDoc parse_ini_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open " + path, 0);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_ini_text(text, path);
}

inline std::string serialize_ini(const IniDoc& doc) {
    std::string out;
    bool first = true;
    for (const auto& [section, keys] : doc.sections) {
        if (!first) out += '\n';
        first = false;
        out += '[' + section + "]\n";
        for (const auto& [key, value] : keys) out += key + " = " + value + '\n';
    }
    return out;
}

// Known keys per typed section; unknown keys are rejected to catch typos.
inline void apply_model_ini(const IniDoc& doc, ModelParams& p) {
    const auto it = doc.sections.find("model");
    if (it == doc.sections.end()) return;
    for (const auto& [key, value] : it->second) {
        static const std::array<const char*, 8> known{"mu", "a0",    "a1",    "a2",
                                                      "beta", "omega", "gamma", "m"};
        if (std::find_if(known.begin(), known.end(),
                         [&](const char* k) { return key == k; }) == known.end())
            throw config_error("[model] unknown key: " + key);
    }
    p.mu = detail::parse_ini_double(doc, "model", "mu", p.mu);
    p.a0 = detail::parse_ini_double(doc, "model", "a0", p.a0);
    p.a1 = detail::parse_ini_double(doc, "model", "a1", p.a1);
    p.a2 = detail::parse_ini_double(doc, "model", "a2", p.a2);
    p.beta = detail::parse_ini_double(doc, "model", "beta", p.beta);
    p.omega = detail::parse_ini_double(doc, "model", "omega", p.omega);
    p.gamma = detail::parse_ini_double(doc, "model", "gamma", p.gamma);
    p.m = detail::parse_ini_double(doc, "model", "m", p.m);
}

inline void apply_gcoeffs_ini(const IniDoc& doc, GCoeffs& g) {
    const auto it = doc.sections.find("gcoeffs");
    if (it == doc.sections.end()) return;
    for (const auto& [key, value] : it->second)
        if (key != "a" && key != "b" && key != "c")
            throw config_error("[gcoeffs] unknown key: " + key);
    g.a = detail::parse_ini_double(doc, "gcoeffs", "a", g.a);
    g.b = detail::parse_ini_double(doc, "gcoeffs", "b", g.b);
    g.c = detail::parse_ini_double(doc, "gcoeffs", "c", g.c);
}

inline void apply_integrator_ini(const IniDoc& doc, IntegratorConfig& cfg) {
    const auto it = doc.sections.find("integrator");
    if (it == doc.sections.end()) return;
    static const std::array<const char*, 8> known{"rtol",        "atol",     "h_init",
                                                  "h_max",       "t_transient", "t_record",
                                                  "sample_dt",   "blowup_norm"};
    for (const auto& [key, value] : it->second)
        if (std::find_if(known.begin(), known.end(),
                         [&](const char* k) { return key == k; }) == known.end())
            throw config_error("[integrator] unknown key: " + key);
    cfg.rtol = detail::parse_ini_double(doc, "integrator", "rtol", cfg.rtol);
    cfg.atol = detail::parse_ini_double(doc, "integrator", "atol", cfg.atol);
    cfg.h_init = detail::parse_ini_double(doc, "integrator", "h_init", cfg.h_init);
    cfg.h_max = detail::parse_ini_double(doc, "integrator", "h_max", cfg.h_max);
    cfg.t_transient = detail::parse_ini_double(doc, "integrator", "t_transient", cfg.t_transient);
    cfg.t_record = detail::parse_ini_double(doc, "integrator", "t_record", cfg.t_record);
    cfg.sample_dt = detail::parse_ini_double(doc, "integrator", "sample_dt", cfg.sample_dt);
    cfg.blowup_norm = detail::parse_ini_double(doc, "integrator", "blowup_norm", cfg.blowup_norm);
}

inline void apply_circuit_ini(const IniDoc& doc, CircuitValues& cv) {
    const auto it = doc.sections.find("circuit");
    if (it == doc.sections.end()) return;
    static const std::array<const char*, 10> known{"v_s",  "v_bias", "r",           "r2",
                                                   "rb2",  "cap",    "ind",         "alpha_scale",
                                                   "beta1", "v_scale"};
    for (const auto& [key, value] : it->second)
        if (std::find_if(known.begin(), known.end(),
                         [&](const char* k) { return key == k; }) == known.end())
            throw config_error("[circuit] unknown key: " + key);
    cv.v_s = detail::parse_ini_double(doc, "circuit", "v_s", cv.v_s);
    cv.v_bias = detail::parse_ini_double(doc, "circuit", "v_bias", cv.v_bias);
    cv.r = detail::parse_ini_double(doc, "circuit", "r", cv.r);
    cv.r2 = detail::parse_ini_double(doc, "circuit", "r2", cv.r2);
    cv.rb2 = detail::parse_ini_double(doc, "circuit", "rb2", cv.rb2);
    cv.cap = detail::parse_ini_double(doc, "circuit", "cap", cv.cap);
    cv.ind = detail::parse_ini_double(doc, "circuit", "ind", cv.ind);
    cv.alpha_scale = detail::parse_ini_double(doc, "circuit", "alpha_scale", cv.alpha_scale);
    cv.beta1 = detail::parse_ini_double(doc, "circuit", "beta1", cv.beta1);
    cv.v_scale = detail::parse_ini_double(doc, "circuit", "v_scale", cv.v_scale);
}

inline IniDoc snapshot_ini(const ModelParams& p, const GCoeffs& g, const IntegratorConfig& cfg) {
    IniDoc doc;
    doc.set("model", "mu", format_double(p.mu));
    doc.set("model", "a0", format_double(p.a0));
    doc.set("model", "a1", format_double(p.a1));
    doc.set("model", "a2", format_double(p.a2));
    doc.set("model", "beta", format_double(p.beta));
    doc.set("model", "omega", format_double(p.omega));
    doc.set("model", "gamma", format_double(p.gamma));
    doc.set("model", "m", format_double(p.m));
    doc.set("gcoeffs", "a", format_double(g.a));
    doc.set("gcoeffs", "b", format_double(g.b));
    doc.set("gcoeffs", "c", format_double(g.c));
    doc.set("integrator", "rtol", format_double(cfg.rtol));
    doc.set("integrator", "atol", format_double(cfg.atol));
    doc.set("integrator", "h_init", format_double(cfg.h_init));
    doc.set("integrator", "h_max", format_double(cfg.h_max));
    doc.set("integrator", "t_transient", format_double(cfg.t_transient));
    doc.set("integrator", "t_record", format_double(cfg.t_record));
    doc.set("integrator", "sample_dt", format_double(cfg.sample_dt));
    doc.set("integrator", "blowup_norm", format_double(cfg.blowup_norm));
    return doc;
}

} // namespace ujm
