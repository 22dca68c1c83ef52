// ujm — command-line front door for the uni-junction-memristor circuit model.
//
// Subcommands: simulate | bifurcate | lyapunov | equilibria | fit | poincare |
//              hysteresis | derive-params
//
// Every run writes a resolved-config snapshot (resolved_config.ini) into the
// output directory sufficient to reproduce the run bit-exactly.  On nonzero
// exit a FAILED marker file holding the diagnostic is left next to any
// partial artifacts.  Exit codes: 0 success, 1 domain/numerical error,
// 2 usage or parse error.

#include <CLI11.hpp>

#include <ujm/ujm.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>

namespace {

// ---------------------------------------------------------------------------
// Common options shared by every subcommand

struct CommonOpts {
    std::string preset = "paper-2018";
    std::string config_file;
    std::string outdir = ".";
    unsigned workers = 0;

    // model overrides (flag > config file > preset)
    std::optional<double> m, mu, a0, a1, a2, beta, omega, gamma;
    std::optional<double> g_a, g_b, g_c;

    // integrator overrides
    std::optional<double> rtol, atol, h_init, h_max, transient, record, sample_dt, blowup_norm;
};

void add_common_options(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--preset", o.preset, "Parameter preset (paper-2018 | paper-2018-ndr)")
        ->capture_default_str();
    cmd->add_option("--config", o.config_file,
                    "INI config file ([model]/[gcoeffs]/[integrator] sections); overrides the "
                    "preset, is overridden by flags");
    cmd->add_option("--out", o.outdir, "Output directory for artifacts")->capture_default_str();
    cmd->add_option("--workers", o.workers,
                    "Worker threads for sweeps (0 = hardware; UJM_WORKERS caps)");

    auto* mg = cmd->add_option_group("model", "Model parameter overrides");
    mg->add_option("--m", o.m, "Memristor strength m");
    mg->add_option("--mu", o.mu, "Fast time-scale ratio mu");
    mg->add_option("--a0", o.a0, "Bias term A0");
    mg->add_option("--a1", o.a1, "Damping coefficient A1");
    mg->add_option("--a2", o.a2, "Coupling coefficient A2");
    mg->add_option("--beta", o.beta, "Oscillator damping beta");
    mg->add_option("--omega", o.omega, "Oscillator frequency omega");
    mg->add_option("--gamma", o.gamma, "Feedback coefficient gamma");
    mg->add_option("--g-a", o.g_a, "Branch coefficient a");
    mg->add_option("--g-b", o.g_b, "Branch coefficient b");
    mg->add_option("--g-c", o.g_c, "Branch coefficient c (> 0)");

    auto* ig = cmd->add_option_group("integrator", "Integrator overrides");
    ig->add_option("--rtol", o.rtol, "Relative tolerance");
    ig->add_option("--atol", o.atol, "Absolute tolerance");
    ig->add_option("--h-init", o.h_init, "Initial step size");
    ig->add_option("--h-max", o.h_max, "Maximum step size");
    ig->add_option("--transient", o.transient, "Discarded warm-up time");
    ig->add_option("--record", o.record, "Recorded duration");
    ig->add_option("--sample-dt", o.sample_dt, "Sampling interval");
    ig->add_option("--blowup-norm", o.blowup_norm, "Blow-up detection threshold");
}

struct Resolved {
    ujm::ModelParams params;
    ujm::GCoeffs gcoeffs;
    ujm::IntegratorConfig integ;
    unsigned workers = 0;
};

Resolved resolve(const CommonOpts& o) {
    Resolved r;
    const ujm::Preset& preset = ujm::find_preset(o.preset);
    r.params = preset.params;
    r.gcoeffs = preset.gcoeffs;

    if (!o.config_file.empty()) {
        const ujm::IniDoc doc = ujm::parse_ini_file(o.config_file);
        ujm::apply_model_ini(doc, r.params);
        ujm::apply_gcoeffs_ini(doc, r.gcoeffs);
        ujm::apply_integrator_ini(doc, r.integ);
    }

    auto put = [](std::optional<double> v, double& dst) {
        if (v) dst = *v;
    };
    put(o.m, r.params.m);
    put(o.mu, r.params.mu);
    put(o.a0, r.params.a0);
    put(o.a1, r.params.a1);
    put(o.a2, r.params.a2);
    put(o.beta, r.params.beta);
    put(o.omega, r.params.omega);
    put(o.gamma, r.params.gamma);
    put(o.g_a, r.gcoeffs.a);
    put(o.g_b, r.gcoeffs.b);
    put(o.g_c, r.gcoeffs.c);
    put(o.rtol, r.integ.rtol);
    put(o.atol, r.integ.atol);
    put(o.h_init, r.integ.h_init);
    put(o.h_max, r.integ.h_max);
    put(o.transient, r.integ.t_transient);
    put(o.record, r.integ.t_record);
    put(o.sample_dt, r.integ.sample_dt);
    put(o.blowup_norm, r.integ.blowup_norm);

    r.params.validate();
    r.gcoeffs.validate();
    r.integ.validate();
    r.workers = o.workers;

    for (const auto& w : r.params.range_warnings()) std::cerr << "warning: " << w << "\n";
    return r;
}

// ---------------------------------------------------------------------------
// Artifact plumbing

std::filesystem::path prepare_outdir(const CommonOpts& o) {
    std::filesystem::path dir(o.outdir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec && !std::filesystem::is_directory(dir))
        throw ujm::usage_error("cannot create output directory '" + o.outdir +
                               "': " + ec.message());
    return dir;
}

void write_snapshot(const std::filesystem::path& dir, const Resolved& r,
                    const std::string& command,
                    const std::vector<std::pair<std::string, std::string>>& run_keys) {
    ujm::IniDoc doc = ujm::snapshot_ini(r.params, r.gcoeffs, r.integ);
    doc.set("run", "command", command);
    doc.set("run", "workers", std::to_string(ujm::resolve_workers(r.workers)));
    for (const auto& [k, v] : run_keys) doc.set("run", k, v);
    std::ofstream out(dir / "resolved_config.ini");
    if (!out) throw ujm::usage_error("cannot write resolved config snapshot");
    out << ujm::serialize_ini(doc);
}

void write_failure_marker(const std::filesystem::path& dir, const std::string& diagnostic) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    std::ofstream out(dir / "FAILED");
    out << diagnostic << "\n";
}

std::string fmt(double v) { return ujm::format_double(v); }

// ---------------------------------------------------------------------------
// Subcommand payloads.  Each returns the artifacts it wrote for logging.

struct SimulateOpts {
    CommonOpts common;
    std::optional<double> x0, y0, z0, u0;
    double perturbation = 1e-2;
    std::optional<std::size_t> maxima_coordinate;
};

void run_simulate(const SimulateOpts& o, const Resolved& r, const std::filesystem::path& dir) {
    ujm::State s0 = ujm::default_initial_state(r.params, r.gcoeffs, o.perturbation);
    if (o.x0) s0.x = *o.x0;
    if (o.y0) s0.y = *o.y0;
    if (o.z0) s0.z = *o.z0;
    if (o.u0) s0.u = *o.u0;

    const ujm::Trajectory traj = ujm::integrate_trajectory(s0, r.params, r.gcoeffs, r.integ);
    ujm::save_csv((dir / "trajectory.csv").string(),
                  [&](std::ostream& out) { ujm::write_trajectory_csv(out, traj); });
    std::cout << "trajectory.csv: " << traj.times.size() << " samples on ["
              << fmt(traj.times.front()) << ", " << fmt(traj.times.back()) << "]\n";

    if (o.maxima_coordinate) {
        const ujm::MaximaSeries ms = ujm::extract_maxima(traj, *o.maxima_coordinate);
        ujm::save_csv((dir / "maxima.csv").string(),
                      [&](std::ostream& out) { ujm::write_maxima_csv(out, ms); });
        std::cout << "maxima.csv: " << ms.values.size() << " local maxima of "
                  << ujm::component_name(*o.maxima_coordinate) << "\n";
    }
}

struct BifurcateOpts {
    CommonOpts common;
    double m_from = 0.0;
    double m_to = 1.0;
    std::size_t points = 501;
    bool continuation = false;
};

void run_bifurcate(const BifurcateOpts& o, const Resolved& r, const std::filesystem::path& dir) {
    const std::vector<double> grid = ujm::uniform_grid(o.m_from, o.m_to, o.points);
    const ujm::BifurcationDiagram diagram =
        ujm::bifurcation_sweep(grid, r.params, r.gcoeffs, r.integ, o.continuation, r.workers);
    const ujm::DiagramSummary summary = ujm::diagram_summary(diagram);

    ujm::save_csv((dir / "bifurcation.csv").string(),
                  [&](std::ostream& out) { ujm::write_bifurcation_csv(out, diagram); });
    ujm::save_json((dir / "bifurcation_summary.json").string(), ujm::summary_json(summary));
    std::cout << "bifurcation.csv: " << diagram.points.size() << " columns, "
              << summary.failed_count << " failed\n";
}

struct LyapunovOpts {
    CommonOpts common;
    double renorm_interval = 0.01;
    double total_time = 2000.0;
    double zero_threshold = ujm::default_zero_threshold;
    double perturbation = 1e-2;
};

void run_lyapunov(const LyapunovOpts& o, const Resolved& r, const std::filesystem::path& dir) {
    const ujm::State s0 = ujm::default_initial_state(r.params, r.gcoeffs, o.perturbation);
    const ujm::LyapunovResult res = ujm::lyapunov_spectrum(
        s0, r.params, r.gcoeffs, r.integ, o.renorm_interval, o.total_time, o.zero_threshold);

    ujm::save_json((dir / "lyapunov.json").string(), ujm::lyapunov_json(res));
    ujm::save_csv((dir / "lyapunov_history.csv").string(),
                  [&](std::ostream& out) { ujm::write_lyapunov_history_csv(out, res); });
    std::cout << "spectrum: (" << fmt(res.spectrum[0]) << ", " << fmt(res.spectrum[1]) << ", "
              << fmt(res.spectrum[2]) << ", " << fmt(res.spectrum[3]) << ")  "
              << res.attractor.label << "  D_KY " << fmt(res.d_ky) << "\n";
}

struct EquilibriaOpts {
    CommonOpts common;
    double m_from = 0.0;
    double m_to = 1.0;
    std::size_t points = 101;
};

void run_equilibria(const EquilibriaOpts& o, const Resolved& r, const std::filesystem::path& dir) {
    const std::vector<double> grid = ujm::uniform_grid(o.m_from, o.m_to, o.points);
    const std::vector<ujm::StabilityPoint> rows =
        ujm::stability_sweep(grid, r.params, r.gcoeffs, r.workers);

    ujm::save_csv((dir / "equilibria.csv").string(),
                  [&](std::ostream& out) { ujm::write_equilibria_csv(out, rows); });
    ujm::save_json((dir / "equilibria.json").string(), ujm::equilibria_json(rows));

    std::size_t unstable = 0;
    for (const auto& row : rows)
        if (row.eig.is_unstable) ++unstable;
    std::cout << "equilibria.csv: " << rows.size() << " points, " << unstable << " unstable\n";
}

struct FitOpts {
    CommonOpts common;
    std::string data_file;
    bool generate = false;
    double noise = 0.0;
    unsigned seed = 12345;
    std::size_t samples = 50;
    double i_min = 0.01;
    double i_max = 1.0;
    std::optional<double> init_a, init_b, init_c;
};

void run_fit(const FitOpts& o, const Resolved& r, const std::filesystem::path& dir) {
    ujm::IVDataset data;
    if (o.generate) {
        if (!(o.i_min > 0.0) || !(o.i_max > o.i_min))
            throw ujm::config_error("fit: need 0 < i-min < i-max for --generate");
        if (o.samples < 4) throw ujm::config_error("fit: --generate needs at least 4 samples");
        std::mt19937 rng(o.seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        data.points.reserve(o.samples);
        const double lo = std::log(o.i_min), hi = std::log(o.i_max);
        for (std::size_t i = 0; i < o.samples; ++i) {
            const double x = std::exp(lo + (hi - lo) * static_cast<double>(i) /
                                               static_cast<double>(o.samples - 1));
            double v = ujm::eval_g(x, r.gcoeffs);
            if (o.noise > 0.0) v *= 1.0 + o.noise * gauss(rng);
            data.points.emplace_back(x, v);
        }
        data.source = "generated";
        ujm::save_csv((dir / "fit_data.csv").string(), [&](std::ostream& out) {
            out << "i,v\n";
            for (const auto& [x, v] : data.points) out << fmt(x) << "," << fmt(v) << "\n";
        });
    } else {
        if (o.data_file.empty())
            throw ujm::usage_error("fit: either --data FILE or --generate is required");
        data = ujm::load_iv_csv(o.data_file);
    }

    ujm::GCoeffs init = ujm::initial_guess(data);
    if (o.init_a || o.init_b || o.init_c) {
        if (!(o.init_a && o.init_b && o.init_c))
            throw ujm::usage_error("fit: --init-a/--init-b/--init-c must be given together");
        init = ujm::GCoeffs{*o.init_a, *o.init_b, *o.init_c};
    }

    const ujm::FitResult fit = ujm::fit_g(data, init);
    ujm::save_json((dir / "fit.json").string(), ujm::fit_json(fit));
    std::cout << "fit: a " << fmt(fit.coeffs.a) << "  b " << fmt(fit.coeffs.b) << "  c "
              << fmt(fit.coeffs.c) << "  r2 " << fmt(fit.r_squared) << "  iterations "
              << fit.iterations << "\n";
}

struct PoincareOpts {
    CommonOpts common;
    std::size_t coordinate = 3;
    double perturbation = 1e-2;
};

void run_poincare(const PoincareOpts& o, const Resolved& r, const std::filesystem::path& dir) {
    const ujm::State s0 = ujm::default_initial_state(r.params, r.gcoeffs, o.perturbation);
    const ujm::Trajectory traj = ujm::integrate_trajectory(s0, r.params, r.gcoeffs, r.integ);
    const ujm::MaximaSeries ms = ujm::extract_maxima(traj, o.coordinate);
    const ujm::NextMaximaMap map = ujm::next_maxima_map(ms);
    const ujm::MapStructureReport report = ujm::analyze_map_structure(map);

    ujm::save_csv((dir / "poincare.csv").string(),
                  [&](std::ostream& out) { ujm::write_poincare_csv(out, map); });
    ujm::save_json((dir / "map_report.json").string(), ujm::map_report_json(report));
    std::cout << "poincare.csv: " << map.points.size() << " pairs, structure "
              << ujm::to_string(report.kind) << " (" << report.detail << ")\n";
}

struct HysteresisOpts {
    CommonOpts common;
    double offset = 1.6;
    double amplitude = 1.6;
    double freq = 12.566370614359172; // 4 pi
    int discard_periods = 5;
    int record_periods = 2;
    std::size_t samples_per_period = 2048;
};

void run_hysteresis(const HysteresisOpts& o, const Resolved& r,
                    const std::filesystem::path& dir) {
    const ujm::HysteresisLoop loop = ujm::simulate_driven_branch(
        r.gcoeffs, r.params.mu, o.offset, o.amplitude, o.freq, r.integ, o.discard_periods,
        o.record_periods, o.samples_per_period);

    ujm::save_csv((dir / "hysteresis.csv").string(),
                  [&](std::ostream& out) { ujm::write_hysteresis_csv(out, loop); });
    ujm::save_json((dir / "hysteresis.json").string(), ujm::hysteresis_json(loop));
    std::cout << "hysteresis: area " << fmt(loop.loop_area) << "  pinch "
              << fmt(loop.pinch_distance) << "  extent " << fmt(ujm::loop_extent(loop)) << "\n";
}

struct DeriveOpts {
    CommonOpts common;
    std::string circuit_file;
};

void run_derive(const DeriveOpts& o, const Resolved&, const std::filesystem::path& dir) {
    ujm::CircuitValues cv = ujm::paper_2018_circuit();
    if (!o.circuit_file.empty()) {
        const ujm::IniDoc doc = ujm::parse_ini_file(o.circuit_file);
        ujm::apply_circuit_ini(doc, cv);
    }
    cv.validate();

    const ujm::DerivedParams d = ujm::derive_dimensionless(cv);
    const std::vector<ujm::DiscrepancyNote> notes =
        ujm::compare_with_reference(d, ujm::paper_2018_params());
    ujm::save_json((dir / "derived_params.json").string(), ujm::derived_json(d, notes));
    std::cout << "derived: a0 " << fmt(d.a0) << "  a1 " << fmt(d.a1) << "  a2 " << fmt(d.a2)
              << "  mu " << fmt(d.mu) << "  (" << notes.size() << " discrepancy note"
              << (notes.size() == 1 ? "" : "s") << ")\n";
}

// ---------------------------------------------------------------------------

int dispatch(const std::string& command, const CommonOpts& common,
             const std::vector<std::pair<std::string, std::string>>& run_keys,
             const std::function<void(const Resolved&, const std::filesystem::path&)>& payload) {
    std::filesystem::path dir;
    bool dir_ready = false;
    try {
        const Resolved r = resolve(common);
        dir = prepare_outdir(common);
        dir_ready = true;
        write_snapshot(dir, r, command, run_keys);
        payload(r, dir);
        return 0;
    } catch (const ujm::usage_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (dir_ready) write_failure_marker(dir, e.what());
        return 2;
    } catch (const ujm::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (dir_ready) write_failure_marker(dir, e.what());
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (dir_ready) write_failure_marker(dir, e.what());
        return 1;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"uni-junction-memristor circuit model toolkit"};
    app.require_subcommand(1);

    SimulateOpts sim;
    auto* c_sim = app.add_subcommand("simulate", "Integrate one trajectory and write it as CSV");
    add_common_options(c_sim, sim.common);
    c_sim->add_option("--x0", sim.x0, "Initial x (default: perturbed fixed point)");
    c_sim->add_option("--y0", sim.y0, "Initial y");
    c_sim->add_option("--z0", sim.z0, "Initial z");
    c_sim->add_option("--u0", sim.u0, "Initial u");
    c_sim->add_option("--perturbation", sim.perturbation,
                      "x offset from the fixed point for the stock initial state")
        ->capture_default_str();
    c_sim->add_option("--maxima-coordinate", sim.maxima_coordinate,
                      "Also write local maxima of this coordinate (0=x,1=y,2=z,3=u)");

    BifurcateOpts bif;
    auto* c_bif = app.add_subcommand("bifurcate", "Sweep m and record per-column u maxima");
    add_common_options(c_bif, bif.common);
    c_bif->add_option("--m-from", bif.m_from, "Sweep start")->capture_default_str();
    c_bif->add_option("--m-to", bif.m_to, "Sweep end")->capture_default_str();
    c_bif->add_option("--points", bif.points, "Grid points")->capture_default_str();
    c_bif->add_flag("--continuation", bif.continuation,
                    "Reuse each column's final state as the next seed (serial)");

    LyapunovOpts lya;
    auto* c_lya = app.add_subcommand("lyapunov", "Benettin spectrum, D_KY, and classification");
    add_common_options(c_lya, lya.common);
    c_lya->add_option("--renorm-interval", lya.renorm_interval,
                      "Time between Gram-Schmidt renormalizations")
        ->capture_default_str();
    c_lya->add_option("--total-time", lya.total_time, "Averaging window after the transient")
        ->capture_default_str();
    c_lya->add_option("--zero-threshold", lya.zero_threshold,
                      "|lambda| below this counts as zero for classification")
        ->capture_default_str();
    c_lya->add_option("--perturbation", lya.perturbation, "Initial x offset from the fixed point")
        ->capture_default_str();

    EquilibriaOpts eq;
    auto* c_eq = app.add_subcommand("equilibria", "Fixed point and eigenvalues along an m grid");
    add_common_options(c_eq, eq.common);
    c_eq->add_option("--m-from", eq.m_from, "Grid start")->capture_default_str();
    c_eq->add_option("--m-to", eq.m_to, "Grid end")->capture_default_str();
    c_eq->add_option("--points", eq.points, "Grid points")->capture_default_str();

    FitOpts fit;
    auto* c_fit = app.add_subcommand("fit", "Least-squares fit of the branch curve g(x)");
    add_common_options(c_fit, fit.common);
    c_fit->add_option("--data", fit.data_file, "CSV with current,voltage rows");
    c_fit->add_flag("--generate", fit.generate,
                    "Fit synthetic data from the resolved g coefficients instead of a file");
    c_fit->add_option("--noise", fit.noise, "Multiplicative Gaussian noise level for --generate")
        ->capture_default_str();
    c_fit->add_option("--seed", fit.seed, "RNG seed for --generate")->capture_default_str();
    c_fit->add_option("--samples", fit.samples, "Sample count for --generate")
        ->capture_default_str();
    c_fit->add_option("--i-min", fit.i_min, "Smallest generated current")->capture_default_str();
    c_fit->add_option("--i-max", fit.i_max, "Largest generated current")->capture_default_str();
    c_fit->add_option("--init-a", fit.init_a, "Initial guess for a (give all three)");
    c_fit->add_option("--init-b", fit.init_b, "Initial guess for b");
    c_fit->add_option("--init-c", fit.init_c, "Initial guess for c");

    PoincareOpts poi;
    auto* c_poi = app.add_subcommand("poincare", "Next-maxima map and its structure report");
    add_common_options(c_poi, poi.common);
    c_poi->add_option("--coordinate", poi.coordinate, "Coordinate for maxima (0=x,1=y,2=z,3=u)")
        ->capture_default_str();
    c_poi->add_option("--perturbation", poi.perturbation, "Initial x offset from the fixed point")
        ->capture_default_str();

    HysteresisOpts hys;
    auto* c_hys = app.add_subcommand("hysteresis", "Driven fast-branch pinched loop");
    add_common_options(c_hys, hys.common);
    c_hys->add_option("--offset", hys.offset, "Drive offset")->capture_default_str();
    c_hys->add_option("--amplitude", hys.amplitude, "Drive amplitude")->capture_default_str();
    c_hys->add_option("--freq", hys.freq, "Drive angular frequency")->capture_default_str();
    c_hys->add_option("--discard-periods", hys.discard_periods, "Warm-up periods (>= 5)")
        ->capture_default_str();
    c_hys->add_option("--record-periods", hys.record_periods, "Recorded periods (>= 2)")
        ->capture_default_str();
    c_hys->add_option("--samples-per-period", hys.samples_per_period, "Samples per period")
        ->capture_default_str();

    DeriveOpts der;
    auto* c_der = app.add_subcommand("derive-params",
                                     "Dimensionless parameters from circuit values");
    add_common_options(c_der, der.common);
    c_der->add_option("--circuit", der.circuit_file, "INI file with a [circuit] section");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    auto opt_str = [](const std::optional<double>& v) {
        return v ? fmt(*v) : std::string("default");
    };

    if (c_sim->parsed()) {
        std::vector<std::pair<std::string, std::string>> keys = {
            {"perturbation", fmt(sim.perturbation)},
            {"x0", opt_str(sim.x0)},
            {"y0", opt_str(sim.y0)},
            {"z0", opt_str(sim.z0)},
            {"u0", opt_str(sim.u0)},
        };
        if (sim.maxima_coordinate)
            keys.emplace_back("maxima_coordinate", std::to_string(*sim.maxima_coordinate));
        return dispatch("simulate", sim.common, keys,
                        [&](const Resolved& r, const std::filesystem::path& dir) {
                            run_simulate(sim, r, dir);
                        });
    }
    if (c_bif->parsed()) {
        return dispatch("bifurcate", bif.common,
                        {{"m_from", fmt(bif.m_from)},
                         {"m_to", fmt(bif.m_to)},
                         {"points", std::to_string(bif.points)},
                         {"continuation", bif.continuation ? "true" : "false"}},
                        [&](const Resolved& r, const std::filesystem::path& dir) {
                            run_bifurcate(bif, r, dir);
                        });
    }
    if (c_lya->parsed()) {
        return dispatch("lyapunov", lya.common,
                        {{"renorm_interval", fmt(lya.renorm_interval)},
                         {"total_time", fmt(lya.total_time)},
                         {"zero_threshold", fmt(lya.zero_threshold)},
                         {"perturbation", fmt(lya.perturbation)}},
                        [&](const Resolved& r, const std::filesystem::path& dir) {
                            run_lyapunov(lya, r, dir);
                        });
    }
    if (c_eq->parsed()) {
        return dispatch("equilibria", eq.common,
                        {{"m_from", fmt(eq.m_from)},
                         {"m_to", fmt(eq.m_to)},
                         {"points", std::to_string(eq.points)}},
                        [&](const Resolved& r, const std::filesystem::path& dir) {
                            run_equilibria(eq, r, dir);
                        });
    }
    if (c_fit->parsed()) {
        std::vector<std::pair<std::string, std::string>> keys = {
            {"generate", fit.generate ? "true" : "false"},
        };
        if (fit.generate) {
            keys.emplace_back("noise", fmt(fit.noise));
            keys.emplace_back("seed", std::to_string(fit.seed));
            keys.emplace_back("samples", std::to_string(fit.samples));
            keys.emplace_back("i_min", fmt(fit.i_min));
            keys.emplace_back("i_max", fmt(fit.i_max));
        } else {
            keys.emplace_back("data", fit.data_file);
        }
        return dispatch("fit", fit.common, keys,
                        [&](const Resolved& r, const std::filesystem::path& dir) {
                            run_fit(fit, r, dir);
                        });
    }
    if (c_poi->parsed()) {
        return dispatch("poincare", poi.common,
                        {{"coordinate", std::to_string(poi.coordinate)},
                         {"perturbation", fmt(poi.perturbation)}},
                        [&](const Resolved& r, const std::filesystem::path& dir) {
                            run_poincare(poi, r, dir);
                        });
    }
    if (c_hys->parsed()) {
        return dispatch("hysteresis", hys.common,
                        {{"offset", fmt(hys.offset)},
                         {"amplitude", fmt(hys.amplitude)},
                         {"freq", fmt(hys.freq)},
                         {"discard_periods", std::to_string(hys.discard_periods)},
                         {"record_periods", std::to_string(hys.record_periods)},
                         {"samples_per_period", std::to_string(hys.samples_per_period)}},
                        [&](const Resolved& r, const std::filesystem::path& dir) {
                            run_hysteresis(hys, r, dir);
                        });
    }
    if (c_der->parsed()) {
        return dispatch("derive-params", der.common, {{"circuit", der.circuit_file}},
                        [&](const Resolved& r, const std::filesystem::path& dir) {
                            run_derive(der, r, dir);
                        });
    }
    std::cerr << "error: no subcommand\n";
    return 2;
}
