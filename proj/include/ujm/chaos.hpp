#pragma once

// Lyapunov spectra via tangent-space co-integration with repeated
// Gram-Schmidt re-orthonormalization, Kaplan-Yorke dimension, attractor
// classification from the spectrum's sign pattern, next-maxima return maps,
// and a geometric structure analyzer for those maps.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ujm/analysis.hpp"
#include "ujm/errors.hpp"
#include "ujm/integrate.hpp"
#include "ujm/model.hpp"

namespace ujm {

enum class AttractorClass { FixedPointAttractor, LimitCycle, Torus, Chaos, Unclassified };

inline const char* to_string(AttractorClass k) {
    switch (k) {
        case AttractorClass::FixedPointAttractor: return "FixedPointAttractor";
        case AttractorClass::LimitCycle: return "LimitCycle";
        case AttractorClass::Torus: return "Torus";
        case AttractorClass::Chaos: return "Chaos";
        default: return "Unclassified";
    }
}

struct AttractorClassification {
    AttractorClass kind = AttractorClass::Unclassified;
    double zero_threshold = 0.05;
    std::string label;
};

struct LyapunovResult {
    std::array<double, 4> spectrum{};  // sorted descending, per unit dimensionless time
    double renorm_interval = 0.01;
    double total_time = 2000.0;
    // running estimates recorded at every re-orthonormalization: {t, l1..l4}
    std::vector<std::array<double, 5>> convergence_history;
    double d_ky = 0.0;
    AttractorClassification attractor;
    double mean_trace = 0.0; // time-averaged Jacobian trace along the same trajectory
    State final_state;
};

struct NextMaximaMap {
    std::vector<std::pair<double, double>> points; // (M_k, M_{k+1})
};

// Default epsilon below which a measured exponent counts as zero: between the
// smallest nonzero reference magnitude (0.10) and numerical-zero scale.
inline constexpr double default_zero_threshold = 0.05;

// ---------------------------------------------------------------------------
// Kaplan-Yorke dimension

// D = j + (sum_{i<=j} l_i)/|l_{j+1}| with j the largest index whose cumulative
// sum is nonnegative; 0 for all-negative spectra, n when every cumulative sum
// is nonnegative. Input must be sorted descending.
inline double kaplan_yorke(const std::array<double, 4>& spectrum) {
    if (spectrum[0] < 0.0) return 0.0;
    double cum = 0.0;
    std::size_t j = 0;
    double cum_j = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        cum += spectrum[i];
        if (cum >= 0.0) {
            j = i + 1;
            cum_j = cum;
        }
    }
    if (j >= 4) return 4.0;
    return static_cast<double>(j) + cum_j / std::fabs(spectrum[j]);
}

// ---------------------------------------------------------------------------
// Sign-pattern classification

// (-,-,-,-) fixed point; (0,-,-,-) limit cycle; (0,0,-,-) torus;
// (+,0,-,-) chaos; anything else unclassified. An exponent is "zero" iff
// |l| <= zero_threshold.
inline AttractorClassification classify_attractor(const std::array<double, 4>& spectrum,
                                                  double zero_threshold = default_zero_threshold) {
    AttractorClassification result;
    result.zero_threshold = zero_threshold;
    std::array<int, 4> sign{};
    for (std::size_t i = 0; i < 4; ++i) {
        if (std::fabs(spectrum[i]) <= zero_threshold)
            sign[i] = 0;
        else
            sign[i] = spectrum[i] > 0.0 ? 1 : -1;
    }
    auto is = [&](int a, int b, int c, int d) {
        return sign[0] == a && sign[1] == b && sign[2] == c && sign[3] == d;
    };
    if (is(-1, -1, -1, -1)) {
        result.kind = AttractorClass::FixedPointAttractor;
        result.label = "FixedPointAttractor (-,-,-,-)";
    } else if (is(0, -1, -1, -1)) {
        result.kind = AttractorClass::LimitCycle;
        result.label = "LimitCycle (0,-,-,-) periodic motion";
    } else if (is(0, 0, -1, -1)) {
        result.kind = AttractorClass::Torus;
        result.label = "Torus (0,0,-,-) two-frequency quasi-periodic motion (also tabulated as 3-Torus)";
    } else if (is(1, 0, -1, -1)) {
        result.kind = AttractorClass::Chaos;
        result.label = "Chaos (+,0,-,-)";
    } else {
        result.kind = AttractorClass::Unclassified;
        std::string pat;
        for (int s : sign) pat += (s > 0 ? '+' : (s < 0 ? '-' : '0'));
        result.label = "Unclassified (" + pat + ")";
    }
    return result;
}

// ---------------------------------------------------------------------------
// Lyapunov spectrum

namespace detail {

// Benettin engine over a generic 4-dimensional flow. rhs(t, s) -> ds/dt,
// jac(s) -> 4x4 Jacobian, trace_fn(s) -> trace of jac (kept separate so the
// divergence average uses the analytic trace).
template <class RhsFn, class JacFn, class TraceFn>
LyapunovResult benettin_spectrum(std::array<double, 4> s, RhsFn&& rhs, JacFn&& jac,
                                 TraceFn&& trace_fn, const IntegratorConfig& cfg,
                                 double renorm_interval, double total_time,
                                 double zero_threshold) {
    cfg.validate();
    if (!(renorm_interval > 0.0) || !(total_time >= 10.0 * renorm_interval))
        throw config_error("lyapunov_spectrum: total_time must dwarf renorm_interval");

    // discard the transient on the plain flow first
    {
        auto rhs4 = [&](double t, const std::array<double, 4>& y, std::array<double, 4>& dydt) {
            dydt = rhs(t, y);
        };
        auto warm = make_dopri5<4>(rhs4, cfg);
        double t = 0.0;
        warm.advance_to(t, s, std::max(cfg.t_transient, 0.0));
    }

    // co-integrate state + 4 tangent columns
    std::array<double, 20> y{};
    for (int i = 0; i < 4; ++i) y[i] = s[i];
    for (int j = 0; j < 4; ++j) y[4 + 5 * j] = 1.0; // identity: column j, component j

    double trace_integral = 0.0;
    double prev_t = 0.0;
    double prev_trace;
    {
        std::array<double, 4> s0{y[0], y[1], y[2], y[3]};
        prev_trace = trace_fn(s0);
    }
    auto rhs20 = [&](double t, const std::array<double, 20>& w, std::array<double, 20>& dw) {
        const std::array<double, 4> st{w[0], w[1], w[2], w[3]};
        const auto f = rhs(t, st);
        const auto J = jac(st);
        for (int i = 0; i < 4; ++i) dw[i] = f[i];
        for (int j = 0; j < 4; ++j) {
            const double* v = &w[4 + 4 * j];
            double* dv = &dw[4 + 4 * j];
            for (int i = 0; i < 4; ++i)
                dv[i] = J[i][0] * v[0] + J[i][1] * v[1] + J[i][2] * v[2] + J[i][3] * v[3];
        }
    };
    auto observe = [&](double t, const std::array<double, 20>& w) {
        const std::array<double, 4> st{w[0], w[1], w[2], w[3]};
        const double tr = trace_fn(st);
        trace_integral += 0.5 * (tr + prev_trace) * (t - prev_t);
        prev_t = t;
        prev_trace = tr;
    };
    auto stepper = make_dopri5<20>(rhs20, cfg);

    LyapunovResult res;
    res.renorm_interval = renorm_interval;
    res.total_time = total_time;
    const auto n_renorm = static_cast<std::size_t>(std::llround(total_time / renorm_interval));
    res.convergence_history.reserve(n_renorm);

    std::array<double, 4> log_sums{};
    double t = 0.0;
    for (std::size_t k = 1; k <= n_renorm; ++k) {
        const double t_target = static_cast<double>(k) * renorm_interval;
        stepper.advance_to(t, y, t_target, observe);

        // modified Gram-Schmidt with a second orthogonalization pass
        for (int j = 0; j < 4; ++j) {
            double* vj = &y[4 + 4 * j];
            for (int pass = 0; pass < 2; ++pass)
                for (int i = 0; i < j; ++i) {
                    const double* vi = &y[4 + 4 * i];
                    double dot = 0.0;
                    for (int r = 0; r < 4; ++r) dot += vj[r] * vi[r];
                    for (int r = 0; r < 4; ++r) vj[r] -= dot * vi[r];
                }
            double norm2 = 0.0;
            for (int r = 0; r < 4; ++r) norm2 += vj[r] * vj[r];
            const double norm = std::sqrt(norm2);
            if (!(norm > 1e-290))
                throw degenerate_tangent_error(
                    "tangent vector " + std::to_string(j) +
                    " collapsed before renormalization at t = " + std::to_string(t) +
                    "; reduce renorm_interval");
            log_sums[j] += std::log(norm);
            for (int r = 0; r < 4; ++r) vj[r] /= norm;
        }
        stepper.reset(); // tangent part of y changed under the integrator

        std::array<double, 5> row{t, 0.0, 0.0, 0.0, 0.0};
        for (int j = 0; j < 4; ++j) row[1 + j] = log_sums[j] / t;
        res.convergence_history.push_back(row);
    }

    for (int j = 0; j < 4; ++j) res.spectrum[j] = log_sums[j] / t;
    std::sort(res.spectrum.begin(), res.spectrum.end(), std::greater<double>());
    res.d_ky = kaplan_yorke(res.spectrum);
    res.attractor = classify_attractor(res.spectrum, zero_threshold);
    res.mean_trace = trace_integral / t;
    res.final_state = State::from_array({y[0], y[1], y[2], y[3]});
    return res;
}

} // namespace detail

// Spectrum of the circuit model itself, from s0 with the transient handled
// internally.
inline LyapunovResult lyapunov_spectrum(const State& s0, const ModelParams& p, const GCoeffs& g,
                                        const IntegratorConfig& cfg, double renorm_interval = 0.01,
                                        double total_time = 2000.0,
                                        double zero_threshold = default_zero_threshold) {
    p.validate();
    g.validate();
    if (!s0.finite()) throw non_finite_error("lyapunov_spectrum: non-finite initial state");
    auto rhs = [&](double, const std::array<double, 4>& y) {
        return vector_field(State::from_array(y), p, g).to_array();
    };
    auto jac = [&](const std::array<double, 4>& y) { return jacobian(State::from_array(y), p, g); };
    auto trace_fn = [&](const std::array<double, 4>& y) { return jacobian_trace(y[0], p, g); };
    return detail::benettin_spectrum(s0.to_array(), rhs, jac, trace_fn, cfg, renorm_interval,
                                     total_time, zero_threshold);
}

// ---------------------------------------------------------------------------
// Next-maxima map and its geometric structure

inline NextMaximaMap next_maxima_map(const MaximaSeries& ms) {
    if (ms.values.size() < 2)
        throw too_few_maxima_error("next_maxima_map: need at least 2 maxima, have " +
                                   std::to_string(ms.values.size()));
    NextMaximaMap map;
    map.points.reserve(ms.values.size() - 1);
    for (std::size_t i = 0; i + 1 < ms.values.size(); ++i)
        map.points.emplace_back(ms.values[i], ms.values[i + 1]);
    return map;
}

enum class MapStructure { TransientDecay, PointCluster, ClosedCurve, Scattered };

inline const char* to_string(MapStructure s) {
    switch (s) {
        case MapStructure::TransientDecay: return "TransientDecay";
        case MapStructure::PointCluster: return "PointCluster";
        case MapStructure::ClosedCurve: return "ClosedCurve";
        default: return "Scattered";
    }
}

struct MapStructureOptions {
    double cluster_abs_diameter = 1e-4;   // absolute collapse threshold
    double cluster_rel_diameter = 1e-3;   // relative to max |value|, floor 1
    double branch_gap_fraction = 0.1;     // 1-D gap splitting, fraction of range
    double branch_width_fraction = 0.02;  // max intra-cluster spread, fraction of range
    std::size_t max_branches = 8;
    double closed_gap_fraction = 0.05;    // max chain gap vs extent for a closed curve
    double curve_occupancy = 0.15;        // max occupied fraction of a 32x32 grid
    std::size_t min_curve_points = 24;
    double decay_monotone_fraction = 0.95;
    double decay_drop_factor = 10.0;      // total drop vs tail spread
};

struct MapStructureReport {
    MapStructure kind = MapStructure::Scattered;
    std::size_t cluster_count = 0;
    double diameter = 0.0;        // bbox diagonal of the 2-D point set
    double max_gap_ratio = 0.0;   // largest angular-chain gap / extent (closed-curve test)
    double occupancy = 0.0;       // occupied fraction of the 32x32 grid
    std::string detail;
};

inline MapStructureReport analyze_map_structure(const NextMaximaMap& map,
                                                const MapStructureOptions& opt = {}) {
    MapStructureReport rep;
    const auto& pts = map.points;
    if (pts.empty()) throw too_few_maxima_error("analyze_map_structure: empty map");

    std::vector<double> v;
    v.reserve(pts.size() + 1);
    for (const auto& pq : pts) v.push_back(pq.first);
    v.push_back(pts.back().second);

    double v_lo = v[0], v_hi = v[0], v_abs = 0.0;
    for (double x : v) {
        v_lo = std::min(v_lo, x);
        v_hi = std::max(v_hi, x);
        v_abs = std::max(v_abs, std::fabs(x));
    }
    const double range = v_hi - v_lo;
    rep.diameter = range * std::sqrt(2.0); // points live on the (M_k, M_{k+1}) square

    if (v.size() < 6) {
        rep.kind = MapStructure::TransientDecay;
        rep.detail = "only " + std::to_string(v.size()) + " maxima; treated as a decayed transient";
        return rep;
    }

    // 1. decaying transient: an almost-monotone fall that dwarfs the tail spread
    {
        std::size_t dec = 0;
        for (std::size_t i = 1; i < v.size(); ++i)
            if (v[i] < v[i - 1]) ++dec;
        const double frac = static_cast<double>(dec) / static_cast<double>(v.size() - 1);
        const std::size_t tail_start = v.size() - v.size() / 4 - 1;
        double t_lo = v[tail_start], t_hi = v[tail_start];
        for (std::size_t i = tail_start; i < v.size(); ++i) {
            t_lo = std::min(t_lo, v[i]);
            t_hi = std::max(t_hi, v[i]);
        }
        const double drop = v.front() - v.back();
        if (frac >= opt.decay_monotone_fraction && drop > 1e-12 * std::max(1.0, v_abs) &&
            drop > opt.decay_drop_factor * std::max(t_hi - t_lo, 1e-300)) {
            rep.kind = MapStructure::TransientDecay;
            rep.detail = "maxima fall almost monotonically (fraction " + std::to_string(frac) +
                         ", total drop " + std::to_string(drop) + ")";
            return rep;
        }
    }

    // 2. point cluster(s): full collapse, or few narrow branches
    const double collapse = std::max(opt.cluster_abs_diameter,
                                     opt.cluster_rel_diameter * std::max(1.0, v_abs));
    if (rep.diameter <= collapse) {
        rep.kind = MapStructure::PointCluster;
        rep.cluster_count = 1;
        rep.detail = "all points within diameter " + std::to_string(rep.diameter);
        return rep;
    }
    {
        std::vector<double> sorted = v;
        std::sort(sorted.begin(), sorted.end());
        std::vector<std::pair<double, double>> clusters; // (lo, hi)
        clusters.emplace_back(sorted[0], sorted[0]);
        for (std::size_t i = 1; i < sorted.size(); ++i) {
            if (sorted[i] - sorted[i - 1] > opt.branch_gap_fraction * range)
                clusters.emplace_back(sorted[i], sorted[i]);
            else
                clusters.back().second = sorted[i];
        }
        double widest = 0.0;
        for (const auto& [lo, hi] : clusters) widest = std::max(widest, hi - lo);
        if (clusters.size() >= 2 && clusters.size() <= opt.max_branches &&
            widest <= opt.branch_width_fraction * range) {
            rep.kind = MapStructure::PointCluster;
            rep.cluster_count = clusters.size();
            rep.detail = std::to_string(clusters.size()) + " narrow branches (widest " +
                         std::to_string(widest) + " of range " + std::to_string(range) + ")";
            return rep;
        }
    }

    // 3. closed curve: normalized points, ordered by angle about the centroid,
    // form a chain whose largest gap (wrap included) stays small, and the set
    // stays thin on a coarse grid
    if (pts.size() >= opt.min_curve_points) {
        const double px_range = range > 0.0 ? range : 1.0;
        std::vector<std::pair<double, double>> q;
        q.reserve(pts.size());
        double cx = 0.0, cy = 0.0;
        for (const auto& [a, b] : pts) {
            q.emplace_back((a - v_lo) / px_range, (b - v_lo) / px_range);
            cx += q.back().first;
            cy += q.back().second;
        }
        cx /= static_cast<double>(q.size());
        cy /= static_cast<double>(q.size());
        std::sort(q.begin(), q.end(), [&](const auto& A, const auto& B) {
            return std::atan2(A.second - cy, A.first - cx) < std::atan2(B.second - cy, B.first - cx);
        });
        double max_gap = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i) {
            const auto& a = q[i];
            const auto& b = q[(i + 1) % q.size()];
            max_gap = std::max(max_gap, std::hypot(a.first - b.first, a.second - b.second));
        }
        const double extent = std::sqrt(2.0);
        rep.max_gap_ratio = max_gap / extent;

        constexpr int grid = 32;
        std::vector<char> occ(grid * grid, 0);
        for (const auto& [a, b] : q) {
            const int i = std::min(grid - 1, static_cast<int>(a * grid));
            const int j = std::min(grid - 1, static_cast<int>(b * grid));
            if (i >= 0 && j >= 0) occ[i * grid + j] = 1;
        }
        int used = 0;
        for (char c : occ) used += c;
        rep.occupancy = static_cast<double>(used) / static_cast<double>(grid * grid);

        if (rep.max_gap_ratio <= opt.closed_gap_fraction && rep.occupancy <= opt.curve_occupancy) {
            rep.kind = MapStructure::ClosedCurve;
            rep.detail = "angular chain closes (max gap " + std::to_string(rep.max_gap_ratio) +
                         " of extent, occupancy " + std::to_string(rep.occupancy) + ")";
            return rep;
        }
    }

    rep.kind = MapStructure::Scattered;
    rep.detail = "no cluster, decay or closed-curve structure (max gap ratio " +
                 std::to_string(rep.max_gap_ratio) + ", occupancy " + std::to_string(rep.occupancy) +
                 ")";
    return rep;
}

// Structure each attractor class predicts for its next-maxima map.
inline std::optional<MapStructure> expected_structure(AttractorClass k) {
    switch (k) {
        case AttractorClass::FixedPointAttractor: return MapStructure::TransientDecay;
        case AttractorClass::LimitCycle: return MapStructure::PointCluster;
        case AttractorClass::Torus: return MapStructure::ClosedCurve;
        case AttractorClass::Chaos: return MapStructure::Scattered;
        default: return std::nullopt;
    }
}

inline bool structures_agree(AttractorClass k, MapStructure s) {
    const auto want = expected_structure(k);
    return want.has_value() && *want == s;
}

} // namespace ujm
