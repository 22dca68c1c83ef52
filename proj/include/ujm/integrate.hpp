#pragma once

// Adaptive time integration: an embedded Dormand-Prince 5(4) pair with PI
// step-size control, fixed-interval trajectory sampling, local-maxima event
// extraction with quadratic refinement, and the driven single-branch
// simulation used for hysteresis studies.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "ujm/errors.hpp"
#include "ujm/model.hpp"

namespace ujm {

struct IntegratorConfig {
    double rtol = 1e-8;
    double atol = 1e-10;
    double h_init = 1e-4;       // dimensionless time
    double h_max = 0.05;
    double t_transient = 500.0; // discarded warm-up
    double t_record = 500.0;    // recorded duration
    double sample_dt = 0.005;   // >= 100 samples per fast oscillation at stock parameters
    double blowup_norm = 1e9;

    void validate() const {
        if (!(rtol > 0.0) || !(atol >= 0.0))
            throw config_error("IntegratorConfig: rtol must be > 0 and atol >= 0");
        if (!(h_init > 0.0) || !(h_max > 0.0) || h_init > h_max)
            throw config_error("IntegratorConfig: need 0 < h_init <= h_max");
        if (t_transient < 0.0 || t_record < 0.0)
            throw config_error("IntegratorConfig: durations must be >= 0");
        if (!(sample_dt > 0.0))
            throw config_error("IntegratorConfig: sample_dt must be > 0");
    }
};

struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;
    ModelParams params_used;
};

struct MaximaSeries {
    std::size_t coordinate = 3; // index into State: 0=x 1=y 2=z 3=u
    std::vector<double> times;
    std::vector<double> values;
};

struct HysteresisLoop {
    double drive_offset = 0.0;
    double drive_amplitude = 0.0;
    double drive_freq = 0.0; // angular, dimensionless time
    std::vector<std::pair<double, double>> samples; // (drive value, x)
    double loop_area = 0.0;       // shoelace over one period, positive when x lags the drive
    double pinch_distance = 0.0;  // min Euclidean distance of the curve to the origin
};

namespace detail {

// Dormand-Prince RK5(4)7M coefficients.
inline constexpr double dp_c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
inline constexpr double dp_a[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
// 5th-order weights equal the last a-row (FSAL); e holds b5 - b4.
inline constexpr double dp_e[7] = {71.0 / 57600,  0.0,          -71.0 / 16695, 71.0 / 1920,
                                   -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

// Adaptive stepper over a flat N-vector. RHS signature:
//   void rhs(double t, const std::array<double,N>& y, std::array<double,N>& dydt)
// advance_to() integrates to an exact target time, clipping the last step,
// and invokes the observer after every accepted step.
template <std::size_t N, class RHS>
class Dopri5 {
public:
    Dopri5(RHS rhs, const IntegratorConfig& cfg)
        : rhs_(std::move(rhs)), rtol_(cfg.rtol), atol_(cfg.atol), h_max_(cfg.h_max),
          blowup_(cfg.blowup_norm), h_(std::min(cfg.h_init, cfg.h_max)) {}

    template <class Observer>
    void advance_to(double& t, std::array<double, N>& y, double t_end, Observer&& observe) {
        if (t_end <= t) return;
        if (!dy_valid_) {
            rhs_(t, y, k_[0]);
            dy_valid_ = true;
        }
        bool rejected = false;
        while (t < t_end) {
            const double h_left = t_end - t;
            double h = std::min({h_, h_max_, h_left});
            if (h_left - h < 1e-14 * std::fabs(t_end)) h = h_left;

            // stages; k_[0] carries f(t, y) from the previous step (FSAL)
            for (std::size_t s = 1; s < 7; ++s) {
                for (std::size_t i = 0; i < N; ++i) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < s; ++j) acc += dp_a[s][j] * k_[j][i];
                    y_stage_[i] = y[i] + h * acc;
                }
                rhs_(t + dp_c[s] * h, y_stage_, k_[s]);
            }
            // 5th-order solution is stage 6's argument (a-row 6 = b); error from e-weights
            double err = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                double de = 0.0;
                for (std::size_t s = 0; s < 7; ++s) de += dp_e[s] * k_[s][i];
                de *= h;
                if (de == 0.0) continue; // keeps atol = 0 usable on decoupled components
                const double ynew = y_stage_[i];
                const double sk = atol_ + rtol_ * std::max(std::fabs(y[i]), std::fabs(ynew));
                err += (de / sk) * (de / sk);
            }
            err = std::sqrt(err / static_cast<double>(N));

            const double fac11 = std::pow(std::max(err, 1e-30), expo1_);
            if (std::isfinite(err) && err <= 1.0) {
                t += h;
                y = y_stage_;
                k_[0] = k_[6]; // FSAL
                double fac = fac11 / std::pow(facold_, ctrl_beta_);
                fac = std::max(facc2_, std::min(facc1_, fac / safe_));
                double h_new = h / fac;
                if (rejected) h_new = std::min(h_new, h);
                h_ = h_new;
                facold_ = std::max(err, 1e-4);
                rejected = false;
                double worst = 0.0;
                for (double v : y) worst = std::max(worst, std::fabs(v));
                if (!std::isfinite(worst) || worst > blowup_)
                    throw blow_up_error("integration blew up at t = " + std::to_string(t));
                observe(t, y);
            } else {
                rejected = true;
                if (std::isfinite(err))
                    h_ = h / std::min(facc1_, fac11 / safe_);
                else
                    h_ = h * 0.1;
                if (!(h_ > 1e-14 * std::max(1.0, std::fabs(t))))
                    throw non_convergence_error("step size underflow at t = " + std::to_string(t));
            }
        }
    }

    void advance_to(double& t, std::array<double, N>& y, double t_end) {
        advance_to(t, y, t_end, [](double, const std::array<double, N>&) {});
    }

    // Invalidate the cached FSAL derivative (call after mutating y externally).
    void reset() { dy_valid_ = false; }

private:
    static constexpr double ctrl_beta_ = 0.04;
    static constexpr double expo1_ = 0.2 - ctrl_beta_ * 0.75;
    static constexpr double safe_ = 0.9;
    static constexpr double facc1_ = 5.0;  // max step shrink factor per step
    static constexpr double facc2_ = 0.1;  // max step growth factor is 1/facc2

    RHS rhs_;
    double rtol_, atol_, h_max_, blowup_;
    double h_;
    double facold_ = 1e-4;
    bool dy_valid_ = false;
    std::array<std::array<double, N>, 7> k_{};
    std::array<double, N> y_stage_{};
};

template <std::size_t N, class RHS>
Dopri5<N, RHS> make_dopri5(RHS rhs, const IntegratorConfig& cfg) {
    return Dopri5<N, RHS>(std::move(rhs), cfg);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Trajectory integration

// Integrates the full model from s0, discards [0, t_transient), then samples
// every sample_dt on [t_transient, t_transient + t_record].
inline Trajectory integrate_trajectory(const State& s0, const ModelParams& p, const GCoeffs& g,
                                       const IntegratorConfig& cfg) {
    cfg.validate();
    p.validate();
    g.validate();
    if (!s0.finite()) throw non_finite_error("integrate_trajectory: non-finite initial state");

    auto rhs = [&p, &g](double, const std::array<double, 4>& y, std::array<double, 4>& dydt) {
        const State f = vector_field(State::from_array(y), p, g);
        dydt = f.to_array();
    };
    auto stepper = detail::make_dopri5<4>(rhs, cfg);

    double t = 0.0;
    std::array<double, 4> y = s0.to_array();
    stepper.advance_to(t, y, cfg.t_transient);

    Trajectory traj;
    traj.params_used = p;
    const auto n_samples = static_cast<std::size_t>(std::llround(cfg.t_record / cfg.sample_dt));
    traj.times.reserve(n_samples + 1);
    traj.states.reserve(n_samples + 1);
    traj.times.push_back(t);
    traj.states.push_back(State::from_array(y));
    for (std::size_t k = 1; k <= n_samples; ++k) {
        const double t_target = cfg.t_transient + static_cast<double>(k) * cfg.sample_dt;
        stepper.advance_to(t, y, t_target);
        traj.times.push_back(t);
        traj.states.push_back(State::from_array(y));
    }
    return traj;
}

// ---------------------------------------------------------------------------
// Local maxima

// All interior strict local maxima of one sampled coordinate, each refined by
// the quadratic through the three bracketing samples. A monotone signal
// yields an empty series; fewer than 3 samples is an error.
inline MaximaSeries extract_maxima(const Trajectory& traj, std::size_t coordinate) {
    if (coordinate > 3) throw config_error("extract_maxima: coordinate index must be 0..3");
    const std::size_t n = traj.times.size();
    if (n < 3) throw too_few_samples_error("extract_maxima: need at least 3 samples");

    MaximaSeries ms;
    ms.coordinate = coordinate;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double vm = traj.states[i - 1][coordinate];
        const double v0 = traj.states[i][coordinate];
        const double vp = traj.states[i + 1][coordinate];
        if (!(v0 > vm && v0 > vp)) continue;
        const double denom = vm - 2.0 * v0 + vp; // < 0 at a strict maximum unless collinear
        double delta = 0.0;
        if (denom < 0.0) delta = 0.5 * (vm - vp) / denom;
        const double dt_l = traj.times[i] - traj.times[i - 1];
        ms.times.push_back(traj.times[i] + delta * dt_l);
        ms.values.push_back(v0 - 0.25 * (vm - vp) * delta);
    }
    return ms;
}

// ---------------------------------------------------------------------------
// Driven branch / hysteresis

// Integrates the isolated fast branch mu x' = y_in(t) - g(x) under the drive
// y_in(t) = offset + amplitude sin(freq t), discards discard_periods full
// periods, then records record_periods periods of (y_in, x) pairs.
inline HysteresisLoop simulate_driven_branch(const GCoeffs& g, double mu, double drive_offset,
                                             double drive_amplitude, double drive_freq,
                                             const IntegratorConfig& cfg,
                                             int discard_periods = 5, int record_periods = 2,
                                             std::size_t samples_per_period = 2048) {
    g.validate();
    cfg.validate();
    if (!(mu > 0.0)) throw config_error("simulate_driven_branch: mu must be > 0");
    if (drive_amplitude < 0.0)
        throw config_error("simulate_driven_branch: drive_amplitude must be >= 0");
    if (!(drive_freq > 0.0)) throw config_error("simulate_driven_branch: drive_freq must be > 0");
    if (discard_periods < 5)
        throw config_error("simulate_driven_branch: at least 5 discarded periods required");
    if (record_periods < 2)
        throw config_error("simulate_driven_branch: at least 2 recorded periods required");

    auto drive = [=](double t) { return drive_offset + drive_amplitude * std::sin(drive_freq * t); };
    auto rhs = [&g, mu, &drive](double t, const std::array<double, 1>& y,
                                std::array<double, 1>& dydt) {
        dydt[0] = (drive(t) - eval_g(y[0], g)) / mu;
    };
    auto stepper = detail::make_dopri5<1>(rhs, cfg);

    const double period = 2.0 * std::acos(-1.0) / drive_freq;
    double t = 0.0;
    std::array<double, 1> y = {0.0};
    stepper.advance_to(t, y, static_cast<double>(discard_periods) * period);

    HysteresisLoop loop;
    loop.drive_offset = drive_offset;
    loop.drive_amplitude = drive_amplitude;
    loop.drive_freq = drive_freq;
    const std::size_t n_rec = samples_per_period * static_cast<std::size_t>(record_periods);
    loop.samples.reserve(n_rec + 1);
    const double t0 = t;
    loop.samples.emplace_back(drive(t), y[0]);
    for (std::size_t k = 1; k <= n_rec; ++k) {
        const double t_target =
            t0 + static_cast<double>(k) * period / static_cast<double>(samples_per_period);
        stepper.advance_to(t, y, t_target);
        loop.samples.emplace_back(drive(t_target), y[0]);
    }

    // signed shoelace area of the polygon through one recorded period,
    // closed back onto its first vertex
    double area2 = 0.0;
    for (std::size_t k = 0; k < samples_per_period; ++k) {
        const auto& [p0, q0] = loop.samples[k];
        const auto& [p1, q1] = loop.samples[(k + 1) % samples_per_period];
        area2 += p0 * q1 - p1 * q0;
    }
    loop.loop_area = 0.5 * area2;

    double pinch2 = std::numeric_limits<double>::infinity();
    for (const auto& [pv, qv] : loop.samples) pinch2 = std::min(pinch2, pv * pv + qv * qv);
    loop.pinch_distance = std::sqrt(pinch2);
    return loop;
}

// Diagonal of the bounding box of the recorded loop; the pinch criterion is
// stated relative to this extent.
inline double loop_extent(const HysteresisLoop& loop) {
    if (loop.samples.empty()) return 0.0;
    double plo = loop.samples[0].first, phi = plo;
    double qlo = loop.samples[0].second, qhi = qlo;
    for (const auto& [pv, qv] : loop.samples) {
        plo = std::min(plo, pv);
        phi = std::max(phi, pv);
        qlo = std::min(qlo, qv);
        qhi = std::max(qhi, qv);
    }
    return std::hypot(phi - plo, qhi - qlo);
}

} // namespace ujm
