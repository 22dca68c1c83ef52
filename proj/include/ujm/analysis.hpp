#pragma once

// Equilibrium location and linear stability analysis: the scalar nullcline
// solve for the positive fixed point, the quartic characteristic polynomial
// of the Jacobian in factored form, a Ferrari-type closed-form root solve
// with Newton polishing, and the stability sweep over the control parameter.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "ujm/errors.hpp"
#include "ujm/model.hpp"
#include "ujm/parallel.hpp"

namespace ujm {

struct FixedPoint {
    State state;           // u* = 0 by construction
    double m_value = 0.0;
    double residual = 0.0; // norm of vector_field at the point
    std::string warning;   // nonempty if more than one sign change was bracketed
};

struct EigenResult {
    std::array<std::complex<double>, 4> eigenvalues; // sorted by real part, descending
    double stable_pair_re = 0.0;   // smaller of the two per-pair max real parts
    double unstable_pair_re = 0.0; // larger of the two
    bool is_unstable = false;
    double max_char_residual = 0.0; // worst relative characteristic-polynomial residual
};

// Threshold on Re(lambda) above which a pair counts as unstable.
inline constexpr double instability_threshold = 1e-9;

namespace detail {

using cplx = std::complex<double>;

// Roots of the monic cubic t^3 + a2 t^2 + a1 t + a0 via Cardano in complex
// arithmetic.
inline std::array<cplx, 3> solve_cubic(double a2, double a1, double a0) {
    const double P = a1 - a2 * a2 / 3.0;
    const double Q = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;
    const cplx disc = std::sqrt(cplx(Q * Q / 4.0 + P * P * P / 27.0));
    cplx w = -Q / 2.0 + disc;
    if (std::abs(-Q / 2.0 - disc) > std::abs(w)) w = -Q / 2.0 - disc;
    cplx u = std::pow(w, 1.0 / 3.0);
    std::array<cplx, 3> roots;
    const cplx rot(-0.5, std::sqrt(3.0) / 2.0);
    if (std::abs(u) < 1e-300) {
        const cplx t = std::pow(cplx(-Q), 1.0 / 3.0);
        roots = {t, t * rot, t * std::conj(rot)};
    } else {
        cplx uk = u;
        for (int k = 0; k < 3; ++k) {
            roots[k] = uk - P / (3.0 * uk);
            uk *= rot;
        }
    }
    for (auto& r : roots) r -= a2 / 3.0;
    return roots;
}

// Roots of the monic quadratic y^2 + b y + c, using the numerically stable
// pairing root1 * root2 = c.
inline std::array<cplx, 2> solve_quadratic(const cplx& b, const cplx& c) {
    const cplx disc = std::sqrt(b * b - 4.0 * c);
    const cplx cand1 = -(b + disc) * 0.5;
    const cplx cand2 = -(b - disc) * 0.5;
    const cplx y1 = std::abs(cand1) >= std::abs(cand2) ? cand1 : cand2;
    if (std::abs(y1) < 1e-300) return {cplx(0.0), -b};
    return {y1, c / y1};
}

inline cplx eval_quartic(const std::array<double, 4>& c, const cplx& x) {
    // c = {c3, c2, c1, c0} for x^4 + c3 x^3 + c2 x^2 + c1 x + c0
    return (((x + c[0]) * x + c[1]) * x + c[2]) * x + c[3];
}

inline double quartic_residual_scale(const std::array<double, 4>& c, const cplx& x) {
    const double ax = std::abs(x);
    return ax * ax * ax * ax + std::fabs(c[0]) * ax * ax * ax + std::fabs(c[1]) * ax * ax +
           std::fabs(c[2]) * ax + std::fabs(c[3]) + 1e-300;
}

} // namespace detail

// Monic quartic coefficients {c3, c2, c1, c0} of det(lambda I - J) at a state
// with characteristic slope gp = g'(x*). The Jacobian's sparsity factors the
// polynomial as (fast 2x2 block) * (modulation block) - coupling:
//   (l^2 + (gp/mu + a1) l + (gp a1 + a2)/mu) (l^2 + beta l + omega^2) - m a1 gamma / mu
// which avoids the catastrophic cancellation a trace-power method would meet
// at slope/mu ~ 1e4.
inline std::array<double, 4> char_poly_coefficients(double gp, const ModelParams& p) {
    const double p1 = gp / p.mu + p.a1;
    const double p0 = (gp * p.a1 + p.a2) / p.mu;
    const double q1 = p.beta;
    const double q0 = p.omega * p.omega;
    return {p1 + q1,                      // c3
            p0 + q0 + p1 * q1,            // c2
            p1 * q0 + p0 * q1,            // c1
            p0 * q0 - p.m * p.a1 * p.gamma / p.mu}; // c0
}

// All four roots of the monic quartic with real coefficients {c3,c2,c1,c0},
// by Ferrari's reduction, then Newton-polished on the undepressed quartic.
inline std::array<std::complex<double>, 4> solve_quartic(const std::array<double, 4>& c) {
    using detail::cplx;
    const double c3 = c[0], c2 = c[1], c1 = c[2], c0 = c[3];
    const double shift = c3 / 4.0;
    const double p = c2 - 3.0 * c3 * c3 / 8.0;
    const double q = c1 - c3 * c2 / 2.0 + c3 * c3 * c3 / 8.0;
    const double r = c0 - c3 * c1 / 4.0 + c3 * c3 * c2 / 16.0 - 3.0 * c3 * c3 * c3 * c3 / 256.0;

    const double scale = std::max({std::fabs(p), std::sqrt(std::fabs(r)), std::cbrt(std::fabs(q)), 1.0});
    std::array<cplx, 4> roots;
    if (std::fabs(q) < 1e-14 * scale * scale * scale) {
        // effectively biquadratic in y^2
        const auto w = detail::solve_quadratic(cplx(p), cplx(r));
        roots[0] = std::sqrt(w[0]);
        roots[1] = -roots[0];
        roots[2] = std::sqrt(w[1]);
        roots[3] = -roots[2];
    } else {
        // resolvent: 8 m^3 + 8 p m^2 + (2 p^2 - 8 r) m - q^2 = 0
        const auto ms = detail::solve_cubic(p, p * p / 4.0 - r, -q * q / 8.0);
        cplx m = ms[0];
        for (const auto& cand : ms)
            if (std::abs(cand) > std::abs(m)) m = cand;
        const cplx s = std::sqrt(2.0 * m);
        const cplx base = p / 2.0 + m;
        const cplx offs = q / (2.0 * s);
        const auto y01 = detail::solve_quadratic(s, base - offs);
        const auto y23 = detail::solve_quadratic(-s, base + offs);
        roots = {y01[0], y01[1], y23[0], y23[1]};
    }
    for (auto& z : roots) z -= shift;

    // Newton polish against the original quartic; keep the best iterate.
    for (auto& z : roots) {
        cplx best = z;
        double best_res = std::abs(detail::eval_quartic(c, z)) / detail::quartic_residual_scale(c, z);
        for (int it = 0; it < 40; ++it) {
            const cplx f = detail::eval_quartic(c, z);
            const cplx df = ((4.0 * z + 3.0 * c3) * z + 2.0 * c2) * z + c1;
            if (std::abs(df) < 1e-300) break;
            const cplx step = f / df;
            z -= step;
            const double res = std::abs(detail::eval_quartic(c, z)) / detail::quartic_residual_scale(c, z);
            if (res < best_res) {
                best = z;
                best_res = res;
            }
            if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(z)))
                break;
        }
        z = best;
    }
    return {roots[0], roots[1], roots[2], roots[3]};
}

// ---------------------------------------------------------------------------
// Fixed point

// Solves g(x) = A0/A1 - (A2/A1 - m gamma/omega^2) x for x > 0 by bracketing
// plus safeguarded Newton, then fills the remaining components from the
// nullclines y* = A0/A1 - (A2/A1 - m gamma/omega^2) x*, z* = gamma x*/omega^2,
// u* = 0.
inline FixedPoint find_fixed_point(const ModelParams& p, const GCoeffs& g) {
    p.validate();
    g.validate();
    const double C = p.a0 / p.a1;
    const double D = p.a2 / p.a1 - p.m * p.gamma / (p.omega * p.omega);
    auto phi = [&](double x) { return eval_g(x, g) - C + D * x; };

    const double lo = 1e-9;
    double hi = std::fabs(C) / std::max(std::fabs(g.a), 1e-300) * 10.0;
    hi = std::max(hi, 1e-6);
    if (phi(lo) >= 0.0)
        throw no_root_error("find_fixed_point: no positive root (nullcline already crossed at x = 1e-9)");
    int widen = 0;
    while (phi(hi) < 0.0) {
        hi *= 2.0;
        if (++widen > 60) throw no_root_error("find_fixed_point: no sign change up to x = " + std::to_string(hi));
    }

    // scan for additional crossings; more than one is legal but suspicious
    std::string warning;
    {
        int changes = 0;
        const int nscan = 256;
        double prev = phi(lo);
        double first_hi = hi;
        for (int i = 1; i <= nscan; ++i) {
            const double x = lo + (hi - lo) * static_cast<double>(i) / nscan;
            const double cur = phi(x);
            if ((prev < 0.0) != (cur < 0.0)) {
                if (++changes == 1) first_hi = x;
            }
            prev = cur;
        }
        if (changes > 1) {
            warning = "multiple nullcline crossings (" + std::to_string(changes) +
                      ") detected on the search bracket; returning the smallest root";
            hi = first_hi; // shrink the bracket onto the first crossing
        }
    }

    double xl = lo, xr = hi;
    double x = 0.5 * (xl + xr);
    for (int it = 0; it < 200; ++it) {
        const double f = phi(x);
        if (f == 0.0) break;
        if (f < 0.0)
            xl = x;
        else
            xr = x;
        const double df = eval_g_prime(x, g) + D;
        double x_next = (df != 0.0) ? x - f / df : 0.5 * (xl + xr);
        if (!(x_next > xl && x_next < xr)) x_next = 0.5 * (xl + xr);
        if (std::fabs(x_next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * std::fabs(x)) {
            x = x_next;
            break;
        }
        x = x_next;
    }

    FixedPoint fp;
    fp.m_value = p.m;
    fp.warning = warning;
    fp.state = {x, C - D * x, p.gamma * x / (p.omega * p.omega), 0.0};
    const State f = vector_field(fp.state, p, g);
    fp.residual = std::sqrt(f.x * f.x + f.y * f.y + f.z * f.z + f.u * f.u);
    if (!(fp.state.x > 0.0)) throw no_root_error("find_fixed_point: root is not positive");
    if (!(fp.residual < 1e-10))
        throw non_convergence_error("find_fixed_point: residual " + std::to_string(fp.residual) +
                                    " exceeds 1e-10");
    return fp;
}

// Stock initial state for dynamics runs: the fixed point at the given m,
// perturbed on the x component. Reproducible and close to the attractor.
inline State default_initial_state(const ModelParams& p, const GCoeffs& g,
                                   double perturbation = 1e-2) {
    FixedPoint fp = find_fixed_point(p, g);
    fp.state.x += perturbation;
    return fp.state;
}

// ---------------------------------------------------------------------------
// Eigenvalues

inline EigenResult eigenvalues_at(const FixedPoint& fp, const ModelParams& p, const GCoeffs& g) {
    using detail::cplx;
    const double gp = eval_g_prime(fp.state.x, g);
    const auto coeffs = char_poly_coefficients(gp, p);
    auto roots = solve_quartic(coeffs);

    // real-axis snap and conjugate pairing (the coefficients are real)
    for (auto& z : roots)
        if (std::fabs(z.imag()) <= 1e-10 * (1.0 + std::abs(z))) z = cplx(z.real(), 0.0);

    std::array<int, 4> partner{-1, -1, -1, -1};
    for (int i = 0; i < 4; ++i) {
        if (partner[i] >= 0 || roots[i].imag() == 0.0) continue;
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (int j = 0; j < 4; ++j) {
            if (j == i || partner[j] >= 0 || roots[j].imag() == 0.0) continue;
            const double d = std::abs(roots[j] - std::conj(roots[i]));
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        if (best >= 0) {
            partner[i] = best;
            partner[best] = i;
            const cplx avg = 0.5 * (roots[i] + std::conj(roots[best]));
            roots[i] = avg;
            roots[best] = std::conj(avg);
        } else {
            // lone complex root: numerical noise, snap to real
            roots[i] = cplx(roots[i].real(), 0.0);
        }
    }

    std::sort(roots.begin(), roots.end(), [](const cplx& a, const cplx& b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });

    // group into two pairs: conjugates stay together, leftover reals pair up
    // in sorted order
    std::vector<std::array<cplx, 2>> pairs;
    std::array<bool, 4> used{};
    for (int i = 0; i < 4; ++i) {
        if (used[i]) continue;
        if (roots[i].imag() != 0.0) {
            for (int j = i + 1; j < 4; ++j) {
                if (!used[j] && std::abs(roots[j] - std::conj(roots[i])) <
                                    1e-9 * (1.0 + std::abs(roots[i]))) {
                    pairs.push_back({roots[i], roots[j]});
                    used[i] = used[j] = true;
                    break;
                }
            }
            if (!used[i]) {
                pairs.push_back({roots[i], roots[i]});
                used[i] = true;
            }
        }
    }
    std::vector<cplx> reals;
    for (int i = 0; i < 4; ++i)
        if (!used[i]) reals.push_back(roots[i]);
    for (std::size_t i = 0; i + 1 < reals.size(); i += 2) pairs.push_back({reals[i], reals[i + 1]});
    if (reals.size() % 2 == 1) pairs.push_back({reals.back(), reals.back()});

    EigenResult res;
    res.eigenvalues = roots;
    double pair_max_lo = std::numeric_limits<double>::infinity();
    double pair_max_hi = -std::numeric_limits<double>::infinity();
    for (const auto& pr : pairs) {
        const double mx = std::max(pr[0].real(), pr[1].real());
        pair_max_lo = std::min(pair_max_lo, mx);
        pair_max_hi = std::max(pair_max_hi, mx);
    }
    res.stable_pair_re = pair_max_lo;
    res.unstable_pair_re = pair_max_hi;

    double worst = 0.0;
    bool unstable = false;
    for (const auto& z : roots) {
        worst = std::max(worst, std::abs(detail::eval_quartic(coeffs, z)) /
                                    detail::quartic_residual_scale(coeffs, z));
        if (z.real() > instability_threshold) unstable = true;
    }
    res.max_char_residual = worst;
    res.is_unstable = unstable;
    if (!(worst < 1e-8))
        throw non_convergence_error("eigenvalues_at: characteristic residual " +
                                    std::to_string(worst) + " exceeds 1e-8");
    return res;
}

// ---------------------------------------------------------------------------
// Stability sweep

struct StabilityPoint {
    double m = 0.0;
    FixedPoint fp;
    EigenResult eig;
};

// Per-m fixed point and eigen classification; any per-point failure is
// rethrown with the offending m attached.
inline std::vector<StabilityPoint> stability_sweep(const std::vector<double>& m_grid,
                                                   const ModelParams& p_base, const GCoeffs& g,
                                                   unsigned workers = 0) {
    if (m_grid.empty()) throw config_error("stability_sweep: empty grid");
    std::vector<StabilityPoint> out(m_grid.size());
    parallel_for(
        m_grid.size(),
        [&](std::size_t i) {
            ModelParams p = p_base;
            p.m = m_grid[i];
            try {
                StabilityPoint sp;
                sp.m = p.m;
                sp.fp = find_fixed_point(p, g);
                sp.eig = eigenvalues_at(sp.fp, p, g);
                out[i] = std::move(sp);
            } catch (const error& e) {
                throw domain_error("stability_sweep at m = " + std::to_string(p.m) + ": " + e.what());
            }
        },
        workers);
    return out;
}

inline std::vector<double> uniform_grid(double from, double to, std::size_t points) {
    if (points == 0) throw config_error("uniform_grid: need at least one point");
    std::vector<double> g(points);
    if (points == 1) {
        g[0] = from;
        return g;
    }
    for (std::size_t i = 0; i < points; ++i)
        g[i] = from + (to - from) * static_cast<double>(i) / static_cast<double>(points - 1);
    return g;
}

} // namespace ujm
