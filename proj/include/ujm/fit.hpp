#pragma once

// Least-squares fitting of the characteristic g(x) = x (a + b x^2/(x+c)^2)
// to current-voltage data: damped Gauss-Newton with an analytic Jacobian,
// a positivity-preserving log parameterization of c, and covariance
// estimates from the normal-matrix eigendecomposition.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ujm/errors.hpp"
#include "ujm/model.hpp"

namespace ujm {

struct IVDataset {
    std::vector<std::pair<double, double>> points; // (x: current, v: voltage), dimensionless
    std::string source;

    void validate() const {
        if (points.size() < 4)
            throw too_few_samples_error("IVDataset: need at least 4 points, have " +
                                        std::to_string(points.size()));
        for (const auto& [x, v] : points)
            if (!std::isfinite(x) || !std::isfinite(v))
                throw non_finite_error("IVDataset: non-finite entry");
    }
};

struct FitResult {
    GCoeffs coeffs;
    double r_squared = 0.0;
    double residual_norm = 0.0; // sqrt of the sum of squared residuals
    std::size_t iterations = 0;
    bool converged = false;
    std::array<double, 3> covariance_diag{}; // variances of (a, b, c); inf marks a null direction
    bool rank_deficient = false;
};

inline double r_squared(const IVDataset& data, const GCoeffs& coeffs) {
    data.validate();
    coeffs.validate();
    double mean = 0.0;
    for (const auto& [x, v] : data.points) mean += v;
    mean /= static_cast<double>(data.points.size());
    double ss_tot = 0.0, ss_res = 0.0;
    for (const auto& [x, v] : data.points) {
        ss_tot += (v - mean) * (v - mean);
        const double r = v - eval_g(x, coeffs);
        ss_res += r * r;
    }
    if (!(ss_tot > 0.0))
        throw zero_variance_error("r_squared: voltage column is constant");
    return 1.0 - ss_res / ss_tot;
}

namespace detail {

// residual Jacobian row in theta = (a, b, log c)
inline std::array<double, 3> g_partials(double x, const GCoeffs& c) {
    const double s = x + c.c;
    const double x2 = x * x;
    return {x, x * x2 / (s * s), -2.0 * c.b * c.c * x * x2 / (s * s * s)};
}

// eigendecomposition of a symmetric 3x3 by cyclic Jacobi rotations
inline void jacobi_eigen3(std::array<std::array<double, 3>, 3> A, std::array<double, 3>& eval,
                          std::array<std::array<double, 3>, 3>& evec) {
    evec = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    for (int sweep = 0; sweep < 50; ++sweep) {
        double off = std::fabs(A[0][1]) + std::fabs(A[0][2]) + std::fabs(A[1][2]);
        if (off < 1e-300) break;
        for (int p = 0; p < 2; ++p)
            for (int q = p + 1; q < 3; ++q) {
                if (A[p][q] == 0.0) continue;
                const double theta = (A[q][q] - A[p][p]) / (2.0 * A[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double cth = 1.0 / std::sqrt(t * t + 1.0);
                const double sth = t * cth;
                for (int k = 0; k < 3; ++k) {
                    const double akp = A[k][p], akq = A[k][q];
                    A[k][p] = cth * akp - sth * akq;
                    A[k][q] = sth * akp + cth * akq;
                }
                for (int k = 0; k < 3; ++k) {
                    const double apk = A[p][k], aqk = A[q][k];
                    A[p][k] = cth * apk - sth * aqk;
                    A[q][k] = sth * apk + cth * aqk;
                    const double vkp = evec[k][p], vkq = evec[k][q];
                    evec[k][p] = cth * vkp - sth * vkq;
                    evec[k][q] = sth * vkp + cth * vkq;
                }
            }
    }
    for (int i = 0; i < 3; ++i) eval[i] = A[i][i];
}

} // namespace detail

inline FitResult fit_g(const IVDataset& data, const GCoeffs& init,
                       std::size_t max_iterations = 200) {
    data.validate();
    if (!(init.c > 0.0)) throw config_error("fit_g: initial c must be positive");
    if (!std::isfinite(init.a) || !std::isfinite(init.b) || !std::isfinite(init.c))
        throw non_finite_error("fit_g: non-finite initial coefficients");

    const std::size_t n = data.points.size();
    std::array<double, 3> theta{init.a, init.b, std::log(init.c)};
    auto coeffs_of = [](const std::array<double, 3>& th) {
        return GCoeffs{th[0], th[1], std::exp(th[2])};
    };

    auto cost_of = [&](const std::array<double, 3>& th, std::vector<double>& res) {
        const GCoeffs c = coeffs_of(th);
        res.resize(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            res[i] = eval_g(data.points[i].first, c) - data.points[i].second;
            ss += res[i] * res[i];
        }
        return ss;
    };

    std::vector<double> res, res_trial;
    double ss = cost_of(theta, res); // throws singular_input_error on an x = -c collision
    double lambda = 1e-3;
    bool converged = false;
    std::size_t iter = 0;

    std::array<std::array<double, 3>, 3> JtJ{};
    std::array<double, 3> Jtr{};
    for (; iter < max_iterations && !converged; ++iter) {
        const GCoeffs c = coeffs_of(theta);
        JtJ = {};
        Jtr = {};
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = detail::g_partials(data.points[i].first, c);
            for (int p = 0; p < 3; ++p) {
                Jtr[p] += row[p] * res[i];
                for (int q = p; q < 3; ++q) JtJ[p][q] += row[p] * row[q];
            }
        }
        for (int p = 0; p < 3; ++p)
            for (int q = 0; q < p; ++q) JtJ[p][q] = JtJ[q][p];

        const double grad_norm = std::sqrt(Jtr[0] * Jtr[0] + Jtr[1] * Jtr[1] + Jtr[2] * Jtr[2]);
        if (grad_norm < 1e-12 || ss == 0.0) {
            converged = true;
            break;
        }

        bool accepted = false;
        while (!accepted) {
            // Levenberg damping scaled by the normal-matrix diagonal
            std::array<std::array<double, 3>, 3> M = JtJ;
            for (int p = 0; p < 3; ++p)
                M[p][p] += lambda * std::max(JtJ[p][p], 1e-30);

            // Cholesky solve M delta = -Jtr
            std::array<std::array<double, 3>, 3> L{};
            bool spd = true;
            for (int p = 0; p < 3 && spd; ++p) {
                for (int q = 0; q <= p; ++q) {
                    double sum = M[p][q];
                    for (int k = 0; k < q; ++k) sum -= L[p][k] * L[q][k];
                    if (p == q) {
                        if (!(sum > 0.0)) {
                            spd = false;
                            break;
                        }
                        L[p][p] = std::sqrt(sum);
                    } else {
                        L[p][q] = sum / L[q][q];
                    }
                }
            }
            if (!spd) {
                lambda *= 4.0;
                if (lambda > 1e14)
                    throw rank_deficient_error(
                        "fit_g: normal matrix not positive definite even under heavy damping");
                continue;
            }
            std::array<double, 3> w{}, delta{};
            for (int p = 0; p < 3; ++p) {
                double sum = -Jtr[p];
                for (int k = 0; k < p; ++k) sum -= L[p][k] * w[k];
                w[p] = sum / L[p][p];
            }
            for (int p = 2; p >= 0; --p) {
                double sum = w[p];
                for (int k = p + 1; k < 3; ++k) sum -= L[k][p] * delta[k];
                delta[p] = sum / L[p][p];
            }

            std::array<double, 3> trial{theta[0] + delta[0], theta[1] + delta[1],
                                        theta[2] + delta[2]};
            const double step =
                std::sqrt(delta[0] * delta[0] + delta[1] * delta[1] + delta[2] * delta[2]);
            const double scale =
                std::sqrt(theta[0] * theta[0] + theta[1] * theta[1] + theta[2] * theta[2]) + 1e-30;
            double ss_trial;
            try {
                ss_trial = cost_of(trial, res_trial);
            } catch (const singular_input_error&) {
                ss_trial = std::numeric_limits<double>::infinity(); // x = -c collision: back off
            }
            if (std::isfinite(ss_trial) && ss_trial <= ss) {
                theta = trial;
                res.swap(res_trial);
                ss = ss_trial;
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                if (step < 1e-10 * scale) converged = true;
            } else {
                lambda *= 4.0;
                if (lambda > 1e14) {
                    // heaviest damping shrinks the proposal below the step
                    // tolerance: numerically stationary
                    if (step < 1e-10 * scale) {
                        converged = true;
                        accepted = true;
                    } else {
                        throw non_convergence_error(
                            "fit_g: damping exhausted without descent (step " +
                            std::to_string(step) + ")");
                    }
                }
            }
        }
    }
    if (!converged)
        throw non_convergence_error("fit_g: no convergence after " +
                                    std::to_string(max_iterations) + " iterations");

    FitResult out;
    out.coeffs = coeffs_of(theta);
    out.iterations = iter;
    out.converged = true;
    out.residual_norm = std::sqrt(ss);
    out.r_squared = r_squared(data, out.coeffs);

    // covariance from the pseudo-inverse of JtJ at the solution; directions
    // with negligible curvature are unidentifiable and get infinite variance
    {
        const GCoeffs c = coeffs_of(theta);
        JtJ = {};
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = detail::g_partials(data.points[i].first, c);
            for (int p = 0; p < 3; ++p)
                for (int q = p; q < 3; ++q) JtJ[p][q] += row[p] * row[q];
        }
        for (int p = 0; p < 3; ++p)
            for (int q = 0; q < p; ++q) JtJ[p][q] = JtJ[q][p];

        std::array<double, 3> eval{};
        std::array<std::array<double, 3>, 3> evec{};
        detail::jacobi_eigen3(JtJ, eval, evec);
        const double emax = std::max({eval[0], eval[1], eval[2], 0.0});
        const double cutoff = emax * 1e-12;
        const double sigma2 =
            n > 3 ? ss / static_cast<double>(n - 3) : 0.0;
        for (int p = 0; p < 3; ++p) {
            double var = 0.0;
            bool unbounded = false;
            for (int k = 0; k < 3; ++k) {
                if (eval[k] <= cutoff) {
                    if (std::fabs(evec[p][k]) > 1e-6) unbounded = true;
                } else {
                    var += evec[p][k] * evec[p][k] / eval[k];
                }
            }
            if (unbounded) {
                out.covariance_diag[p] = std::numeric_limits<double>::infinity();
                out.rank_deficient = true;
            } else {
                out.covariance_diag[p] = sigma2 * var;
            }
        }
        // report the variance of c itself, not of log c
        if (std::isfinite(out.covariance_diag[2]))
            out.covariance_diag[2] *= out.coeffs.c * out.coeffs.c;
    }
    return out;
}

// Data-driven starting point: a from the small-x slope, a+b from the
// large-x slope, c at its typical corner scale.
inline GCoeffs initial_guess(const IVDataset& data) {
    data.validate();
    std::vector<std::pair<double, double>> pts = data.points;
    std::sort(pts.begin(), pts.end(),
              [](const auto& l, const auto& r) { return std::fabs(l.first) < std::fabs(r.first); });
    const std::size_t decile = std::max<std::size_t>(2, pts.size() / 10);
    auto slope = [](auto first, auto last) {
        double sxv = 0.0, sxx = 0.0;
        for (auto it = first; it != last; ++it) {
            sxv += it->first * it->second;
            sxx += it->first * it->first;
        }
        return sxx > 0.0 ? sxv / sxx : 1.0;
    };
    const double a = slope(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(decile));
    const double asym = slope(pts.end() - static_cast<std::ptrdiff_t>(decile), pts.end());
    return GCoeffs{a, asym - a, 0.01};
}

// ---------------------------------------------------------------------------
// CSV input and unit scaling

inline IVDataset load_iv_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open " + path, 0);
    IVDataset data;
    data.source = path;
    std::string line;
    std::size_t line_no = 0;
    bool first_content_line = true;
    while (std::getline(in, line)) {
        ++line_no;
        std::string trimmed = line;
        for (char& ch : trimmed)
            if (ch == ',' || ch == ';' || ch == '\t') ch = ' ';
        std::istringstream ss(trimmed);
        std::string ax, av;
        if (!(ss >> ax)) continue; // blank line
        if (ax[0] == '#') continue;
        if (!(ss >> av)) {
            if (first_content_line) { // single-token header
                first_content_line = false;
                continue;
            }
            throw parse_error(path + ": line " + std::to_string(line_no) +
                                  ": expected 2 columns",
                              line_no);
        }
        std::size_t used = 0;
        double x, v;
        try {
            x = std::stod(ax, &used);
            if (used != ax.size()) throw std::invalid_argument(ax);
            v = std::stod(av, &used);
            if (used != av.size()) throw std::invalid_argument(av);
        } catch (const std::exception&) {
            if (first_content_line) { // optional header row
                first_content_line = false;
                continue;
            }
            throw parse_error(path + ": line " + std::to_string(line_no) +
                                  ": non-numeric cell",
                              line_no);
        }
        first_content_line = false;
        data.points.emplace_back(x, v);
    }
    if (data.points.size() < 4)
        throw too_few_samples_error(path + ": need at least 4 data rows, found " +
                                    std::to_string(data.points.size()));
    return data;
}

// Physical (amperes, volts) -> dimensionless (x, y): x = I/alpha, y = k V/v.
inline IVDataset scale_iv(const IVDataset& physical, double k, double alpha_scale = 1e-3,
                          double v_scale = 1.0) {
    if (!(alpha_scale > 0.0) || !(v_scale > 0.0) || !(k > 0.0))
        throw config_error("scale_iv: k, alpha_scale and v_scale must be positive");
    IVDataset out;
    out.source = physical.source;
    out.points.reserve(physical.points.size());
    for (const auto& [i_amp, v_volt] : physical.points)
        out.points.emplace_back(i_amp / alpha_scale, k * v_volt / v_scale);
    return out;
}

inline IVDataset unscale_iv(const IVDataset& dimensionless, double k, double alpha_scale = 1e-3,
                            double v_scale = 1.0) {
    if (!(alpha_scale > 0.0) || !(v_scale > 0.0) || !(k > 0.0))
        throw config_error("unscale_iv: k, alpha_scale and v_scale must be positive");
    IVDataset out;
    out.source = dimensionless.source;
    out.points.reserve(dimensionless.points.size());
    for (const auto& [x, y] : dimensionless.points)
        out.points.emplace_back(x * alpha_scale, y * v_scale / k);
    return out;
}

} // namespace ujm
