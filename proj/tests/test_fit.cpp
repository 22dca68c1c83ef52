#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "ujm/fit.hpp"

using namespace ujm;

namespace {

const GCoeffs ref_coeffs{419.888, 422.443, 0.0129707};

// log-spaced currents cover the corner near x ~ c as well as the asymptote
IVDataset generate(const GCoeffs& c, std::size_t n = 50, double x_lo = 0.01, double x_hi = 1.0) {
    IVDataset d;
    d.source = "synthetic";
    const double l_lo = std::log(x_lo), l_hi = std::log(x_hi);
    for (std::size_t i = 0; i < n; ++i) {
        const double x =
            std::exp(l_lo + (l_hi - l_lo) * static_cast<double>(i) / static_cast<double>(n - 1));
        d.points.emplace_back(x, eval_g(x, c));
    }
    return d;
}

GCoeffs perturbed(const GCoeffs& c, double rel) {
    return GCoeffs{c.a * (1.0 + rel), c.b * (1.0 - rel), c.c * (1.0 + rel)};
}

std::filesystem::path temp_csv(const std::string& name, const std::string& body) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << body;
    return path;
}

} // namespace

TEST_CASE("noiseless round trip recovers the generator coefficients") {
    const auto data = generate(ref_coeffs);
    const auto fit = fit_g(data, perturbed(ref_coeffs, 0.2));
    CHECK(fit.converged);
    CHECK(fit.coeffs.a == Catch::Approx(ref_coeffs.a).epsilon(1e-6));
    CHECK(fit.coeffs.b == Catch::Approx(ref_coeffs.b).epsilon(1e-6));
    CHECK(fit.coeffs.c == Catch::Approx(ref_coeffs.c).epsilon(1e-6));
    CHECK(fit.r_squared > 1.0 - 1e-10);
    CHECK(fit.r_squared <= 1.0);
    CHECK(fit.residual_norm < 1e-6);
    CHECK_FALSE(fit.rank_deficient);
    CHECK(fit.iterations <= 200);
    for (double v : fit.covariance_diag) CHECK(std::isfinite(v));
}

TEST_CASE("one percent multiplicative noise keeps the fit close") {
    auto data = generate(ref_coeffs);
    std::mt19937 rng(12345u);
    std::normal_distribution<double> noise(0.0, 0.01);
    for (auto& [x, v] : data.points) v *= 1.0 + noise(rng);

    const auto fit = fit_g(data, perturbed(ref_coeffs, 0.2));
    CHECK(fit.converged);
    CHECK(fit.r_squared > 0.99);
    CHECK(fit.coeffs.a == Catch::Approx(ref_coeffs.a).epsilon(0.05));
    CHECK(fit.coeffs.b == Catch::Approx(ref_coeffs.b).epsilon(0.05));
    CHECK(fit.coeffs.c == Catch::Approx(ref_coeffs.c).epsilon(0.05));
    // the asymptotic slope a+b is the robust combination at this noise level;
    // the a/b split is sloppy, and the covariance says so (sigma_a ~ 30% of a)
    CHECK(fit.coeffs.a + fit.coeffs.b ==
          Catch::Approx(ref_coeffs.a + ref_coeffs.b).epsilon(0.02));
    CHECK(std::sqrt(fit.covariance_diag[0]) > 0.05 * ref_coeffs.a);
    // reported goodness matches the standalone computation exactly
    CHECK(fit.r_squared == r_squared(data, fit.coeffs));
}

TEST_CASE("linear data leaves coefficients unidentifiable") {
    // v = 2x admits a whole solution manifold: b = 0 with any c, or
    // a + b = 2 with c -> 0; the fit must land on it and flag the degeneracy
    IVDataset d;
    for (int i = 0; i < 50; ++i) {
        const double x = 0.01 + 0.02 * i;
        d.points.emplace_back(x, 2.0 * x);
    }
    FitResult fit;
    try {
        fit = fit_g(d, GCoeffs{1.5, 1.0, 0.01});
    } catch (const rank_deficient_error&) {
        SUCCEED("rank deficiency reported as an error");
        return;
    }
    CHECK(fit.converged);
    CHECK(fit.residual_norm < 1e-6);
    // the fitted curve reproduces the line even though (a,b,c) are not unique
    for (const auto& [x, v] : d.points)
        CHECK(eval_g(x, fit.coeffs) == Catch::Approx(v).margin(1e-6));
    CHECK(fit.rank_deficient);
    const bool flags_bc =
        std::isinf(fit.covariance_diag[1]) || std::isinf(fit.covariance_diag[2]);
    CHECK(flags_bc);
}

TEST_CASE("row order does not change the optimum") {
    const auto data = generate(ref_coeffs);
    IVDataset shuffled = data;
    std::shuffle(shuffled.points.begin(), shuffled.points.end(), std::mt19937(99u));

    const auto f1 = fit_g(data, perturbed(ref_coeffs, 0.15));
    const auto f2 = fit_g(shuffled, perturbed(ref_coeffs, 0.15));
    CHECK(f1.coeffs.a == Catch::Approx(f2.coeffs.a).epsilon(1e-8));
    CHECK(f1.coeffs.b == Catch::Approx(f2.coeffs.b).epsilon(1e-8));
    CHECK(f1.coeffs.c == Catch::Approx(f2.coeffs.c).epsilon(1e-8));
}

TEST_CASE("analytic Jacobian matches finite differences") {
    const double xs[] = {0.02, 0.1, 0.37, 0.5, 1.0};
    for (double x : xs) {
        const auto row = detail::g_partials(x, ref_coeffs);
        auto num = [&](auto bump) {
            const double h = 1e-6;
            GCoeffs up = ref_coeffs, dn = ref_coeffs;
            bump(up, h);
            bump(dn, -h);
            return (eval_g(x, up) - eval_g(x, dn)) / (2.0 * h);
        };
        const double da = num([](GCoeffs& c, double h) { c.a += h * c.a; }) / ref_coeffs.a;
        const double db = num([](GCoeffs& c, double h) { c.b += h * c.b; }) / ref_coeffs.b;
        const double dlc = num([](GCoeffs& c, double h) { c.c *= std::exp(h); });
        CHECK(row[0] == Catch::Approx(da).epsilon(1e-5));
        CHECK(row[1] == Catch::Approx(db).epsilon(1e-5));
        CHECK(row[2] == Catch::Approx(dlc).epsilon(1e-5));
    }
}

TEST_CASE("randomized generator coefficients round-trip") {
    std::mt19937 rng(31415u);
    std::uniform_real_distribution<double> uab(1.0, 1000.0);
    std::uniform_real_distribution<double> ulogc(std::log(0.001), std::log(1.0));
    std::uniform_real_distribution<double> upert(-0.2, 0.2);
    for (int trial = 0; trial < 10; ++trial) {
        const GCoeffs truth{uab(rng), uab(rng), std::exp(ulogc(rng))};
        const auto data = generate(truth);
        const GCoeffs init{truth.a * (1.0 + upert(rng)), truth.b * (1.0 + upert(rng)),
                           truth.c * (1.0 + upert(rng))};
        const auto fit = fit_g(data, init);
        INFO("trial " << trial << ": a=" << truth.a << " b=" << truth.b << " c=" << truth.c);
        CHECK(fit.coeffs.a == Catch::Approx(truth.a).epsilon(1e-5));
        CHECK(fit.coeffs.b == Catch::Approx(truth.b).epsilon(1e-5));
        CHECK(fit.coeffs.c == Catch::Approx(truth.c).epsilon(1e-5));
    }
}

TEST_CASE("initial_guess lands near the generator for clean data") {
    const auto data = generate(ref_coeffs, 100);
    const auto guess = initial_guess(data);
    CHECK(guess.c == 0.01);
    // small-x slope overshoots a (corner influence), but stays the right scale
    CHECK(guess.a > 0.0);
    CHECK(guess.a + guess.b == Catch::Approx(ref_coeffs.a + ref_coeffs.b).epsilon(0.1));
    // and the guess is good enough for the fit to finish the job
    const auto fit = fit_g(data, guess);
    CHECK(fit.coeffs.a == Catch::Approx(ref_coeffs.a).epsilon(1e-5));
    CHECK(fit.coeffs.c == Catch::Approx(ref_coeffs.c).epsilon(1e-5));
}

TEST_CASE("r_squared basics") {
    const auto data = generate(ref_coeffs, 20);
    CHECK(r_squared(data, ref_coeffs) == 1.0);

    IVDataset constant;
    for (int i = 0; i < 5; ++i) constant.points.emplace_back(0.1 * (i + 1), 3.0);
    CHECK_THROWS_AS(r_squared(constant, ref_coeffs), zero_variance_error);
}

TEST_CASE("fit input validation") {
    IVDataset tiny;
    tiny.points = {{0.1, 1.0}, {0.2, 2.0}, {0.3, 3.0}};
    CHECK_THROWS_AS(fit_g(tiny, ref_coeffs), too_few_samples_error);

    auto data = generate(ref_coeffs, 10);
    CHECK_THROWS_AS(fit_g(data, GCoeffs{400.0, 400.0, -0.01}), config_error);

    auto bad = data;
    bad.points[3].second = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(fit_g(bad, ref_coeffs), non_finite_error);
}

TEST_CASE("load_iv_csv parses plain and headered files") {
    const auto plain = temp_csv("ujm_iv_plain.csv", "0.1,0.5\n0.2,0.9\n0.3,1.2\n0.4,1.4\n");
    const auto d1 = load_iv_csv(plain.string());
    REQUIRE(d1.points.size() == 4);
    CHECK(d1.points[0] == std::pair{0.1, 0.5});
    CHECK(d1.points[3] == std::pair{0.4, 1.4});
    CHECK(d1.source == plain.string());

    const auto headered = temp_csv("ujm_iv_header.csv",
                                   "current,voltage\n0.1,0.5\n0.2,0.9\n0.3,1.2\n0.4,1.4\n");
    CHECK(load_iv_csv(headered.string()).points.size() == 4);

    const auto spaced = temp_csv("ujm_iv_space.csv",
                                 "# comment\n0.1 0.5\n0.2\t0.9\n0.3 1.2\n0.4 1.4\n\n");
    CHECK(load_iv_csv(spaced.string()).points.size() == 4);

    std::filesystem::remove(plain);
    std::filesystem::remove(headered);
    std::filesystem::remove(spaced);
}

TEST_CASE("load_iv_csv reports the offending line") {
    const auto bad = temp_csv("ujm_iv_bad.csv",
                              "i,v\n0.1,0.5\n0.2,0.9\n0.3,1.2\n0.4,1.4\n0.5,1.6\nx7,oops\n");
    try {
        load_iv_csv(bad.string());
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(e.line() == 7);
        CHECK(std::string(e.what()).find("line 7") != std::string::npos);
    }
    std::filesystem::remove(bad);

    const auto missing = std::filesystem::temp_directory_path() / "ujm_iv_nonexistent.csv";
    CHECK_THROWS_AS(load_iv_csv(missing.string()), parse_error);

    const auto few = temp_csv("ujm_iv_few.csv", "0.1,0.5\n0.2,0.9\n0.3,1.2\n");
    CHECK_THROWS_AS(load_iv_csv(few.string()), too_few_samples_error);
    std::filesystem::remove(few);
}

TEST_CASE("physical units scale and unscale to machine precision") {
    IVDataset physical;
    physical.source = "bench";
    physical.points = {{1.2e-3, 0.31}, {2.5e-3, 0.72}, {-0.4e-3, -0.11}, {5.0e-3, 1.95}};
    const double k = 4.96600565899581;

    const auto dimless = scale_iv(physical, k);
    CHECK(dimless.points[0].first == Catch::Approx(1.2).epsilon(1e-12));
    CHECK(dimless.points[0].second == Catch::Approx(k * 0.31).epsilon(1e-12));

    const auto back = unscale_iv(dimless, k);
    for (std::size_t i = 0; i < physical.points.size(); ++i) {
        CHECK(back.points[i].first == Catch::Approx(physical.points[i].first).epsilon(1e-12));
        CHECK(back.points[i].second == Catch::Approx(physical.points[i].second).epsilon(1e-12));
    }
    CHECK_THROWS_AS(scale_iv(physical, -1.0), config_error);
}
