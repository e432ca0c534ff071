#include <cmath>

#include "doctest.h"
#include "steklov/heattrace.hpp"

using namespace steklov;

namespace {

Spectrum from_values(std::vector<double> v) {
    Spectrum sp;
    sp.solver = "synthetic";
    for (double x : v) {
        sp.lambdas.push_back(x);
        sp.mode_tags.push_back("synthetic");
        sp.multiplicity_hints.push_back(1);
    }
    sp.finalize();
    return sp;
}

}  // namespace

TEST_CASE("partial trace basics") {
    Spectrum zeros = from_values({0.0, 0.0, 0.0});
    auto s = partial_trace(zeros, {0.1, 1.0, 7.0}, 1e30);
    for (const auto& v : s) CHECK(v.partial_sum == doctest::Approx(3.0));

    const double t = 0.8;
    Spectrum one = from_values({std::log(2.0) / t});
    CHECK(partial_trace(one, {t}, 1e30)[0].partial_sum == doctest::Approx(0.5));

    Spectrum mix = from_values({0.0, std::log(2.0) / t});
    CHECK(partial_trace(mix, {t}, 1e30)[0].partial_sum == doctest::Approx(1.5));

    CHECK_THROWS_AS(partial_trace(one, {-1.0}), ConfigError);
}

TEST_CASE("partial trace is decreasing and convex in t") {
    Spectrum sp = disk_mode_spectrum(1.0, 1.0, 200);
    auto grid = log_grid(0.05, 1.0, 24);
    auto s = partial_trace(sp, grid, 1e30);
    for (std::size_t i = 2; i < s.size(); ++i) {
        CHECK(s[i].partial_sum < s[i - 1].partial_sum);
        // convexity on the (non-uniform) grid via divided differences
        double d1 = (s[i - 1].partial_sum - s[i - 2].partial_sum) /
                    (s[i - 1].t - s[i - 2].t);
        double d2 = (s[i].partial_sum - s[i - 1].partial_sum) / (s[i].t - s[i - 1].t);
        CHECK(d2 >= d1 - 1e-12);
    }
}

TEST_CASE("tail bound covers the truncation against a larger-K run") {
    Spectrum full = disk_mode_spectrum(1.0, 1.0, 1000);  // K = 4001 eigenvalues
    Spectrum small = from_values(std::vector<double>(full.lambdas.begin(),
                                                     full.lambdas.begin() + 400));
    const double t = 0.05;
    auto s_small = partial_trace(small, {t}, 1e30);
    auto s_full = partial_trace(full, {t}, 1e30);
    const double truncation = s_full[0].partial_sum - s_small[0].partial_sum;
    CHECK(truncation > 0.0);
    CHECK(s_small[0].tail_bound >= truncation);
    CHECK(s_small[0].tail_bound <= 100.0 * truncation);  // not wildly pessimistic

    // the default usability fraction flags such a sample
    auto flagged = partial_trace(small, {t});
    CHECK(!flagged[0].usable);
    auto fine = partial_trace(full, {t});
    CHECK(fine[0].usable);
}

TEST_CASE("two-term fit recovers synthetic data exactly") {
    auto grid = log_grid(0.02, 0.2, 12);
    std::vector<HeatTraceSample> samples;
    for (double t : grid) {
        HeatTraceSample s;
        s.t = t;
        s.partial_sum = 2.0 / t + 2.5;
        samples.push_back(s);
    }
    HeatTraceFit fit = fit_two_term(samples, 2);
    CHECK(std::abs(fit.a0_hat - 2.0) <= 1e-12);
    CHECK(std::abs(fit.a1_hat - 2.5) <= 1e-12);

    for (auto& s : samples) s.partial_sum += 0.3 * s.t * std::log(s.t);
    HeatTraceFit fit3 = fit_two_term(samples, 2, true);
    CHECK(std::abs(fit3.a0_hat - 2.0) <= 1e-10);
    CHECK(std::abs(fit3.a1_hat - 2.5) <= 1e-10);
    CHECK(std::abs(*fit3.tlogt_coeff - 0.3) <= 1e-10);
}

TEST_CASE("fit input validation") {
    std::vector<HeatTraceSample> few(2);
    few[0].t = 0.1;
    few[0].partial_sum = 1.0;
    few[1].t = 0.7;
    few[1].partial_sum = 2.0;
    CHECK_THROWS_AS(fit_two_term(few, 2), FitError);

    std::vector<HeatTraceSample> narrow;
    for (double t : {0.10, 0.12, 0.14, 0.16}) {
        HeatTraceSample s;
        s.t = t;
        s.partial_sum = 1 / t;
        narrow.push_back(s);
    }
    CHECK_THROWS_AS(fit_two_term(narrow, 2), FitError);
}

TEST_CASE("unit disk fit reproduces the leading coefficient") {
    Spectrum sp = disk_mode_spectrum(1.0, 1.0, 1500);
    auto samples = partial_trace(sp, log_grid(0.02, 0.2, 12));
    for (const auto& s : samples) CHECK(s.usable);
    HeatTraceFit fit = fit_two_term(samples, 2);
    CHECK(std::abs(fit.a0_hat - 2.0) / 2.0 <= 0.01);
}

TEST_CASE("constant term is invariant under the viscosity scaling law") {
    // trace(t; c mu) = trace(c t; mu): fitting over the mu-scaled grid makes
    // the fitted constants identical
    Spectrum s1 = disk_mode_spectrum(1.0, 1.0, 900);
    Spectrum s3 = disk_mode_spectrum(1.0, 3.0, 900);
    auto g1 = log_grid(0.02, 0.2, 12);
    auto g3 = g1;
    for (auto& t : g3) t /= 3.0;
    HeatTraceFit f1 = fit_two_term(partial_trace(s1, g1), 2);
    HeatTraceFit f3 = fit_two_term(partial_trace(s3, g3), 2);
    CHECK(std::abs(f1.a1_hat - f3.a1_hat) <= 1e-10);
    CHECK(std::abs(f3.a0_hat - f1.a0_hat / 3.0) <= 1e-10);
}

TEST_CASE("geometry inversion") {
    HeatTraceFit fit;
    fit.a0_hat = 2.0;
    fit.a1_hat = 2.5;
    auto [perim, curv] = invert_geometry(fit, 2, 1.0, MuConvention::paper);
    CHECK(perim == doctest::Approx(2 * std::numbers::pi));
    CHECK(curv == doctest::Approx(2 * std::numbers::pi));

    fit.a0_hat = 4.0;
    CHECK(invert_geometry(fit, 2, 1.0, MuConvention::paper).first ==
          doctest::Approx(4 * std::numbers::pi));

    fit.a0_hat = -1.0;
    CHECK_THROWS_AS(invert_geometry(fit, 2, 1.0, MuConvention::paper), InversionError);
}

TEST_CASE("inversion undoes the assembled coefficients") {
    auto ell = PlanarDomain::ellipse(2.0, 1.0);
    auto one = ViscositySpec::constant(1.0);
    HeatTraceFit fit;
    fit.a0_hat = assemble_coefficient(ell, one, CoefficientKind::a0, MuConvention::paper);
    fit.a1_hat = assemble_coefficient(ell, one, CoefficientKind::a1, MuConvention::paper);
    auto [perim, curv] = invert_geometry(fit, 2, 1.0, MuConvention::paper);
    CHECK(std::abs(perim - perimeter(ell)) <= 1e-10);
    CHECK(std::abs(curv - total_weighted_curvature(ell, one, 1)) <= 1e-10);
}
