#include <cmath>
#include <numbers>

#include "doctest.h"
#include "steklov/geometry.hpp"

using namespace steklov;

namespace {

constexpr double PI = std::numbers::pi;

// Non-convex simple star-shaped curve r(theta) = 1 + 0.3 cos(3 theta),
// expanded into Fourier coefficients of x and y.
PlanarDomain wobbly_domain() {
    PlanarDomain d;
    d.x.cos_coeffs = {0.0, 1.0, 0.15, 0.0, 0.15};
    d.x.sin_coeffs = {0.0, 0.0, 0.0, 0.0, 0.0};
    d.y.cos_coeffs = {0.0, 0.0, 0.0, 0.0, 0.0};
    d.y.sin_coeffs = {0.0, 1.0, -0.15, 0.0, 0.15};
    d.label = "wobbly";
    return d;
}

// Independent curvature oracle: finite difference of the tangent angle with
// respect to arclength.
double curvature_fd(const PlanarDomain& d, double s, double h = 1e-5) {
    auto angle = [&](double u) {
        Eigen::Vector2d t = d.tangent(u);
        return std::atan2(t.y(), t.x());
    };
    double dth = angle(s + h) - angle(s - h);
    while (dth > PI) dth -= 2 * PI;
    while (dth < -PI) dth += 2 * PI;
    double ds = d.speed(s) * 2 * h;  // arclength of the parameter interval
    return dth / ds;
}

// Independent adaptive Simpson quadrature oracle.
template <typename F>
double adaptive_simpson(F f, double a, double b, double tol, int depth = 0) {
    double m = 0.5 * (a + b);
    double fa = f(a), fb = f(b), fm = f(m);
    double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
    if (depth > 40 || std::abs(left + right - whole) < 15 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, tol / 2, depth + 1) +
           adaptive_simpson(f, m, b, tol / 2, depth + 1);
}

}  // namespace

TEST_CASE("curve jet on circles") {
    auto visc = ViscositySpec::constant(1.0);
    auto unit = PlanarDomain::circle(1.0);
    for (double s : {0.0, 0.7, 2.5, 5.9}) {
        BoundaryJet j = curve_jet(unit, visc, s);
        CHECK(j.kappa(0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(j.g_inv(0, 0) == doctest::Approx(1.0));
        CHECK(j.dg_lower_dxn(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
    }
    auto r3 = PlanarDomain::circle(3.0);
    CHECK(curve_jet(r3, visc, 1.0).kappa(0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("curve jet curvature matches the tangent-angle oracle") {
    auto visc = ViscositySpec::constant(1.0);
    auto ell = PlanarDomain::ellipse(2.0, 1.0);
    // analytic value at the point (2, 0): a/b^2
    CHECK(curve_jet(ell, visc, 0.0).kappa(0) == doctest::Approx(2.0).epsilon(1e-12));
    for (double s : {0.0, 0.4, 1.3, 3.0, 4.2}) {
        double oracle = curvature_fd(ell, s);
        CHECK(curve_jet(ell, visc, s).kappa(0) == doctest::Approx(oracle).epsilon(1e-7));
    }
    auto wob = wobbly_domain();
    for (double s : {0.3, 1.0, 2.1}) {
        double oracle = curvature_fd(wob, s);
        CHECK(curve_jet(wob, visc, s).kappa(0) == doctest::Approx(oracle).epsilon(1e-7));
    }
}

TEST_CASE("perimeter") {
    CHECK(perimeter(PlanarDomain::circle(1.0)) == doctest::Approx(2 * PI).epsilon(1e-13));
    CHECK(perimeter(PlanarDomain::circle(3.0)) == doctest::Approx(6 * PI).epsilon(1e-13));

    auto ell = PlanarDomain::ellipse(2.0, 1.0);
    double oracle = adaptive_simpson([&](double s) { return ell.speed(s); }, 0.0, 2 * PI, 1e-13);
    CHECK(std::abs(perimeter(ell) - oracle) <= 1e-10);
}

TEST_CASE("total weighted curvature") {
    auto unit = PlanarDomain::circle(1.0);
    auto one = ViscositySpec::constant(1.0);
    CHECK(total_weighted_curvature(unit, one, 1) == doctest::Approx(2 * PI).epsilon(1e-12));
    CHECK(total_weighted_curvature(PlanarDomain::ellipse(2.0, 1.0), one, 1) ==
          doctest::Approx(2 * PI).epsilon(1e-12));

    // mu(s) = 2 + cos(s) on the unit circle: integral of (2 + cos s) ds = 4 pi
    ViscositySpec varying;
    varying.trace.cos_coeffs = {2.0, 1.0};
    varying.trace.sin_coeffs = {0.0, 0.0};
    varying.normal_deriv = FourierSeries::constant(0.0);
    CHECK(total_weighted_curvature(unit, varying, 1) == doctest::Approx(4 * PI).epsilon(1e-12));
    double brute = adaptive_simpson(
        [&](double s) { return varying.value(s) * unit.curvature(s) * unit.speed(s); }, 0.0,
        2 * PI, 1e-13);
    CHECK(total_weighted_curvature(unit, varying, 1) == doctest::Approx(brute).epsilon(1e-11));
}

TEST_CASE("turning number: total curvature of simple ccw curves is 2 pi") {
    auto one = ViscositySpec::constant(1.0);
    for (auto d : {PlanarDomain::circle(1.0), PlanarDomain::circle(0.3),
                   PlanarDomain::ellipse(2.0, 1.0), wobbly_domain()}) {
        CHECK(std::abs(total_weighted_curvature(d, one, 0) - 2 * PI) <= 1e-8);
    }
}

TEST_CASE("rigid motion invariance of perimeter and curvature") {
    auto one = ViscositySpec::constant(1.0);
    auto base = wobbly_domain();
    auto moved = base.rotated(0.83).translated(1.7, -0.4);
    CHECK(perimeter(moved) == doctest::Approx(perimeter(base)).epsilon(1e-12));
    for (double s : {0.0, 1.1, 4.0}) {
        CHECK(curve_jet(moved, one, s).kappa(0) ==
              doctest::Approx(curve_jet(base, one, s).kappa(0)).epsilon(1e-12));
    }
}

TEST_CASE("scaling law: perimeter scales by r, curvature by 1/r") {
    auto one = ViscositySpec::constant(1.0);
    auto base = PlanarDomain::ellipse(2.0, 1.0);
    const double r = 2.5;
    auto scaled = base.scaled(r);
    CHECK(perimeter(scaled) == doctest::Approx(r * perimeter(base)).epsilon(1e-12));
    for (double s : {0.2, 2.2}) {
        CHECK(curve_jet(scaled, one, s).kappa(0) ==
              doctest::Approx(curve_jet(base, one, s).kappa(0) / r).epsilon(1e-12));
    }
}

TEST_CASE("boundary jet invariants") {
    auto one = ViscositySpec::constant(1.0);
    auto wob = wobbly_domain();
    for (int i = 0; i < 16; ++i) {
        double s = 2 * PI * i / 16;
        BoundaryJet j = curve_jet(wob, one, s);
        CHECK(0.5 * j.dg_lower_dxn(0, 0) == doctest::Approx(j.kappa(0)).epsilon(1e-12));
        CHECK(j.gamma_tan_n(0, 0) == doctest::Approx(j.kappa(0)));
        CHECK(j.gamma_n_tt(0, 0) == doctest::Approx(-j.kappa(0)));
    }
    CHECK_THROWS_AS(BoundaryJet::planar(1.0, -2.0), ConfigError);
    BoundaryJet flat3 = BoundaryJet::flat(3, 2.0);
    CHECK(flat3.dim == 3);
    CHECK(flat3.gamma_trace() == 0.0);
    Eigen::VectorXd ks(2);
    ks << 1.0, 0.5;
    BoundaryJet sphere_like = BoundaryJet::with_curvatures(ks, 1.0);
    CHECK(sphere_like.gamma_trace() == doctest::Approx(1.5));
}

TEST_CASE("validation rejects degenerate and malformed curves") {
    auto one = ViscositySpec::constant(1.0);

    // astroid: cusps where gamma' vanishes
    PlanarDomain astroid;
    astroid.x.cos_coeffs = {0.0, 0.75, 0.0, 0.25};
    astroid.x.sin_coeffs = {0.0, 0.0, 0.0, 0.0};
    astroid.y.cos_coeffs = {0.0, 0.0, 0.0, 0.0};
    astroid.y.sin_coeffs = {0.0, 0.75, 0.0, -0.25};
    astroid.label = "astroid";
    CHECK_THROWS_AS(astroid.validate(), DegenerateCurveError);
    CHECK_THROWS_AS(curve_jet(astroid, one, 0.0), DegenerateCurveError);

    // limacon with an inner loop: self-intersection
    PlanarDomain limacon;
    limacon.x.cos_coeffs = {0.75, 1.0, 0.75};
    limacon.x.sin_coeffs = {0.0, 0.0, 0.0};
    limacon.y.cos_coeffs = {0.0, 0.0, 0.0};
    limacon.y.sin_coeffs = {0.0, 1.0, 0.75};
    limacon.label = "limacon";
    CHECK_THROWS_AS(limacon.validate(), ConfigError);

    // clockwise circle: wrong orientation
    PlanarDomain cw;
    cw.x.cos_coeffs = {0.0, 1.0};
    cw.x.sin_coeffs = {0.0, 0.0};
    cw.y.cos_coeffs = {0.0, 0.0};
    cw.y.sin_coeffs = {0.0, -1.0};
    CHECK_THROWS_AS(cw.validate(), ConfigError);

    // viscosity dipping negative
    ViscositySpec bad;
    bad.trace.cos_coeffs = {1.0, 1.5};
    bad.trace.sin_coeffs = {0.0, 0.0};
    CHECK_THROWS_AS(bad.validate_positive(), ConfigError);
}

TEST_CASE("valid domains pass validation") {
    CHECK_NOTHROW(PlanarDomain::circle(1.0).validate());
    CHECK_NOTHROW(PlanarDomain::ellipse(2.0, 1.0).validate());
    CHECK_NOTHROW(wobbly_domain().validate());
    // the wobbly curve is genuinely non-convex
    bool has_negative = false;
    auto wob = wobbly_domain();
    for (int i = 0; i < 256; ++i)
        if (wob.curvature(2 * PI * i / 256) < 0.0) has_negative = true;
    CHECK(has_negative);
}
