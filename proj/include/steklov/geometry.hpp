#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "steklov/errors.hpp"

namespace steklov {

// Truncated real Fourier series f(s) = sum_m (a_m cos(m s) + b_m sin(m s)).
// Entry m of the coefficient list is the pair (a_m, b_m); b_0 is ignored.
struct FourierSeries {
    std::vector<double> cos_coeffs;
    std::vector<double> sin_coeffs;

    static FourierSeries constant(double value) { return {{value}, {0.0}}; }
    static FourierSeries from_pairs(const std::vector<std::array<double, 2>>& pairs);

    int modes() const { return static_cast<int>(cos_coeffs.size()); }
    bool empty() const { return cos_coeffs.empty(); }

    double eval(double s) const;
    double deriv(double s) const;    // f'
    double deriv2(double s) const;   // f''
    double deriv3(double s) const;   // f'''
};

// Smooth closed planar curve given by Fourier series for each coordinate.
// The parametrization is 2*pi periodic by construction; counterclockwise
// orientation (positive signed area) is required.
struct PlanarDomain {
    FourierSeries x;
    FourierSeries y;
    std::string label;
    int quad_points = 512;  // boundary trapezoid grid

    Eigen::Vector2d point(double s) const;
    Eigen::Vector2d tangent(double s) const;       // gamma'
    Eigen::Vector2d second_deriv(double s) const;  // gamma''
    double speed(double s) const;                  // |gamma'|
    Eigen::Vector2d unit_tangent(double s) const;
    Eigen::Vector2d outward_normal(double s) const;
    double curvature(double s) const;  // signed, >0 for ccw convex
    Eigen::Vector2d centroid() const;  // mean of boundary samples

    double signed_area() const;

    // Throws ConfigError / DegenerateCurveError when an invariant fails:
    // regularity, counterclockwise orientation, approximate simplicity.
    void validate(double regularity_tol = 1e-8, double intersection_tol = 1e-6) const;

    PlanarDomain translated(double dx, double dy) const;
    PlanarDomain rotated(double angle) const;
    PlanarDomain scaled(double factor) const;

    static PlanarDomain circle(double radius, const std::string& label = "circle");
    static PlanarDomain ellipse(double a, double b, const std::string& label = "ellipse");
};

// Viscosity on the boundary: either a constant or a Fourier trace plus the
// outward normal derivative trace.
struct ViscositySpec {
    FourierSeries trace;
    FourierSeries normal_deriv;  // d(mu)/d(nu), nu = outward unit normal

    static ViscositySpec constant(double mu);

    bool is_constant() const;
    double value(double s) const { return trace.eval(s); }
    double normal_derivative(double s) const { return normal_deriv.empty() ? 0.0 : normal_deriv.eval(s); }

    // mu(s) > 0 at every sample of the domain grid.
    void validate(const PlanarDomain& domain) const;
    void validate_positive(int samples = 512) const;
};

// Pointwise data of the boundary normal coordinate system at one boundary
// point: the tangential inverse metric, its first normal derivative, the
// principal curvatures, the viscosity 1-jet, and the Christoffel values the
// symbol formulas consume. Everything is expressed in adapted coordinates
// (boundary metric = identity, tangential metric derivatives zero, half the
// lower-index normal derivative equal to the curvature).
struct BoundaryJet {
    int dim = 2;                          // ambient dimension n
    Eigen::VectorXd kappa;                // principal curvatures, size n-1
    Eigen::MatrixXd g_inv;                // g^{ab}(x',0), (n-1)x(n-1)
    Eigen::MatrixXd dg_lower_dxn;         // d g_{ab} / d x_n at x_n = 0
    double mu = 1.0;
    double dmu_dnu = 0.0;                 // outward normal derivative of mu

    // d mu / d x_n with x_n the inward geodesic coordinate.
    double dmu_dxn() const { return -dmu_dnu; }

    // Christoffel values in adapted coordinates.
    double gamma_tan_n(int a, int b) const;     // Gamma^a_{b n} = kappa_a delta_ab
    double gamma_n_tt(int a, int b) const;      // Gamma^n_{a b} = -kappa_a delta_ab
    double gamma_trace() const;                 // Gamma^b_{n b} = sum kappa

    static BoundaryJet planar(double kappa, double mu, double dmu_dnu = 0.0);
    static BoundaryJet flat(int dim, double mu);
    static BoundaryJet with_curvatures(const Eigen::VectorXd& kappas, double mu,
                                       double dmu_dnu = 0.0);

    void check_invariants() const;  // throws on violation
};

// Adapted-coordinate jet at gamma(s). Curvature comes from spectral
// differentiation of the Fourier curve.
BoundaryJet curve_jet(const PlanarDomain& domain, const ViscositySpec& visc, double s,
                      double regularity_tol = 1e-8);

// Boundary length by the periodic trapezoid rule on the domain grid.
double perimeter(const PlanarDomain& domain);

// Integral of mu(s)^w kappa(s) over the boundary (arclength measure).
double total_weighted_curvature(const PlanarDomain& domain, const ViscositySpec& visc,
                                int weight_exponent);

}  // namespace steklov
