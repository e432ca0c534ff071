#include "steklov/geometry.hpp"

#include <cmath>
#include <numbers>

namespace steklov {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
}

FourierSeries FourierSeries::from_pairs(const std::vector<std::array<double, 2>>& pairs) {
    FourierSeries f;
    f.cos_coeffs.reserve(pairs.size());
    f.sin_coeffs.reserve(pairs.size());
    for (const auto& p : pairs) {
        f.cos_coeffs.push_back(p[0]);
        f.sin_coeffs.push_back(p[1]);
    }
    return f;
}

double FourierSeries::eval(double s) const {
    double v = 0.0;
    for (int m = 0; m < modes(); ++m)
        v += cos_coeffs[m] * std::cos(m * s) + (m > 0 ? sin_coeffs[m] * std::sin(m * s) : 0.0);
    return v;
}

double FourierSeries::deriv(double s) const {
    double v = 0.0;
    for (int m = 1; m < modes(); ++m)
        v += m * (-cos_coeffs[m] * std::sin(m * s) + sin_coeffs[m] * std::cos(m * s));
    return v;
}

double FourierSeries::deriv2(double s) const {
    double v = 0.0;
    for (int m = 1; m < modes(); ++m)
        v += -double(m) * m * (cos_coeffs[m] * std::cos(m * s) + sin_coeffs[m] * std::sin(m * s));
    return v;
}

double FourierSeries::deriv3(double s) const {
    double v = 0.0;
    for (int m = 1; m < modes(); ++m)
        v += double(m) * m * m *
             (cos_coeffs[m] * std::sin(m * s) - sin_coeffs[m] * std::cos(m * s));
    return v;
}

Eigen::Vector2d PlanarDomain::point(double s) const { return {x.eval(s), y.eval(s)}; }
Eigen::Vector2d PlanarDomain::tangent(double s) const { return {x.deriv(s), y.deriv(s)}; }
Eigen::Vector2d PlanarDomain::second_deriv(double s) const { return {x.deriv2(s), y.deriv2(s)}; }
double PlanarDomain::speed(double s) const { return tangent(s).norm(); }

Eigen::Vector2d PlanarDomain::unit_tangent(double s) const {
    Eigen::Vector2d t = tangent(s);
    double n = t.norm();
    if (n == 0.0) throw DegenerateCurveError("zero tangent at s=" + std::to_string(s));
    return t / n;
}

Eigen::Vector2d PlanarDomain::outward_normal(double s) const {
    // For a counterclockwise curve the outward normal is the tangent rotated by -pi/2.
    Eigen::Vector2d t = unit_tangent(s);
    return {t.y(), -t.x()};
}

double PlanarDomain::curvature(double s) const {
    Eigen::Vector2d d1 = tangent(s);
    Eigen::Vector2d d2 = second_deriv(s);
    double sp = d1.norm();
    if (sp < 1e-14) throw DegenerateCurveError("curvature undefined: |gamma'|=0 at s=" + std::to_string(s));
    return (d1.x() * d2.y() - d1.y() * d2.x()) / (sp * sp * sp);
}

Eigen::Vector2d PlanarDomain::centroid() const {
    Eigen::Vector2d c = Eigen::Vector2d::Zero();
    for (int i = 0; i < quad_points; ++i) c += point(two_pi * i / quad_points);
    return c / quad_points;
}

double PlanarDomain::signed_area() const {
    // 1/2 * integral of (x y' - y x')
    double a = 0.0;
    double h = two_pi / quad_points;
    for (int i = 0; i < quad_points; ++i) {
        double s = h * i;
        a += x.eval(s) * y.deriv(s) - y.eval(s) * x.deriv(s);
    }
    return 0.5 * a * h;
}

void PlanarDomain::validate(double regularity_tol, double intersection_tol) const {
    if (x.empty() || y.empty()) throw ConfigError("domain '" + label + "': empty Fourier coefficients");
    const int n = quad_points;
    const double h = two_pi / n;
    std::vector<Eigen::Vector2d> pts(n);
    double scale = 0.0;
    for (int i = 0; i < n; ++i) {
        double s = h * i;
        if (speed(s) < regularity_tol)
            throw DegenerateCurveError("domain '" + label + "': |gamma'| < tol at s=" + std::to_string(s));
        pts[i] = point(s);
        scale = std::max(scale, pts[i].norm());
    }
    if (signed_area() <= 0.0)
        throw ConfigError("domain '" + label + "': orientation must be counterclockwise (signed area > 0)");

    // Approximate simplicity check: segment/segment intersections on the sample polyline.
    auto seg_intersect = [](const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                            const Eigen::Vector2d& c, const Eigen::Vector2d& d) {
        auto cross = [](const Eigen::Vector2d& u, const Eigen::Vector2d& v) {
            return u.x() * v.y() - u.y() * v.x();
        };
        double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
        double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
        return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
    };
    (void)intersection_tol;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;  // adjacent through wrap
            if (seg_intersect(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]))
                throw ConfigError("domain '" + label + "': self-intersection detected near segment " +
                                  std::to_string(i) + "/" + std::to_string(j));
        }
    }
}

PlanarDomain PlanarDomain::translated(double dx, double dy) const {
    PlanarDomain d = *this;
    if (d.x.cos_coeffs.empty()) d.x.cos_coeffs.push_back(0.0), d.x.sin_coeffs.push_back(0.0);
    if (d.y.cos_coeffs.empty()) d.y.cos_coeffs.push_back(0.0), d.y.sin_coeffs.push_back(0.0);
    d.x.cos_coeffs[0] += dx;
    d.y.cos_coeffs[0] += dy;
    return d;
}

PlanarDomain PlanarDomain::rotated(double angle) const {
    PlanarDomain d = *this;
    double c = std::cos(angle), s = std::sin(angle);
    int m = std::max(x.modes(), y.modes());
    d.x.cos_coeffs.assign(m, 0.0);
    d.x.sin_coeffs.assign(m, 0.0);
    d.y.cos_coeffs.assign(m, 0.0);
    d.y.sin_coeffs.assign(m, 0.0);
    for (int k = 0; k < m; ++k) {
        double xc = k < x.modes() ? x.cos_coeffs[k] : 0.0, xs = k < x.modes() ? x.sin_coeffs[k] : 0.0;
        double yc = k < y.modes() ? y.cos_coeffs[k] : 0.0, ys = k < y.modes() ? y.sin_coeffs[k] : 0.0;
        d.x.cos_coeffs[k] = c * xc - s * yc;
        d.x.sin_coeffs[k] = c * xs - s * ys;
        d.y.cos_coeffs[k] = s * xc + c * yc;
        d.y.sin_coeffs[k] = s * xs + c * ys;
    }
    return d;
}

PlanarDomain PlanarDomain::scaled(double factor) const {
    PlanarDomain d = *this;
    for (auto& v : d.x.cos_coeffs) v *= factor;
    for (auto& v : d.x.sin_coeffs) v *= factor;
    for (auto& v : d.y.cos_coeffs) v *= factor;
    for (auto& v : d.y.sin_coeffs) v *= factor;
    return d;
}

PlanarDomain PlanarDomain::circle(double radius, const std::string& label) {
    PlanarDomain d;
    d.x.cos_coeffs = {0.0, radius};
    d.x.sin_coeffs = {0.0, 0.0};
    d.y.cos_coeffs = {0.0, 0.0};
    d.y.sin_coeffs = {0.0, radius};
    d.label = label;
    return d;
}

PlanarDomain PlanarDomain::ellipse(double a, double b, const std::string& label) {
    PlanarDomain d;
    d.x.cos_coeffs = {0.0, a};
    d.x.sin_coeffs = {0.0, 0.0};
    d.y.cos_coeffs = {0.0, 0.0};
    d.y.sin_coeffs = {0.0, b};
    d.label = label;
    return d;
}

ViscositySpec ViscositySpec::constant(double mu) {
    ViscositySpec v;
    v.trace = FourierSeries::constant(mu);
    v.normal_deriv = FourierSeries::constant(0.0);
    return v;
}

bool ViscositySpec::is_constant() const {
    auto flat = [](const FourierSeries& f) {
        for (int m = 1; m < f.modes(); ++m)
            if (f.cos_coeffs[m] != 0.0 || f.sin_coeffs[m] != 0.0) return false;
        return true;
    };
    return flat(trace) && (normal_deriv.empty() || (flat(normal_deriv) && normal_deriv.cos_coeffs[0] == 0.0));
}

void ViscositySpec::validate_positive(int samples) const {
    if (trace.empty()) throw ConfigError("viscosity: empty trace");
    for (int i = 0; i < samples; ++i) {
        double s = two_pi * i / samples;
        if (trace.eval(s) <= 0.0)
            throw ConfigError("viscosity: mu(s) <= 0 at s=" + std::to_string(s));
    }
}

void ViscositySpec::validate(const PlanarDomain& domain) const {
    validate_positive(domain.quad_points);
}

double BoundaryJet::gamma_tan_n(int a, int b) const { return a == b ? kappa(a) : 0.0; }
double BoundaryJet::gamma_n_tt(int a, int b) const { return a == b ? -kappa(a) : 0.0; }
double BoundaryJet::gamma_trace() const { return kappa.sum(); }

BoundaryJet BoundaryJet::planar(double kappa, double mu, double dmu_dnu) {
    return with_curvatures(Eigen::VectorXd::Constant(1, kappa), mu, dmu_dnu);
}

BoundaryJet BoundaryJet::flat(int dim, double mu) {
    return with_curvatures(Eigen::VectorXd::Zero(dim - 1), mu, 0.0);
}

BoundaryJet BoundaryJet::with_curvatures(const Eigen::VectorXd& kappas, double mu,
                                         double dmu_dnu) {
    BoundaryJet j;
    j.dim = static_cast<int>(kappas.size()) + 1;
    j.kappa = kappas;
    j.g_inv = Eigen::MatrixXd::Identity(j.dim - 1, j.dim - 1);
    j.dg_lower_dxn = 2.0 * kappas.asDiagonal().toDenseMatrix();
    j.mu = mu;
    j.dmu_dnu = dmu_dnu;
    j.check_invariants();
    return j;
}

void BoundaryJet::check_invariants() const {
    if (dim < 2) throw ConfigError("boundary jet: dimension must be >= 2");
    if (kappa.size() != dim - 1 || g_inv.rows() != dim - 1 || g_inv.cols() != dim - 1)
        throw ConfigError("boundary jet: inconsistent sizes");
    if (mu <= 0.0) throw ConfigError("boundary jet: mu <= 0");
    // adapted-coordinate relation: (1/2) dg_{aa}/dx_n = kappa_a
    for (int a = 0; a < dim - 1; ++a)
        for (int b = 0; b < dim - 1; ++b) {
            double expect = (a == b) ? 2.0 * kappa(a) : 0.0;
            if (std::abs(dg_lower_dxn(a, b) - expect) > 1e-12 * (1.0 + kappa.cwiseAbs().maxCoeff()))
                throw ConfigError("boundary jet: dg_lower/dx_n inconsistent with curvatures");
        }
}

BoundaryJet curve_jet(const PlanarDomain& domain, const ViscositySpec& visc, double s,
                      double regularity_tol) {
    if (domain.speed(s) < regularity_tol)
        throw DegenerateCurveError("curve_jet: |gamma'| below tolerance at s=" + std::to_string(s));
    double mu = visc.value(s);
    if (mu <= 0.0) throw ConfigError("curve_jet: mu(s) <= 0 at s=" + std::to_string(s));
    return BoundaryJet::planar(domain.curvature(s), mu, visc.normal_derivative(s));
}

double perimeter(const PlanarDomain& domain) {
    double sum = 0.0;
    const double h = two_pi / domain.quad_points;
    for (int i = 0; i < domain.quad_points; ++i) sum += domain.speed(h * i);
    return sum * h;
}

double total_weighted_curvature(const PlanarDomain& domain, const ViscositySpec& visc,
                                int weight_exponent) {
    double sum = 0.0;
    const double h = two_pi / domain.quad_points;
    for (int i = 0; i < domain.quad_points; ++i) {
        double s = h * i;
        sum += std::pow(visc.value(s), weight_exponent) * domain.curvature(s) * domain.speed(s);
    }
    return sum * h;
}

}  // namespace steklov
