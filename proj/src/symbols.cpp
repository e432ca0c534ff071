#include "steklov/symbols.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace steklov {

namespace {

constexpr Complex I_UNIT{0.0, 1.0};
constexpr double PI = std::numbers::pi;

// Numeric jet data consumed by the symbol chain, in adapted boundary normal
// coordinates. Supports a linear extension in x_n over the stored first
// derivatives; quantities whose x_n-derivative is not stored stay frozen.
struct JetFrame {
    int n;                   // ambient dimension
    Eigen::MatrixXd g_inv;   // tangential inverse metric (T x T), T = n-1
    Eigen::MatrixXd g_low;   // tangential metric
    Eigen::MatrixXd dgL;     // d g_{ab}/dx_n
    Eigen::MatrixXd dgU;     // d g^{ab}/dx_n, sign per IndexConvention
    double mu;
    double mu_n;             // d mu / dx_n (inward coordinate)
    double rho;
    IndexConvention conv;

    int T() const { return n - 1; }

    double gfull(int i, int j) const {
        if (i < T() && j < T()) return g_inv(i, j);
        if (i == T() && j == T()) return 1.0;
        return 0.0;
    }

    // Christoffel values in adapted coordinates, rebuilt from the metric jet
    // so that the x_n extension differentiates them consistently.
    double gamma(int up, int lo1, int lo2) const {
        const int NN = T();
        if (up < NN && ((lo1 < NN && lo2 == NN) || (lo1 == NN && lo2 < NN))) {
            int b = (lo1 == NN) ? lo2 : lo1;
            double v = 0.0;
            for (int c = 0; c < NN; ++c) v += g_inv(up, c) * dgL(c, b);
            return 0.5 * v;
        }
        if (up == NN && lo1 < NN && lo2 < NN) return -0.5 * dgL(lo1, lo2);
        return 0.0;  // tangential-only, Gamma^n_{nk}, Gamma^l_{nn}: zero here
    }

    double gamma_trace() const {  // Gamma^b_{nb}
        double v = 0.0;
        for (int a = 0; a < T(); ++a) v += gamma(a, a, T());
        return v;
    }

    double r12() const { return std::sqrt(mu + rho); }

    double norm_g(const Eigen::VectorXd& xi) const {
        return std::sqrt(xi.dot(g_inv * xi));
    }

    JetFrame extended(double eps) const {
        JetFrame f = *this;
        f.g_low = g_low + eps * dgL;
        f.g_inv = g_inv + eps * dgU;
        f.mu = mu + eps * mu_n;
        Eigen::MatrixXd upper = f.g_inv * dgL * f.g_inv;
        f.dgU = (conv == IndexConvention::strict) ? (-upper).eval() : upper;
        return f;
    }

    static JetFrame from(const BoundaryJet& jet, double rho, IndexConvention conv) {
        JetFrame f;
        f.n = jet.dim;
        f.g_inv = jet.g_inv;
        f.g_low = jet.g_inv.inverse();
        f.dgL = jet.dg_lower_dxn;
        Eigen::MatrixXd upper = f.g_inv * f.dgL * f.g_inv;
        f.dgU = (conv == IndexConvention::strict) ? (-upper).eval() : upper;
        f.mu = jet.mu;
        f.mu_n = jet.dmu_dxn();
        f.rho = rho;
        f.conv = conv;
        return f;
    }
};

JetFrame make_frame(const SymbolContext& ctx) {
    ctx.jet.check_invariants();
    if (ctx.rho < 0.0) throw ConfigError("symbol context: rho must be >= 0");
    if (ctx.xi.size() != ctx.jet.dim - 1)
        throw DimensionError("symbol context: xi size must be n-1");
    return JetFrame::from(ctx.jet, ctx.rho, ctx.index_convention);
}

// Tangential x'-derivatives of jet-built symbols vanish at the adapted
// point; the jet stores no tangential data that could make them nonzero.
// Callers rely on this instead of silently ignoring those terms.
CMatrix tangential_derivative_term(const JetFrame&, int rows, int cols) {
    return CMatrix::Zero(rows, cols);
}

// ---- factorization-side matrices, (n+1) x (n+1) ----

CMatrix build_b1(const JetFrame& f, const Eigen::VectorXd& xi) {
    const int n = f.n, T = f.T(), F = n;
    CMatrix m = CMatrix::Zero(n + 1, n + 1);
    for (int j = 0; j < n; ++j) {
        double v = 0.0;
        for (int a = 0; a < T; ++a)
            for (int b = 0; b < T; ++b) v += f.gamma(j, b, T) * f.g_inv(a, b) * xi(a);
        m(j, F) = 4.0 * I_UNIT / f.mu * f.r12() * v;
    }
    return m;
}

CMatrix build_b0(const JetFrame& f, const Eigen::VectorXd&) {
    const int n = f.n, T = f.T(), F = n;
    CMatrix m = CMatrix::Zero(n + 1, n + 1);
    const double gtr = f.gamma_trace();
    for (int i = 0; i <= n; ++i) m(i, i) = gtr;

    auto mi_up = [&](int j) { return j == T ? -f.mu_n / (f.mu * f.mu) : 0.0; };

    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            double v = 2.0 * f.gamma(j, k, T);
            if (k == T) v += f.mu * mi_up(j);
            if (j == k) v += f.rho / (f.mu * (f.mu + f.rho)) * f.mu_n;
            m(j, k) += v;
        }

    for (int j = 0; j < n; ++j) {
        double v = 0.0;
        // -2 mu d((mu^-1)^{;j})/dx_n, surviving stored part
        if (j == T) v += -2.0 * f.mu * (2.0 * f.mu_n * f.mu_n / (f.mu * f.mu * f.mu));
        for (int a = 0; a < T; ++a)
            for (int c = 0; c < T; ++c)
                for (int b = 0; b < n; ++b)
                    v -= f.g_inv(a, c) * f.gamma(j, b, c) * f.gamma(b, T, a);
        for (int a = 0; a < T; ++a)
            for (int b = 0; b < T; ++b)
                for (int g = 0; g < n; ++g)
                    v -= f.g_inv(a, b) * f.gamma(j, T, g) * f.gamma(g, a, b);
        for (int a = 0; a < T; ++a)
            for (int c = 0; c < T; ++c)
                for (int b = 0; b < T; ++b)
                    for (int s = 0; s < T; ++s)
                        v -= 2.0 * f.g_inv(a, c) * f.g_inv(b, s) * f.gamma(j, c, s) *
                             f.gamma(T, a, b);
        m(j, F) += f.r12() / f.mu * v;
    }

    m(F, T) += f.mu / f.r12();
    return m;
}

CMatrix build_c2(const JetFrame& f, const Eigen::VectorXd& xi) {
    const int n = f.n, T = f.T(), F = n;
    CMatrix m = CMatrix::Zero(n + 1, n + 1);
    const double g2 = xi.dot(f.g_inv * xi);
    for (int i = 0; i <= n; ++i) m(i, i) = -g2;
    for (int j = 0; j < n; ++j) {
        double v = 0.0;
        for (int a = 0; a < T; ++a)
            for (int b = 0; b < T; ++b)
                for (int c = 0; c < T; ++c)
                    for (int s = 0; s < T; ++s)
                        v += f.gamma(j, c, s) * f.g_inv(a, c) * f.g_inv(b, s) * xi(a) * xi(b);
        m(j, F) = -2.0 / f.mu * f.r12() * v;
    }
    return m;
}

CMatrix build_c1(const JetFrame& f, const Eigen::VectorXd& xi) {
    const int n = f.n, T = f.T(), F = n;
    CMatrix m = CMatrix::Zero(n + 1, n + 1);
    // scalar prefactor i (g^{ab} Gamma^c_{ac} + dg^{ab}/dx_a) xi_b vanishes at
    // the adapted point (tangential Christoffels and tangential metric
    // derivatives are zero).
    auto mi_up = [&](int j) { return j == T ? -f.mu_n / (f.mu * f.mu) : 0.0; };

    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            Complex v = 0.0;
            if (k != T) v += I_UNIT * f.mu * mi_up(j) * xi(k);
            Complex w = 0.0;
            for (int a = 0; a < T; ++a)
                for (int b = 0; b < T; ++b) w += 2.0 * f.gamma(j, k, a) * f.g_inv(a, b) * xi(b);
            m(j, k) = v + I_UNIT * w;
        }

    for (int j = 0; j < n; ++j) {
        Complex coef = 0.0;
        for (int b = 0; b < T; ++b) {
            double w = 0.0;
            // -2 mu g^{ab} Gamma^j_{sa} (mu^-1)^{;s}, s = normal only
            for (int a = 0; a < T; ++a)
                w += -2.0 * f.mu * f.g_inv(a, b) * f.gamma(j, T, a) * (-f.mu_n / (f.mu * f.mu));
            // -2 Gamma^j_{sh} g^{sr} g^{hm} Gamma^b_{rm}
            for (int s = 0; s < n; ++s)
                for (int h = 0; h < n; ++h)
                    for (int r = 0; r < n; ++r)
                        for (int mm = 0; mm < n; ++mm)
                            w += -2.0 * f.gamma(j, s, h) * f.gfull(s, r) * f.gfull(h, mm) *
                                 f.gamma(b, r, mm);
            // +(g^{mr} Gamma^j_{hr} Gamma^h_{am} + g^{mr} Gamma^j_{ah} Gamma^h_{mr}) g^{ab}
            for (int a = 0; a < T; ++a) {
                double u = 0.0;
                for (int mm = 0; mm < n; ++mm)
                    for (int r = 0; r < n; ++r)
                        for (int h = 0; h < n; ++h)
                            u += f.gfull(mm, r) * (f.gamma(j, h, r) * f.gamma(h, a, mm) +
                                                   f.gamma(j, a, h) * f.gamma(h, mm, r));
                w += u * f.g_inv(a, b);
            }
            coef += w * xi(b);
        }
        m(j, F) = f.r12() * I_UNIT / f.mu * coef;
    }

    for (int k = 0; k < T; ++k) m(F, k) = I_UNIT * f.mu / f.r12() * xi(k);
    return m;
}

CMatrix build_c0(const JetFrame& f, const Eigen::VectorXd&) {
    const int n = f.n, T = f.T(), F = n;
    CMatrix m = CMatrix::Zero(n + 1, n + 1);
    const double mu = f.mu, mu_n = f.mu_n, rho = f.rho;
    const double gtr = f.gamma_trace();
    const double lap_mu = gtr * mu_n;  // second normal derivative not stored
    const double mu32 = std::pow(mu + rho, -1.5);
    const double mu52 = std::pow(mu + rho, -2.5);
    // (mu+rho)^{1/2} Lap((mu+rho)^{-1/2}) + mu^{-1}(mu+rho)^{1/2} dmu_l ((mu+rho)^{-1/2})^{;l}
    const double d1 = f.r12() * (-0.5 * mu32 * lap_mu + 0.75 * mu52 * mu_n * mu_n) +
                      f.r12() / mu * mu_n * (-0.5 * mu32 * mu_n);
    for (int i = 0; i < n; ++i) m(i, i) = d1;
    const double lap_mu_inv = -lap_mu / (mu * mu) + 2.0 * mu_n * mu_n / (mu * mu * mu);
    m(F, F) = -mu * lap_mu_inv;

    auto mi_up = [&](int j) { return j == T ? -mu_n / (mu * mu) : 0.0; };
    auto gamma_ltrace = [&](int k) {  // Gamma^l_{kl}
        double v = 0.0;
        for (int l = 0; l < n; ++l) v += f.gamma(l, k, l);
        return v;
    };

    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            double v = mu * mi_up(j) * gamma_ltrace(k);
            if (k == T) v += mu * f.r12() * mi_up(j) * (-0.5 * mu32 * mu_n);
            for (int mm = 0; mm < n; ++mm)
                for (int l = 0; l < n; ++l)
                    for (int h = 0; h < n; ++h)
                        v += f.gfull(mm, l) * (f.gamma(j, h, l) * f.gamma(h, k, mm) -
                                               f.gamma(j, k, h) * f.gamma(h, mm, l));
            v += rho / (mu * (mu + rho)) * f.gamma(j, k, T) * mu_n;  // g^{ml} dmu_l picks m=l=n
            m(j, k) += v;
        }

    // x_n-derivative of Lap(mu^-1) restricted to stored jet data (mu_nn and
    // second metric derivatives are not stored).
    const double d_lap_mu_inv_dxn =
        2.0 * gtr * mu_n * mu_n / (mu * mu * mu) -
        mu_n / (2.0 * mu * mu) * (f.dgU * f.dgL).trace() -
        6.0 * mu_n * mu_n * mu_n / (mu * mu * mu * mu);
    for (int j = 0; j < n; ++j) {
        double v = 0.0;
        if (j == T) v += -2.0 * d_lap_mu_inv_dxn;
        if (j == T) v += -2.0 / mu * mu_n * (2.0 * mu_n * mu_n / (mu * mu * mu));
        for (int mm = 0; mm < n; ++mm)
            for (int l = 0; l < n; ++l)
                for (int h = 0; h < n; ++h)
                    v -= f.gfull(mm, l) * (f.gamma(j, h, l) * f.gamma(h, T, mm) -
                                           f.gamma(j, T, h) * f.gamma(h, mm, l)) *
                         (-mu_n / (mu * mu));
        m(j, F) += f.r12() * v;
    }

    for (int k = 0; k < n; ++k) {
        double v = mu / f.r12() * gamma_ltrace(k);
        if (k == T) v += mu * (-0.5 * mu32 * mu_n);
        m(F, k) += v;
    }
    return m;
}

CMatrix build_q1(const JetFrame& f, const Eigen::VectorXd& xi) {
    const int n = f.n, T = f.T(), F = n;
    const double nrm = f.norm_g(xi);
    CMatrix m = CMatrix::Zero(n + 1, n + 1);
    for (int i = 0; i <= n; ++i) m(i, i) = nrm;
    if (nrm == 0.0) throw SingularSymbolError("q1: xi' = 0");
    for (int j = 0; j < n; ++j) {
        Complex v = 0.0;
        for (int a = 0; a < T; ++a)
            for (int b = 0; b < T; ++b) v += 2.0 * I_UNIT * f.gamma(j, b, T) * f.g_inv(b, a) * xi(a);
        double w = 0.0;
        for (int a = 0; a < T; ++a)
            for (int b = 0; b < T; ++b)
                for (int c = 0; c < T; ++c)
                    for (int s = 0; s < T; ++s)
                        w += f.gamma(j, c, s) * f.g_inv(a, c) * f.g_inv(b, s) * xi(a) * xi(b);
        m(j, F) += f.r12() / f.mu * (v + w / nrm);
    }
    return m;
}

// Correction columns of the factorization, prefactor-free.
CMatrix build_a1(const JetFrame& f, const Eigen::VectorXd& xi) {
    const int n = f.n, T = f.T(), F = n;
    const double nrm = f.norm_g(xi);
    if (nrm == 0.0) throw SingularSymbolError("A1: xi' = 0");
    CMatrix m = CMatrix::Zero(n + 1, n + 1);
    for (int j = 0; j < n; ++j) {
        Complex v = 0.0;
        for (int a = 0; a < T; ++a)
            for (int b = 0; b < T; ++b) v += -2.0 * I_UNIT * f.gamma(j, b, T) * f.g_inv(b, a) * xi(a);
        double w = 0.0;
        for (int a = 0; a < T; ++a)
            for (int b = 0; b < T; ++b)
                for (int c = 0; c < T; ++c)
                    for (int s = 0; s < T; ++s)
                        w += f.gamma(j, c, s) * f.g_inv(a, c) * f.g_inv(b, s) * xi(a) * xi(b);
        m(j, F) = v + w / nrm;
    }
    return m;
}

CMatrix build_a2(const JetFrame& f, const Eigen::VectorXd& xi) {
    const int n = f.n, T = f.T(), F = n;
    const double nrm = f.norm_g(xi);
    if (nrm == 0.0) throw SingularSymbolError("A2: xi' = 0");
    CMatrix m = CMatrix::Zero(n + 1, n + 1);
    for (int j = 0; j < n; ++j) {
        Complex v = 0.0;
        for (int a = 0; a < T; ++a)
            for (int b = 0; b < T; ++b) v += 2.0 * I_UNIT * f.gamma(j, b, T) * f.g_inv(b, a) * xi(a);
        double w = 0.0;
        for (int a = 0; a < T; ++a)
            for (int b = 0; b < T; ++b)
                for (int c = 0; c < T; ++c)
                    for (int s = 0; s < T; ++s)
                        w += f.gamma(j, c, s) * f.g_inv(a, c) * f.g_inv(b, s) * xi(a) * xi(b);
        m(j, F) = v + w / nrm;
    }
    return m;
}

// Richardson central difference in the x_n extension of the frame.
template <typename Fn>
CMatrix dxn_richardson(Fn&& fn, double h) {
    auto central = [&](double hh) { return ((fn(hh) - fn(-hh)) / (2.0 * hh)).eval(); };
    CMatrix d1 = central(h);
    CMatrix d2 = central(0.5 * h);
    return (4.0 * d2 - d1) / 3.0;
}

CMatrix build_dq1_dxn(const JetFrame& f, const Eigen::VectorXd& xi) {
    const double scale = 1.0 + f.dgL.cwiseAbs().maxCoeff() + std::abs(f.mu_n);
    const double h = 1e-4 / scale;
    return dxn_richardson([&](double eps) { return build_q1(f.extended(eps), xi); }, h);
}

CMatrix build_E1(const JetFrame& f, const Eigen::VectorXd& xi) {
    // E1 = i sum dq1/dxi . dq1/dx' + b0 q1 - i sum db1/dxi . dq1/dx' + dq1/dx_n - c1;
    // the tangential-derivative products vanish at the adapted point.
    CMatrix tang = tangential_derivative_term(f, f.n + 1, f.n + 1);
    return (build_b0(f, xi) * build_q1(f, xi) + build_dq1_dxn(f, xi) - build_c1(f, xi) + tang)
        .eval();
}

CMatrix apply_xmap(const CMatrix& E, const JetFrame& f, const Eigen::VectorXd& xi) {
    const double nrm = f.norm_g(xi);
    if (nrm == 0.0) throw SingularSymbolError("X-map: xi' = 0");
    const double g2 = nrm * nrm;
    const CMatrix A1 = build_a1(f, xi);
    const CMatrix A2 = build_a2(f, xi);
    const double r = f.r12();
    return (E / (2.0 * nrm) - r / (4.0 * f.mu * g2) * (A1 * E + E * A2) +
            (f.mu + f.rho) / (4.0 * f.mu * f.mu * g2 * nrm) * (A1 * E * A2))
        .eval();
}

CMatrix build_q0(const JetFrame& f, const Eigen::VectorXd& xi) {
    return apply_xmap(build_E1(f, xi), f, xi);
}

CMatrix build_E0(const JetFrame& f, const Eigen::VectorXd& xi) {
    const CMatrix q0 = build_q0(f, xi);
    const double scale = 1.0 + f.dgL.cwiseAbs().maxCoeff() + std::abs(f.mu_n);
    const CMatrix dq0 =
        dxn_richardson([&](double eps) { return build_q0(f.extended(eps), xi); }, 1e-4 / scale);
    CMatrix tang = tangential_derivative_term(f, f.n + 1, f.n + 1);
    return (-q0 * q0 + build_b0(f, xi) * q0 + dq0 - build_c0(f, xi) + tang).eval();
}

CVector build_phi1(const JetFrame& f, const Eigen::VectorXd& xi) {
    const int n = f.n, T = f.T(), F = n;
    const double nrm = f.norm_g(xi);
    if (nrm == 0.0) throw SingularSymbolError("phi1: xi' = 0");
    const CMatrix q1 = build_q1(f, xi);
    const CMatrix q0 = build_q0(f, xi);
    const Complex q0_corner = q0(F, F);

    CVector phi(n);
    for (int j = 0; j < T; ++j) {
        Complex v = 0.0;
        v += -f.mu / f.r12() * q1(j, F);
        double gxj = 0.0, dgxj = 0.0;
        for (int a = 0; a < T; ++a) {
            gxj += f.g_inv(j, a) * xi(a);
            dgxj += f.dgU(j, a) * xi(a);
        }
        v += -2.0 * I_UNIT * gxj * q0_corner;
        v += I_UNIT * dgxj;
        // mu-gradient and tangential-derivative contributions carry no stored
        // jet data at the adapted point.
        phi(j) = v;
    }

    const double psi1_nn = 2.0 * f.mu * nrm;
    const Complex dq1_corner_dxn = build_dq1_dxn(f, xi)(F, F);
    Complex v = psi1_nn * (-f.mu_n / (f.mu * f.mu) + q0_corner / f.mu);
    v += -2.0 * f.mu / f.r12() * q1(T, F);
    for (int l = 0; l < n; ++l) v += 3.0 * q0(F, l) * q1(l, F);
    v += -3.0 * dq1_corner_dxn;
    v += 6.0 * q1(F, F) * q0_corner;
    v += -f.gamma_trace() * q1(F, F);
    phi(T) = v;
    return phi;
}

CMatrix assemble_psi0(const CVector& phi, const JetFrame& f, const Eigen::VectorXd& xi) {
    const int n = f.n, T = f.T();
    const double g2 = xi.dot(f.g_inv * xi);
    if (g2 == 0.0) throw SingularSymbolError("psi column solve: xi' = 0");
    CMatrix m = CMatrix::Zero(n, n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < T; ++k) m(j, k) = I_UNIT * f.mu * xi(k) * phi(j) / g2;
    return m;  // final column stays zero
}

Complex resolvent_denominator(const JetFrame& f, const Eigen::VectorXd& xi, Complex tau,
                              MuConvention conv) {
    const double nrm = f.norm_g(xi);
    const double lead = (conv == MuConvention::carried ? 2.0 * f.mu : 2.0) * nrm;
    Complex d = lead - tau;
    if (std::abs(d) < 1e-12 * (lead + std::abs(tau)))
        throw ResolventPoleError("resolvent evaluated at its pole tau = " + std::to_string(lead));
    return d;
}

double factorial(int k) {
    double v = 1.0;
    for (int i = 2; i <= k; ++i) v *= i;
    return v;
}

// Gauss-Legendre nodes/weights on [-1,1], fixed 16-point rule.
const std::array<double, 8> kGlNodes = {0.0950125098376374, 0.2816035507792589,
                                        0.4580167776572274, 0.6178762444026438,
                                        0.7554044083550030, 0.8656312023878318,
                                        0.9445750230732326, 0.9894009349916499};
const std::array<double, 8> kGlWeights = {0.1894506104550685, 0.1826034150449236,
                                          0.1691565193950025, 0.1495959888165767,
                                          0.1246289712555339, 0.0951585116824928,
                                          0.0622535239386479, 0.0271524594117541};

template <typename Fn>
double integrate_panels(Fn&& fn, double a, double b, int panels) {
    double total = 0.0;
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * h, half = 0.5 * h;
        for (std::size_t i = 0; i < kGlNodes.size(); ++i) {
            total += kGlWeights[i] * half *
                     (fn(mid + half * kGlNodes[i]) + fn(mid - half * kGlNodes[i]));
        }
    }
    return total;
}

}  // namespace

void SymbolContext::require_nonzero_xi() const {
    if (xi.size() == 0 || xi.norm() == 0.0)
        throw SingularSymbolError("symbol evaluation requires xi' != 0");
}

Complex SymbolContext::require_tau() const {
    if (!tau) throw ConfigError("resolvent symbol requires the spectral parameter tau");
    return *tau;
}

BCSymbols eval_bc(const SymbolContext& ctx) {
    JetFrame f = make_frame(ctx);
    BCSymbols out;
    out.b1 = {build_b1(f, ctx.xi), 1, "b1"};
    out.b0 = {build_b0(f, ctx.xi), 0, "b0"};
    out.c2 = {build_c2(f, ctx.xi), 2, "c2"};
    out.c1 = {build_c1(f, ctx.xi), 1, "c1"};
    out.c0 = {build_c0(f, ctx.xi), 0, "c0"};
    return out;
}

SymbolMatrix eval_q1(const SymbolContext& ctx) {
    ctx.require_nonzero_xi();
    return {build_q1(make_frame(ctx), ctx.xi), 1, "q1"};
}

std::pair<SymbolMatrix, SymbolMatrix> eval_A1A2(const SymbolContext& ctx) {
    ctx.require_nonzero_xi();
    JetFrame f = make_frame(ctx);
    return {{build_a1(f, ctx.xi), 1, "A1"}, {build_a2(f, ctx.xi), 1, "A2"}};
}

SymbolMatrix eval_E1(const SymbolContext& ctx) {
    ctx.require_nonzero_xi();
    return {build_E1(make_frame(ctx), ctx.xi), 1, "E1"};
}

SymbolMatrix eval_q0(const SymbolContext& ctx) {
    ctx.require_nonzero_xi();
    return {build_q0(make_frame(ctx), ctx.xi), 0, "q0"};
}

std::pair<SymbolMatrix, SymbolMatrix> eval_E0_qm1(const SymbolContext& ctx) {
    ctx.require_nonzero_xi();
    JetFrame f = make_frame(ctx);
    // Evaluate at the unit covector and scale by the exact degree; the
    // numeric normal derivative inside E0 would otherwise leak rounding
    // noise into the homogeneity relation.
    const double nrm = ctx.xi.norm();
    const Eigen::VectorXd xhat = ctx.xi / nrm;
    CMatrix E0 = build_E0(f, xhat);
    CMatrix qm1 = apply_xmap(E0, f, xhat) / nrm;
    return {{E0, 0, "E0"}, {qm1, -1, "q-1"}};
}

CVector eval_phi1(const SymbolContext& ctx) {
    ctx.require_nonzero_xi();
    return build_phi1(make_frame(ctx), ctx.xi);
}

SymbolMatrix eval_psi1(const SymbolContext& ctx) {
    ctx.require_nonzero_xi();
    JetFrame f = make_frame(ctx);
    CMatrix m = CMatrix::Identity(f.n, f.n) * (2.0 * f.mu * f.norm_g(ctx.xi));
    return {m, 1, "psi1"};
}

SymbolMatrix eval_psi0(const SymbolContext& ctx) {
    ctx.require_nonzero_xi();
    JetFrame f = make_frame(ctx);
    return {assemble_psi0(build_phi1(f, ctx.xi), f, ctx.xi), 0, "psi0"};
}

SymbolMatrix solve_psi_column(const CVector& phi_column, const SymbolContext& ctx) {
    ctx.require_nonzero_xi();
    JetFrame f = make_frame(ctx);
    if (phi_column.size() != f.n)
        throw DimensionError("solve_psi_column: phi column must have n entries");
    return {assemble_psi0(phi_column, f, ctx.xi), 0, "psi-col"};
}

SymbolMatrix eval_varpi(int level, const SymbolContext& ctx) {
    ctx.require_nonzero_xi();
    JetFrame f = make_frame(ctx);
    Complex tau = ctx.require_tau();
    Complex d = resolvent_denominator(f, ctx.xi, tau, MuConvention::carried);
    if (level == 1) {
        return {CMatrix::Identity(f.n, f.n) / d, -1, "varpi-1"};
    }
    if (level == 2) {
        // second term of the induction carries a tangential derivative of
        // varpi_{-1}; it vanishes at the adapted point.
        CMatrix psi0 = assemble_psi0(build_phi1(f, ctx.xi), f, ctx.xi);
        CMatrix tang = tangential_derivative_term(f, f.n, f.n);
        return {(-psi0 / (d * d) + tang).eval(), -2, "varpi-2"};
    }
    throw UnsupportedOrderError("varpi level must be 1 or 2");
}

Complex trace_varpi(int level, const SymbolContext& ctx, MuConvention mu_conv) {
    ctx.require_nonzero_xi();
    JetFrame f = make_frame(ctx);
    Complex tau = ctx.require_tau();
    Complex d = resolvent_denominator(f, ctx.xi, tau, mu_conv);
    if (level == 1) return static_cast<double>(f.n) / d;
    if (level == 2) {
        Complex tr = assemble_psi0(build_phi1(f, ctx.xi), f, ctx.xi).trace();
        return -tr / (d * d);
    }
    throw UnsupportedOrderError("varpi level must be 1 or 2");
}

double residue_heat_factor(int pole_order, double t, double c) {
    if (pole_order < 1) throw ConfigError("residue_heat_factor: pole order must be >= 1");
    if (t <= 0.0 || c <= 0.0) throw ConfigError("residue_heat_factor: t and c must be positive");
    return std::pow(-t, pole_order - 1) * std::exp(-t * c) / factorial(pole_order - 1);
}

double sphere_volume(int dim) {
    // vol(S^dim), dim >= 0
    return 2.0 * std::pow(PI, 0.5 * (dim + 1)) / std::tgamma(0.5 * (dim + 1));
}

double radial_integral(int n, double c, bool weighted) {
    if (c <= 0.0) throw ConfigError("radial_integral: c must be positive");
    if (n < 2) throw ConfigError("radial_integral: n must be >= 2");
    double v = std::tgamma(n - 1.0) * sphere_volume(n - 2) / std::pow(c, n - 1);
    return weighted ? v / (n - 1) : v;
}

double a0_density(int n, double mu, MuConvention conv) {
    double v = n * std::tgamma(n - 1.0) * sphere_volume(n - 2) / std::pow(4.0 * PI, n - 1);
    if (conv == MuConvention::carried) v *= std::pow(mu, 1 - n);
    return v;
}

double a1_density(const BoundaryJet& jet, int n, MuConvention conv) {
    double w = (conv == MuConvention::paper) ? jet.mu : std::pow(jet.mu, 2 - n);
    double c = (2.0 * n + 1.0) * std::tgamma(n - 1.0) * sphere_volume(n - 2) /
               (2.0 * (n - 1.0) * std::pow(4.0 * PI, n - 1));
    return c * w * jet.kappa.sum();
}

double assemble_coefficient(const PlanarDomain& domain, const ViscositySpec& visc,
                            CoefficientKind which, MuConvention conv, PipelineRoute route,
                            IndexConvention index_conv) {
    domain.validate();
    visc.validate(domain);
    // The numeric pipeline is expensive per boundary point; a coarser
    // trapezoid grid keeps spectral accuracy for smooth densities.
    const int N = (route == PipelineRoute::numeric) ? std::min(domain.quad_points, 64)
                                                    : domain.quad_points;
    const double h = 2.0 * PI / N;
    double total = 0.0;
    for (int i = 0; i < N; ++i) {
        const double s = h * i;
        BoundaryJet jet = curve_jet(domain, visc, s);
        double dens;
        if (route == PipelineRoute::closed_form) {
            dens = (which == CoefficientKind::a0) ? a0_density(2, jet.mu, conv)
                                                  : a1_density(jet, 2, conv);
        } else {
            // resolvent trace -> residue -> xi-quadrature, n = 2
            SymbolContext ctx;
            ctx.jet = jet;
            ctx.rho = 0.0;
            ctx.index_convention = index_conv;
            ctx.tau = Complex(0.0, 0.0);
            const double t = 0.5;
            const double rate = (conv == MuConvention::carried) ? 2.0 * jet.mu : 2.0;
            const double xi_max = 60.0 / (rate * t);
            auto integrand = [&](double x) {
                ctx.xi = Eigen::VectorXd::Constant(1, x);
                const double c = rate * x;
                if (which == CoefficientKind::a0) {
                    return 2.0 * residue_heat_factor(1, t, c);
                }
                Complex tr2 = trace_varpi(2, ctx, conv);
                double numerator = (tr2 * Complex(c * c, 0.0)).real();
                return numerator * residue_heat_factor(2, t, c);
            };
            double integral = 2.0 * integrate_panels(integrand, 1e-9, xi_max, 48);
            dens = integral / (2.0 * PI);
            if (which == CoefficientKind::a0) dens *= t;  // coefficient of t^{-1}
        }
        total += dens * domain.speed(s);
    }
    return total * h;
}

AsymptoticSymbol AsymptoticSymbol::identity(int size) {
    AsymptoticSymbol s;
    s.rows = s.cols = size;
    s.terms.push_back({0,
                       [size](const Eigen::VectorXd&, const Eigen::VectorXd&) {
                           return CMatrix(CMatrix::Identity(size, size));
                       },
                       nullptr});
    return s;
}

void AsymptoticSymbol::check() const {
    for (std::size_t i = 1; i < terms.size(); ++i)
        if (terms[i].degree >= terms[i - 1].degree)
            throw ConfigError("asymptotic symbol: degrees must be strictly decreasing");
}

namespace {

CMatrix dxi_term(const AsymptoticSymbol::Term& t, const Eigen::VectorXd& x,
                 const Eigen::VectorXd& xi, int k) {
    if (t.dxi) return t.dxi(x, xi, k);
    const double h0 = 1e-5 * std::max(xi.norm(), 1.0);
    auto central = [&](double h) {
        Eigen::VectorXd xp = xi, xm = xi;
        xp(k) += h;
        xm(k) -= h;
        return ((t.eval(x, xp) - t.eval(x, xm)) / (2.0 * h)).eval();
    };
    CMatrix d1 = central(h0), d2 = central(0.5 * h0);
    return (4.0 * d2 - d1) / 3.0;
}

CMatrix dxi2_term(const AsymptoticSymbol::Term& t, const Eigen::VectorXd& x,
                  const Eigen::VectorXd& xi, int k, int l) {
    const double h = 2e-4 * std::max(xi.norm(), 1.0);
    if (k == l) {
        Eigen::VectorXd xp = xi, xm = xi;
        xp(k) += h;
        xm(k) -= h;
        return ((t.eval(x, xp) + t.eval(x, xm) - 2.0 * t.eval(x, xi)) / (h * h)).eval();
    }
    Eigen::VectorXd xpp = xi, xpm = xi, xmp = xi, xmm = xi;
    xpp(k) += h;
    xpp(l) += h;
    xpm(k) += h;
    xpm(l) -= h;
    xmp(k) -= h;
    xmp(l) += h;
    xmm(k) -= h;
    xmm(l) -= h;
    return ((t.eval(x, xpp) - t.eval(x, xpm) - t.eval(x, xmp) + t.eval(x, xmm)) / (4.0 * h * h))
        .eval();
}

CMatrix dx_term(const AsymptoticSymbol::Term& t, const Eigen::VectorXd& x,
                const Eigen::VectorXd& xi, int k) {
    const double h0 = 1e-5 * std::max(x.norm(), 1.0);
    auto central = [&](double h) {
        Eigen::VectorXd xp = x, xm = x;
        xp(k) += h;
        xm(k) -= h;
        return ((t.eval(xp, xi) - t.eval(xm, xi)) / (2.0 * h)).eval();
    };
    CMatrix d1 = central(h0), d2 = central(0.5 * h0);
    return (4.0 * d2 - d1) / 3.0;
}

CMatrix dx2_term(const AsymptoticSymbol::Term& t, const Eigen::VectorXd& x,
                 const Eigen::VectorXd& xi, int k, int l) {
    const double h = 2e-4 * std::max(x.norm(), 1.0);
    if (k == l) {
        Eigen::VectorXd xp = x, xm = x;
        xp(k) += h;
        xm(k) -= h;
        return ((t.eval(xp, xi) + t.eval(xm, xi) - 2.0 * t.eval(x, xi)) / (h * h)).eval();
    }
    Eigen::VectorXd xpp = x, xpm = x, xmp = x, xmm = x;
    xpp(k) += h;
    xpp(l) += h;
    xpm(k) += h;
    xpm(l) -= h;
    xmp(k) -= h;
    xmp(l) += h;
    xmm(k) -= h;
    xmm(l) -= h;
    return ((t.eval(xpp, xi) - t.eval(xpm, xi) - t.eval(xmp, xi) + t.eval(xmm, xi)) /
            (4.0 * h * h))
        .eval();
}

}  // namespace

AsymptoticSymbol compose(const AsymptoticSymbol& a, const AsymptoticSymbol& b, int order) {
    a.check();
    b.check();
    if (a.cols != b.rows) throw DimensionError("compose: inner matrix dimensions disagree");
    if (a.terms.empty() || b.terms.empty()) throw ConfigError("compose: empty symbol");

    const int top = a.terms.front().degree + b.terms.front().degree;
    if (order > top) throw ConfigError("compose: truncation order above the top degree");

    AsymptoticSymbol out;
    out.rows = a.rows;
    out.cols = b.cols;
    for (int d = top; d >= order; --d) {
        struct Contribution {
            AsymptoticSymbol::Term ta, tb;
            int depth;
        };
        std::vector<Contribution> contrib;
        for (const auto& ta : a.terms)
            for (const auto& tb : b.terms) {
                int depth = ta.degree + tb.degree - d;
                if (depth < 0) continue;
                if (depth > 2)
                    throw UnsupportedOrderError(
                        "compose: derivative depth > 2 required; deeper orders are unsupported");
                contrib.push_back({ta, tb, depth});
            }
        if (contrib.empty()) continue;
        int rows = out.rows, cols = out.cols;
        auto eval = [contrib, rows, cols](const Eigen::VectorXd& x, const Eigen::VectorXd& xi) {
            CMatrix total = CMatrix::Zero(rows, cols);
            const int dims = static_cast<int>(xi.size());
            for (const auto& c : contrib) {
                if (c.depth == 0) {
                    total += c.ta.eval(x, xi) * c.tb.eval(x, xi);
                } else if (c.depth == 1) {
                    for (int k = 0; k < dims; ++k)
                        total += -I_UNIT * dxi_term(c.ta, x, xi, k) * dx_term(c.tb, x, xi, k);
                } else {
                    for (int k = 0; k < dims; ++k)
                        for (int l = k; l < dims; ++l) {
                            double fact = (k == l) ? 2.0 : 1.0;
                            total += (-1.0 / fact) * dxi2_term(c.ta, x, xi, k, l) *
                                     dx2_term(c.tb, x, xi, k, l);
                        }
                }
            }
            return total;
        };
        out.terms.push_back({d, eval, nullptr});
    }
    return out;
}

}  // namespace steklov
