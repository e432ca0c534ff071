#include <cmath>
#include <numbers>

#include "doctest.h"
#include "steklov/symbols.hpp"

using namespace steklov;

namespace {

SymbolContext circle_ctx(double xi1 = 1.0, double mu = 1.0, double rho = 0.0,
                         double kappa = 1.0, double dmu_dnu = 0.0) {
    SymbolContext ctx;
    ctx.jet = BoundaryJet::planar(kappa, mu, dmu_dnu);
    ctx.rho = rho;
    ctx.xi = Eigen::VectorXd::Constant(1, xi1);
    return ctx;
}

SymbolContext flat_ctx(double xi1 = 1.0, double mu = 1.0, double rho = 0.0) {
    SymbolContext ctx;
    ctx.jet = BoundaryJet::flat(2, mu);
    ctx.rho = rho;
    ctx.xi = Eigen::VectorXd::Constant(1, xi1);
    return ctx;
}

double rel_diff(const CMatrix& a, const CMatrix& b) {
    double na = a.norm();
    if (na == 0.0) return b.norm();
    return (a - b).norm() / na;
}

}  // namespace

TEST_CASE("b and c symbols on the flat half plane") {
    for (double mu : {1.0, 4.0}) {
        auto ctx = flat_ctx(1.0, mu, 0.0);
        BCSymbols bc = eval_bc(ctx);
        CHECK(bc.b1.value.norm() == doctest::Approx(0.0));
        // single nonzero entry mu (mu+rho)^{-1/2} = sqrt(mu) at (n+1, n)
        CMatrix b0exp = CMatrix::Zero(3, 3);
        b0exp(2, 1) = std::sqrt(mu);
        CHECK(rel_diff(bc.b0.value, b0exp) <= 1e-14);
        CMatrix c2exp = -CMatrix::Identity(3, 3);
        CHECK(rel_diff(bc.c2.value, c2exp) <= 1e-14);
        CHECK(bc.c0.value.norm() == doctest::Approx(0.0));
    }
}

TEST_CASE("b and c symbols on the unit circle jet") {
    auto ctx = circle_ctx();
    BCSymbols bc = eval_bc(ctx);

    // hand evaluation of the b-matrix column: 4i Gamma^1_{1n} xi = 4i kappa
    CHECK(bc.b1.value(0, 2).imag() == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(bc.b1.value(0, 2).real() == doctest::Approx(0.0));
    CHECK(bc.b1.value(1, 2) == Complex(0.0, 0.0));

    // hand evaluation with kappa = 1, mu = 1, rho = 0:
    CMatrix b0exp(3, 3);
    b0exp << 3.0, 0.0, 0.0, 0.0, 1.0, -1.0, 0.0, 1.0, 1.0;
    CHECK(rel_diff(bc.b0.value, b0exp) <= 1e-14);

    CMatrix c1exp = CMatrix::Zero(3, 3);
    c1exp(0, 1) = Complex(0, 2);
    c1exp(1, 0) = Complex(0, -2);
    c1exp(2, 0) = Complex(0, 1);
    c1exp(0, 2) = Complex(0, -5);
    CHECK(rel_diff(bc.c1.value, c1exp) <= 1e-14);

    CMatrix c2exp(3, 3);
    c2exp << -1, 0, 0, 0, -1, 2, 0, 0, -1;
    CHECK(rel_diff(bc.c2.value, c2exp) <= 1e-14);

    CMatrix c0exp = CMatrix::Zero(3, 3);
    c0exp(0, 0) = 1.0;
    c0exp(1, 1) = -1.0;
    c0exp(2, 1) = 1.0;
    CHECK(rel_diff(bc.c0.value, c0exp) <= 1e-14);
}

TEST_CASE("c2 homogeneity of degree 2") {
    auto ctx = circle_ctx(1.0);
    auto ctx3 = circle_ctx(3.0);
    CMatrix a = eval_bc(ctx).c2.value;
    CMatrix b = eval_bc(ctx3).c2.value;
    CHECK(rel_diff(b, 9.0 * a) <= 1e-14);
}

TEST_CASE("q1 principal symbol") {
    auto flat = flat_ctx();
    CHECK(rel_diff(eval_q1(flat).value, CMatrix::Identity(3, 3)) <= 1e-14);

    auto ctx = circle_ctx();
    CMatrix q1 = eval_q1(ctx).value;
    CMatrix expect(3, 3);
    expect << 1.0, 0.0, Complex(0, 2), 0.0, 1.0, -1.0, 0.0, 0.0, 1.0;
    CHECK(rel_diff(q1, expect) <= 1e-14);

    // triangular: all eigenvalues equal sqrt(g^{ab} xi_a xi_b)
    Eigen::ComplexEigenSolver<CMatrix> es(q1);
    for (int i = 0; i < 3; ++i)
        CHECK(std::abs(es.eigenvalues()(i) - Complex(1.0, 0.0)) <= 1e-12);

    CHECK_THROWS_AS(eval_q1(circle_ctx(0.0)), SingularSymbolError);
}

TEST_CASE("A1 and A2 columns") {
    auto ctx = circle_ctx();
    auto [A1, A2] = eval_A1A2(ctx);
    CHECK(A1.value(0, 2) == Complex(0, -2));
    CHECK(A1.value(1, 2) == Complex(-1, 0));
    CHECK(A2.value(0, 2) == Complex(0, 2));
    CHECK(A2.value(1, 2) == Complex(-1, 0));
    CHECK(A1.value.col(0).norm() == 0.0);
    CHECK(A1.value.row(2).norm() == 0.0);
}

TEST_CASE("E1 bottom row matches its reduced form") {
    for (double rho : {0.0, 3.0}) {
        auto ctx = circle_ctx(1.0, 1.0, rho);
        CMatrix E1 = eval_E1(ctx).value;
        const double r12 = std::sqrt(1.0 + rho);
        CHECK(std::abs(E1(2, 0) - Complex(0.0, -1.0 / r12)) <= 1e-12);
        CHECK(std::abs(E1(2, 1) - Complex(1.0 / r12, 0.0)) <= 1e-12);
        // Gamma^n column / norm + Gamma trace * norm + d|xi|_g/dx_n (strict)
        CHECK(std::abs(E1(2, 2) - Complex(-1.0, 0.0)) <= 1e-10);
    }
}

TEST_CASE("q0 corner equals the displayed formula at the audit convention") {
    auto ctx = circle_ctx();
    CMatrix q0 = eval_q0(ctx).value;
    // -(1/4) sum_a dg^{aa}/dx_n + (5/8) dg^{11}/dx_n xi^2/|xi|^2 with the
    // strict upper-index derivative -2 kappa
    const double dg_up = -2.0;
    const double display = -0.25 * dg_up + (5.0 / 8.0) * dg_up;
    CHECK(display == doctest::Approx(-0.75));
    CHECK(q0(2, 2).real() == doctest::Approx(display).epsilon(1e-10));
    CHECK(std::abs(q0(2, 2).imag()) <= 1e-12);

    // mirrored convention flips the xi-weighted part of the chain
    auto ctx_m = circle_ctx();
    ctx_m.index_convention = IndexConvention::mirrored;
    CMatrix q0m = eval_q0(ctx_m).value;
    CHECK(q0m(2, 2).real() != doctest::Approx(display).epsilon(1e-3));

    // every entry finite for rho in {0, 1, 10}
    for (double rho : {0.0, 1.0, 10.0}) {
        CMatrix v = eval_q0(circle_ctx(1.0, 1.0, rho)).value;
        CHECK(v.allFinite());
        // the corner itself is rho-free
        CHECK(v(2, 2).real() == doctest::Approx(-0.75).epsilon(1e-10));
    }
}

TEST_CASE("q0 corner vanishes on the flat half plane") {
    CMatrix q0 = eval_q0(flat_ctx(1.0, 2.0)).value;
    CHECK(std::abs(q0(2, 2)) <= 1e-13);
    // the final column vanishes as well; the remaining bottom-row entries
    // carry the flat w-f coupling of the transformed system
    CHECK(q0.col(2).norm() <= 1e-13);
    CHECK(std::abs(q0(0, 0)) <= 1e-13);
}

TEST_CASE("E0 and q_{-1}") {
    // flat: everything vanishes
    auto [E0f, qm1f] = eval_E0_qm1(flat_ctx(1.0, 3.0));
    CHECK(E0f.value.norm() <= 1e-12);
    CHECK(qm1f.value.norm() <= 1e-12);

    // homogeneity: q_{-1}(s xi) = s^{-1} q_{-1}(xi)
    auto [E0a, qa] = eval_E0_qm1(circle_ctx(1.0));
    auto [E0b, qb] = eval_E0_qm1(circle_ctx(2.0));
    CHECK(rel_diff(qb.value, 0.5 * qa.value) <= 1e-9);
    CHECK(rel_diff(E0b.value, E0a.value) <= 1e-9);  // degree zero
    CHECK(qa.value.allFinite());

    // independent substitution: the X-map applied to E0 with separately
    // evaluated ingredients
    auto ctx = circle_ctx(1.3, 1.0, 0.5);
    auto [E0, qm1] = eval_E0_qm1(ctx);
    auto [A1, A2] = eval_A1A2(ctx);
    const double nrm = 1.3, g2 = nrm * nrm, mu = 1.0, rho = 0.5;
    const double r12 = std::sqrt(mu + rho);
    CMatrix xm = E0.value / (2.0 * nrm) -
                 r12 / (4.0 * mu * g2) * (A1.value * E0.value + E0.value * A2.value) +
                 (mu + rho) / (4.0 * mu * mu * g2 * nrm) * (A1.value * E0.value * A2.value);
    CHECK(rel_diff(qm1.value, xm) <= 1e-12);
}

TEST_CASE("psi1") {
    auto ctx = circle_ctx(2.0, 3.0);
    CMatrix p = eval_psi1(ctx).value;
    CHECK(rel_diff(p, 12.0 * CMatrix::Identity(2, 2)) <= 1e-14);
    // positive definite for every nonzero xi
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.real());
    CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("phi and psi0") {
    // flat with constant mu: psi0 = 0 because every phi term vanishes
    CHECK(eval_psi0(flat_ctx(1.0, 2.0)).value.norm() <= 1e-13);
    CHECK(eval_phi1(flat_ctx(1.0, 2.0)).norm() <= 1e-13);

    auto ctx = circle_ctx();
    // strict chain: phi^1 = -4 i kappa xi - 2 i xi q0_corner = -2.5 i
    CVector phi = eval_phi1(ctx);
    CHECK(std::abs(phi(0) - Complex(0.0, -2.5)) <= 1e-10);

    SymbolMatrix psi0 = eval_psi0(ctx);
    // final column is identically zero
    CHECK(psi0.value.col(1).norm() == 0.0);
    // trace of psi0 = mu sum kappa + (3/2) mu kappa = 2.5 on the unit circle
    CHECK(psi0.value.trace().real() == doctest::Approx(2.5).epsilon(1e-10));
    CHECK(std::abs(psi0.value.trace().imag()) <= 1e-12);

    // column solve consistency and the unit-column case
    SymbolMatrix assembled = solve_psi_column(phi, ctx);
    CHECK(rel_diff(assembled.value, psi0.value) == 0.0);

    CVector zero = CVector::Zero(2);
    CHECK(solve_psi_column(zero, ctx).value.norm() == 0.0);
    CVector e1 = CVector::Zero(2);
    e1(0) = 1.0;
    CMatrix unit = solve_psi_column(e1, ctx).value;
    CHECK(unit(0, 0) == Complex(0.0, 1.0));
    CHECK(unit(0, 1) == Complex(0.0, 0.0));
}

TEST_CASE("psi0 with normal viscosity gradient stays consistent") {
    auto ctx = circle_ctx(1.0, 2.0, 0.0, 1.0, 0.3);
    SymbolMatrix psi0 = eval_psi0(ctx);
    CHECK(psi0.value.allFinite());
    CHECK(psi0.value.col(1).norm() == 0.0);
    CHECK(rel_diff(solve_psi_column(eval_phi1(ctx), ctx).value, psi0.value) == 0.0);
}
