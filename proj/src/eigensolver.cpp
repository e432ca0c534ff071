#include "steklov/eigensolver.hpp"

#include "steklov/parallel.hpp"

#include <lapacke.h>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <limits>
#include <numeric>

namespace steklov {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
using Complex = std::complex<double>;

const std::array<double, 8> kGlNodes = {0.0950125098376374, 0.2816035507792589,
                                        0.4580167776572274, 0.6178762444026438,
                                        0.7554044083550030, 0.8656312023878318,
                                        0.9445750230732326, 0.9894009349916499};
const std::array<double, 8> kGlWeights = {0.1894506104550685, 0.1826034150449236,
                                          0.1691565193950025, 0.1495959888165767,
                                          0.1246289712555339, 0.0951585116824928,
                                          0.0622535239386479, 0.0271524594117541};

// 16-point Gauss-Legendre nodes/weights mapped to [a, b].
void gl_rule(double a, double b, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.clear();
    weights.clear();
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t i = 0; i < kGlNodes.size(); ++i) {
        nodes.push_back(mid - half * kGlNodes[i]);
        weights.push_back(half * kGlWeights[i]);
        nodes.push_back(mid + half * kGlNodes[i]);
        weights.push_back(half * kGlWeights[i]);
    }
}

// thin divide-and-conquer SVD: A = U diag(s) V^T
void lapack_svd(const Eigen::MatrixXd& A, Eigen::MatrixXd& U, Eigen::VectorXd& sv,
                Eigen::MatrixXd& V) {
    const lapack_int m = static_cast<lapack_int>(A.rows());
    const lapack_int n = static_cast<lapack_int>(A.cols());
    const lapack_int k = std::min(m, n);
    Eigen::MatrixXd work = A;
    U.resize(m, k);
    sv.resize(k);
    Eigen::MatrixXd Vt(k, n);
    lapack_int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'S', m, n, work.data(), m, sv.data(),
                                     U.data(), m, Vt.data(), k);
    if (info != 0)
        throw NumericalError("singular value decomposition failed (info " +
                             std::to_string(info) + ")");
    V = Vt.transpose();
}

// symmetric eigendecomposition, ascending eigenvalues
void lapack_syev(const Eigen::MatrixXd& A, Eigen::VectorXd& evals, Eigen::MatrixXd& evecs) {
    const lapack_int n = static_cast<lapack_int>(A.rows());
    evecs = A;
    evals.resize(n);
    lapack_int info =
        LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, evecs.data(), n, evals.data());
    if (info != 0)
        throw NumericalError("symmetric eigendecomposition failed (info " +
                             std::to_string(info) + ")");
}

}  // namespace

int Spectrum::counting(double lambda) const {
    return static_cast<int>(std::upper_bound(lambdas.begin(), lambdas.end(),
                                             lambda * (1.0 + 1e-12) + 1e-12) -
                            lambdas.begin());
}

void Spectrum::finalize() {
    std::vector<std::size_t> order(lambdas.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (lambdas[a] != lambdas[b]) return lambdas[a] < lambdas[b];
        return mode_tags[a] < mode_tags[b];  // deterministic tie-break
    });
    std::vector<double> l;
    std::vector<std::string> t;
    std::vector<int> m;
    l.reserve(order.size());
    for (auto i : order) {
        l.push_back(lambdas[i]);
        t.push_back(mode_tags[i]);
        m.push_back(multiplicity_hints[i]);
    }
    lambdas = std::move(l);
    mode_tags = std::move(t);
    multiplicity_hints = std::move(m);

    double scale = 0.0;
    for (std::size_t i = 0; i < lambdas.size() && i < 10; ++i)
        scale = std::max(scale, std::abs(lambdas[i]));
    zero_threshold = 1e-8 * std::max(scale, 1e-300);
    zero_modes = 0;
    for (double v : lambdas)
        if (v < zero_threshold) ++zero_modes;
}

Spectrum disk_mode_spectrum(double radius, double mu, int k_max) {
    if (radius <= 0.0 || mu <= 0.0) throw ConfigError("disk_mode_spectrum: radius and mu must be positive");
    if (k_max < 1) throw InsufficientModesError("disk_mode_spectrum: k_max must be >= 1");

    Spectrum sp;
    sp.solver = "disk_modes";
    const double R = radius;
    const Complex iu{0.0, 1.0};

    // k = 0: the rotation field (stream function r^2) is traction-free.
    sp.lambdas.push_back(0.0);
    sp.mode_tags.push_back("k=0,rot");
    sp.multiplicity_hints.push_back(1);

    for (int k = 1; k <= k_max; ++k) {
        // Boundary traces (u_r, u_theta) and tractions (t_r, t_theta) of
        // the stream functions r^k e^{ik th} and r^{k+2} e^{ik th}.
        Eigen::Matrix2cd U, Tm;
        const double Rk1 = std::pow(R, k - 1), Rk = std::pow(R, k), Rkp1 = std::pow(R, k + 1);
        U(0, 0) = iu * double(k) * Rk1;
        U(1, 0) = -double(k) * Rk1;
        Tm(0, 0) = 2.0 * mu * (k - 1.0) * iu * double(k) * std::pow(R, k - 2);
        Tm(1, 0) = -2.0 * mu * (k - 1.0) * double(k) * std::pow(R, k - 2);
        U(0, 1) = iu * double(k) * Rkp1;
        U(1, 1) = -double(k + 2) * Rkp1;
        // pressure of the r^{k+2} branch: 4 mu i (k+1) r^k e^{ik th}
        Tm(0, 1) = (2.0 * mu * double(k) * (k + 1.0) - 4.0 * mu * (k + 1.0)) * iu * Rk;
        Tm(1, 1) = -2.0 * mu * double(k) * (k + 1.0) * Rk;

        Eigen::Matrix2cd dtn = Tm * U.inverse();
        Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(dtn);
        std::array<double, 2> vals = {es.eigenvalues()(0).real(), es.eigenvalues()(1).real()};
        std::sort(vals.begin(), vals.end());
        const std::array<const char*, 2> branch = {"lo", "hi"};
        for (int b = 0; b < 2; ++b) {
            for (int sign = 0; sign < 2; ++sign) {  // +k and -k
                sp.lambdas.push_back(vals[b]);
                sp.mode_tags.push_back("|k|=" + std::to_string(k) + "," + branch[b]);
                sp.multiplicity_hints.push_back(2);
            }
        }
    }
    sp.finalize();
    sp.diagnostics["k_max"] = k_max;
    return sp;
}

// ---------------------------------------------------------------------------
// Galerkin solver on a star-shaped domain.
// Trial space: v = rot(p) for scalar polynomials p of degree <= degree+1
// (gradient rotated by 90 degrees), automatically divergence-free; rigid
// motions are contained in it.
// ---------------------------------------------------------------------------

namespace {

struct PolyBasis {
    // monomials in centroid-centered scaled coordinates
    std::vector<std::pair<int, int>> exps;
    double scale = 1.0;
    Eigen::Vector2d center = Eigen::Vector2d::Zero();

    // stream value is not needed; fields need first and second derivatives
    // of p. v = (p_y, -p_x).
    void deriv1(double x, double y, int i, double& px, double& py) const {
        auto [a, b] = exps[i];
        const double sx = (x - center.x()) / scale, sy = (y - center.y()) / scale;
        px = a == 0 ? 0.0 : a * std::pow(sx, a - 1) * std::pow(sy, b) / scale;
        py = b == 0 ? 0.0 : b * std::pow(sx, a) * std::pow(sy, b - 1) / scale;
    }
    void deriv2(double x, double y, int i, double& pxx, double& pxy, double& pyy) const {
        auto [a, b] = exps[i];
        const double sx = (x - center.x()) / scale, sy = (y - center.y()) / scale;
        const double s2 = scale * scale;
        pxx = a < 2 ? 0.0 : a * (a - 1.0) * std::pow(sx, a - 2) * std::pow(sy, b) / s2;
        pyy = b < 2 ? 0.0 : b * (b - 1.0) * std::pow(sx, a) * std::pow(sy, b - 2) / s2;
        pxy = (a < 1 || b < 1) ? 0.0 : a * b * std::pow(sx, a - 1) * std::pow(sy, b - 1) / s2;
    }
};

}  // namespace

Spectrum galerkin_spectrum(const PlanarDomain& domain, double mu, const GalerkinOptions& opts) {
    if (mu <= 0.0) throw ConfigError("galerkin_spectrum: mu must be positive");
    if (opts.degree < 1 || opts.degree > 20)
        throw ConfigError("galerkin_spectrum: degree must lie in [1, 20]");
    domain.validate();

    const Eigen::Vector2d c = domain.centroid();
    const int ns = opts.angular_points;
    const double hs = two_pi / ns;

    // star-shape check relative to the centroid
    double scale = 0.0;
    for (int i = 0; i < ns; ++i) {
        const double s = hs * i;
        Eigen::Vector2d g = domain.point(s) - c;
        Eigen::Vector2d dg = domain.tangent(s);
        scale = std::max(scale, g.norm());
        if (g.x() * dg.y() - g.y() * dg.x() <= 0.0)
            throw UnsupportedDomainError("galerkin_spectrum: domain is not star-shaped about its centroid");
    }

    PolyBasis basis;
    basis.scale = scale;
    basis.center = c;
    const int pdeg = opts.degree + 1;
    for (int d = 1; d <= pdeg; ++d)
        for (int a = 0; a <= d; ++a) basis.exps.push_back({a, d - a});
    const int nb = static_cast<int>(basis.exps.size());

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nb, nb);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(nb, nb);

    // interior quadrature: x = c + r*(gamma(s)-c), Jacobian r * cross(g, g')
    std::vector<double> rn, rw;
    std::vector<double> nodes, weights;
    const int nrp = std::max(8, opts.radial_points / 16);
    for (int p = 0; p < nrp; ++p) {
        gl_rule(double(p) / nrp, double(p + 1) / nrp, nodes, weights);
        rn.insert(rn.end(), nodes.begin(), nodes.end());
        rw.insert(rw.end(), weights.begin(), weights.end());
    }

    // blocked assembly: per angular slice, <Def v_i, Def v_j> =
    // 2 pxy_i pxy_j + (pyy - pxx)_i (pyy - pxx)_j / 2
    Eigen::MatrixXd Mvol = Eigen::MatrixXd::Zero(nb, nb);  // interior velocity mass
    const int nr = static_cast<int>(rn.size());
    Eigen::MatrixXd PXY(nr, nb), DD(nr, nb), VX(nr, nb), VY(nr, nb);
    Eigen::VectorXd wv(nr);
    Eigen::MatrixXd VB(ns, 2 * nb);
    Eigen::VectorXd wb(ns);
    for (int i = 0; i < ns; ++i) {
        const double s = hs * i;
        const Eigen::Vector2d g = domain.point(s) - c;
        const Eigen::Vector2d dg = domain.tangent(s);
        const double cross = g.x() * dg.y() - g.y() * dg.x();
        for (int q = 0; q < nr; ++q) {
            const double r = rn[q];
            const Eigen::Vector2d x = c + r * g;
            wv(q) = rw[q] * hs * r * cross;
            for (int j = 0; j < nb; ++j) {
                double pxx, pxy, pyy, px, py;
                basis.deriv2(x.x(), x.y(), j, pxx, pxy, pyy);
                basis.deriv1(x.x(), x.y(), j, px, py);
                PXY(q, j) = pxy;
                DD(q, j) = pyy - pxx;
                VX(q, j) = py;
                VY(q, j) = -px;
            }
        }
        A.noalias() += 2.0 * mu * (2.0 * PXY.transpose() * wv.asDiagonal() * PXY +
                                   0.5 * DD.transpose() * wv.asDiagonal() * DD);
        Mvol.noalias() += VX.transpose() * wv.asDiagonal() * VX +
                          VY.transpose() * wv.asDiagonal() * VY;
        const Eigen::Vector2d xb = domain.point(s);
        wb(i) = hs * domain.speed(s);
        for (int j = 0; j < nb; ++j) {
            double px, py;
            basis.deriv1(xb.x(), xb.y(), j, px, py);
            VB(i, 2 * j) = py;     // v_x
            VB(i, 2 * j + 1) = -px;  // v_y
        }
    }
    for (int j = 0; j < nb; ++j)
        for (int k = 0; k < nb; ++k)
            B(j, k) = (VB.col(2 * j).cwiseProduct(VB.col(2 * k)) +
                       VB.col(2 * j + 1).cwiseProduct(VB.col(2 * k + 1)))
                          .dot(wb);
    A = 0.5 * (A + A.transpose()).eval();
    Mvol = 0.5 * (Mvol + Mvol.transpose()).eval();

    // Orthonormalize the trial fields against the interior velocity mass.
    // The trial space is unchanged; the monomial near-dependencies would
    // otherwise smear the boundary-mass spectrum across the threshold.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esG(Mvol);
    const Eigen::VectorXd gev = esG.eigenvalues();
    int gkept0 = 0;
    while (gkept0 < gev.size() && gev(gkept0) <= opts.gram_threshold * gev.maxCoeff()) ++gkept0;
    const int gk = static_cast<int>(gev.size()) - gkept0;
    Eigen::MatrixXd W = esG.eigenvectors().rightCols(gk) *
                        gev.tail(gk).cwiseSqrt().cwiseInverse().asDiagonal();
    Eigen::MatrixXd Ao = W.transpose() * A * W;
    Eigen::MatrixXd Bo = W.transpose() * B * W;

    // Split along the spectral decomposition of the boundary mass and
    // eliminate its null space (interior bubbles, infinite pencil
    // eigenvalues) through the Schur complement of the energy form: for a
    // fixed boundary trace the quotient minimizes the volume energy over
    // zero-trace directions.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esB(Bo);
    const Eigen::VectorXd bev = esB.eigenvalues();
    const double bmax = bev.maxCoeff();
    const double thr = opts.pencil_threshold * bmax;
    int first_kept = 0;
    while (first_kept < bev.size() && bev(first_kept) <= thr) ++first_kept;
    const int kept = static_cast<int>(bev.size()) - first_kept;
    const int dropped = static_cast<int>(bev.size()) - kept;
    if (kept == 0) throw ConditioningError("galerkin_spectrum: boundary mass has empty range");
    // Gap diagnostic around the threshold. Monomial trace Grams have no
    // clean separation there in double precision; a narrow gap is recorded
    // as a conditioning warning, it does not abort the solve.
    double gap = std::numeric_limits<double>::infinity();
    if (first_kept > 0)
        gap = bev(first_kept) / std::max(std::abs(bev(first_kept - 1)), 1e-300);

    const Eigen::MatrixXd Ur = esB.eigenvectors().rightCols(kept);
    const Eigen::MatrixXd Un = esB.eigenvectors().leftCols(dropped);
    Eigen::MatrixXd S = Ur.transpose() * Ao * Ur;
    Eigen::MatrixXd Anr;
    Eigen::MatrixXd Ann_inv_Anr;
    if (dropped > 0) {
        Anr = Un.transpose() * Ao * Ur;
        Eigen::MatrixXd Ann = Un.transpose() * Ao * Un;
        // pseudo-inverse on the energetically meaningful part of the bubble block
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esN(Ann);
        const Eigen::VectorXd nev = esN.eigenvalues();
        const double ncut = 1e-12 * nev.cwiseAbs().maxCoeff();
        Eigen::VectorXd inv = Eigen::VectorXd::Zero(nev.size());
        for (int i = 0; i < nev.size(); ++i) inv(i) = nev(i) > ncut ? 1.0 / nev(i) : 0.0;
        Ann_inv_Anr = esN.eigenvectors() * inv.asDiagonal() *
                      (esN.eigenvectors().transpose() * Anr);
        S.noalias() -= Anr.transpose() * Ann_inv_Anr;
    }
    S = 0.5 * (S + S.transpose()).eval();

    Eigen::VectorXd lam_b = bev.tail(kept);
    Eigen::VectorXd inv_sqrt = lam_b.cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd M = inv_sqrt.asDiagonal() * S * inv_sqrt.asDiagonal();
    M = 0.5 * (M + M.transpose());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);

    Spectrum sp;
    sp.solver = "galerkin_poly";
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        sp.lambdas.push_back(es.eigenvalues()(i));
        sp.mode_tags.push_back("ritz=" + std::to_string(i));
        sp.multiplicity_hints.push_back(1);
    }
    sp.finalize();
    sp.diagnostics["degree"] = opts.degree;
    sp.diagnostics["basis_size"] = nb;
    sp.diagnostics["pencil_kept"] = kept;
    sp.diagnostics["pencil_dropped"] = nb - kept;
    sp.diagnostics["pencil_gap"] = gap;
    sp.diagnostics["pencil_gap_warning"] = gap < opts.required_gap ? 1.0 : 0.0;
    // definitional Rayleigh consistency of the solved pencil: each
    // eigenvector with its minimal-energy bubble extension in the original
    // coefficient basis
    double worst = 0.0, worst_low = 0.0;
    const double low_cap = 4.0 * mu * (opts.degree + 2);  // physical Ritz range
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        const Eigen::VectorXd yr = inv_sqrt.asDiagonal() * es.eigenvectors().col(i);
        Eigen::VectorXd co = Ur * yr;
        if (dropped > 0) co.noalias() -= Un * (Ann_inv_Anr * yr);
        const Eigen::VectorXd coeff = W * co;
        const double num = coeff.dot(A * coeff), den = coeff.dot(B * coeff);
        const double lam = es.eigenvalues()(i);
        // rigid-motion pairs are checked against quotient ~ 0 instead
        const double err = std::abs(lam) < 1e-8 * low_cap
                               ? std::abs(num / den)
                               : std::abs(num / den - lam) / std::abs(lam);
        worst = std::max(worst, err);
        if (lam < low_cap) worst_low = std::max(worst_low, err);
    }
    sp.diagnostics["rayleigh_worst"] = worst;
    sp.diagnostics["rayleigh_worst_low"] = worst_low;
    return sp;
}

Spectrum galerkin_spectrum(const PlanarDomain& domain, double mu, int degree) {
    GalerkinOptions opts;
    opts.degree = degree;
    return galerkin_spectrum(domain, mu, opts);
}

// ---------------------------------------------------------------------------
// Stokeslet kernels
// ---------------------------------------------------------------------------

Eigen::Vector2d stokeslet_velocity(const Eigen::Vector2d& x, const Eigen::Vector2d& y,
                                   const Eigen::Vector2d& force, double mu) {
    const Eigen::Vector2d r = x - y;
    const double r2 = r.squaredNorm();
    return (-0.5 * std::log(r2) * force + r * (r.dot(force) / r2)) / (4.0 * std::numbers::pi * mu);
}

Eigen::Matrix2d stokeslet_velocity_gradient(const Eigen::Vector2d& x, const Eigen::Vector2d& y,
                                            const Eigen::Vector2d& force, double mu) {
    const Eigen::Vector2d r = x - y;
    const double r2 = r.squaredNorm();
    Eigen::Matrix2d g;  // g(i,l) = d u_i / d x_l
    for (int i = 0; i < 2; ++i)
        for (int l = 0; l < 2; ++l) {
            double v = -force(i) * r(l) / r2;
            v += ((i == l ? r.dot(force) : 0.0) + force(l) * r(i)) / r2;
            v += -2.0 * r(i) * r.dot(force) * r(l) / (r2 * r2);
            g(i, l) = v / (4.0 * std::numbers::pi * mu);
        }
    return g;
}

double stokeslet_pressure(const Eigen::Vector2d& x, const Eigen::Vector2d& y,
                          const Eigen::Vector2d& force) {
    const Eigen::Vector2d r = x - y;
    return r.dot(force) / (2.0 * std::numbers::pi * r.squaredNorm());
}

Eigen::Vector2d stokeslet_traction(const Eigen::Vector2d& x, const Eigen::Vector2d& nu,
                                   const Eigen::Vector2d& y, const Eigen::Vector2d& force) {
    const Eigen::Vector2d r = x - y;
    const double r2 = r.squaredNorm();
    const double rn = r.dot(nu);
    return (-1.0 / std::numbers::pi) * r * (r.dot(force) * rn / (r2 * r2));
}

// ---------------------------------------------------------------------------
// MFS: Ritz spectrum of the DtN form on the Stokeslet trace space.
// ---------------------------------------------------------------------------

MfsResult mfs_dtn(const PlanarDomain& domain, double mu, const MfsOptions& opts) {
    if (mu <= 0.0) throw ConfigError("mfs_dtn: mu must be positive");
    if (opts.n_sources < 4) throw ConfigError("mfs_dtn: too few sources");
    if (opts.offset <= 0.0 || opts.offset >= 1.0)
        throw ConfigError("mfs_dtn: source offset must lie in (0, 1)");
    domain.validate();

    const int ns = opts.n_sources;
    const int nc = opts.collocation_factor * ns;
    if (nc < ns) throw ConfigError("mfs_dtn: collocation must be >= sources");

    const Eigen::Vector2d cen = domain.centroid();
    Eigen::MatrixXd src(ns, 2);
    for (int q = 0; q < ns; ++q) {
        const double s = two_pi * q / ns;
        src.row(q) = (cen + (1.0 + opts.offset) * (domain.point(s) - cen)).transpose();
    }

    Eigen::MatrixXd Phi(2 * nc, 2 * ns), Tm(2 * nc, 2 * ns);
    Eigen::VectorXd w(2 * nc);
    Eigen::VectorXd nu_vec(2 * nc);
    parallel_for(nc, [&](int p) {
        const double s = two_pi * p / nc;
        const Eigen::Vector2d x = domain.point(s);
        const Eigen::Vector2d nu = domain.outward_normal(s);
        const double wp = domain.speed(s) * two_pi / nc;
        w(2 * p) = w(2 * p + 1) = wp;
        nu_vec(2 * p) = nu.x();
        nu_vec(2 * p + 1) = nu.y();
        for (int q = 0; q < ns; ++q) {
            const Eigen::Vector2d y = src.row(q).transpose();
            for (int j = 0; j < 2; ++j) {
                const Eigen::Vector2d e = Eigen::Vector2d::Unit(j);
                const Eigen::Vector2d u = stokeslet_velocity(x, y, e, mu);
                const Eigen::Vector2d t = stokeslet_traction(x, nu, y, e);
                Phi(2 * p, 2 * q + j) = u.x();
                Phi(2 * p + 1, 2 * q + j) = u.y();
                Tm(2 * p, 2 * q + j) = t.x();
                Tm(2 * p + 1, 2 * q + j) = t.y();
            }
        }
    });

    const Eigen::VectorXd sw = w.cwiseSqrt();
    Eigen::MatrixXd Phiw = sw.asDiagonal() * Phi;

    Eigen::MatrixXd Usvd, Vsvd;
    Eigen::VectorXd sv;
    lapack_svd(Phiw, Usvd, sv, Vsvd);
    const double smax = sv(0);
    int k = 0;
    while (k < sv.size() && sv(k) > opts.sv_threshold * smax) ++k;
    if (k < 4) throw ConditioningError("mfs_dtn: trace space collapsed under the singular value cut");
    const double cond = smax / sv(k - 1);
    if (cond > opts.conditioning_limit)
        throw ConditioningError("mfs_dtn: conditioning " + std::to_string(cond) + " beyond limit");

    const Eigen::MatrixXd Uk = Usvd.leftCols(k);
    // tractions of the L2(w)-orthonormal Ritz basis fields
    Eigen::MatrixXd Tr = (sw.asDiagonal() * Tm) *
                         (Vsvd.leftCols(k) * sv.head(k).cwiseInverse().asDiagonal());
    Eigen::MatrixXd A = Tr.transpose() * Uk;
    const double asym = (A - A.transpose()).norm() / A.norm();
    Eigen::MatrixXd Asym = 0.5 * (A + A.transpose());

    // remove the flux-incompatible direction: Householder complement of the
    // normal pattern inside the Ritz space
    Eigen::VectorXd cn = Uk.transpose() * (sw.cwiseProduct(nu_vec));
    cn.normalize();
    Eigen::VectorXd v = cn;
    v(0) += (cn(0) >= 0.0 ? 1.0 : -1.0);
    v.normalize();
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(k, k) - 2.0 * v * v.transpose();
    Eigen::MatrixXd Q = H.rightCols(k - 1);

    Eigen::VectorXd lam;
    Eigen::MatrixXd evecs;
    lapack_syev(Q.transpose() * Asym * Q, lam, evecs);
    Eigen::MatrixXd V = Q * evecs;

    // per-pair traction residual in L2(w), in ascending-lambda order
    Eigen::MatrixXd TV = Tr * V;
    Eigen::MatrixXd UV = Uk * V;
    std::vector<double> residuals(k - 1);
    for (int i = 0; i < k - 1; ++i)
        residuals[i] = (TV.col(i) - lam(i) * UV.col(i)).norm() / std::max(1.0, std::abs(lam(i)));

    // spike detection: residual far above the median of the +-5 neighbors
    std::vector<bool> junk(k - 1, false);
    for (int i = 0; i < k - 1; ++i) {
        std::vector<double> window;
        for (int j = std::max(0, i - 5); j < std::min(k - 1, i + 6); ++j)
            if (j != i) window.push_back(residuals[j]);
        std::nth_element(window.begin(), window.begin() + window.size() / 2, window.end());
        const double med = window[window.size() / 2];
        junk[i] = residuals[i] > opts.junk_floor &&
                  residuals[i] > opts.junk_spike_factor * med;
    }

    MfsResult out;
    out.asymmetry = asym;
    out.condition = cond;
    out.ritz_dimension = k;
    out.mu = mu;
    out.source_points = src;
    out.spectrum.solver = "mfs";

    // drop spike pairs and, when requested, truncate at the cap
    std::vector<int> keep;
    for (int i = 0; i < k - 1; ++i) {
        if (opts.lambda_cap > 0.0 && lam(i) > opts.lambda_cap) continue;
        if (junk[i]) {
            ++out.junk_pairs;
            continue;
        }
        keep.push_back(i);
    }
    out.eigvec_source_coeff.resize(2 * ns, static_cast<int>(keep.size()));
    const Eigen::MatrixXd Vsrc = Vsvd.leftCols(k) * sv.head(k).cwiseInverse().asDiagonal();
    int col = 0;
    for (int i : keep) {
        out.spectrum.lambdas.push_back(lam(i));
        out.spectrum.mode_tags.push_back("ritz=" + std::to_string(i));
        out.spectrum.multiplicity_hints.push_back(1);
        out.pair_residuals.push_back(residuals[i]);
        out.eigvec_source_coeff.col(col++) = Vsrc * V.col(i);
    }
    out.spectrum.finalize();
    out.spectrum.diagnostics["asymmetry"] = asym;
    out.spectrum.diagnostics["asymmetry_warning"] = asym > opts.asymmetry_warn ? 1.0 : 0.0;
    out.spectrum.diagnostics["condition"] = cond;
    out.spectrum.diagnostics["ritz_dimension"] = k;
    out.spectrum.diagnostics["junk_pairs"] = out.junk_pairs;
    out.spectrum.diagnostics["n_sources"] = ns;
    out.spectrum.diagnostics["offset"] = opts.offset;

    // band-projected pointwise DtN on the boundary samples
    out.dtn = (sw.cwiseInverse().asDiagonal() * (Tr * Uk.transpose())) * sw.asDiagonal();
    // express as map on raw samples: t = Tr * (Uk^T sqrt(w) v), then unweight
    return out;
}

MfsResult mfs_dtn(const PlanarDomain& domain, double mu, int n_sources, int n_collocation) {
    MfsOptions opts;
    opts.n_sources = n_sources;
    if (n_collocation < n_sources) throw ConfigError("mfs_dtn: collocation must be >= sources");
    opts.collocation_factor = std::max(1, n_collocation / n_sources);
    return mfs_dtn(domain, mu, opts);
}

Spectrum cross_validate_spectrum(const Spectrum& fine, const Spectrum& coarse,
                                 double validate_below, double tol_scale) {
    Spectrum out;
    out.solver = fine.solver + "+validated";
    out.diagnostics = fine.diagnostics;
    std::size_t j = 0;
    int dropped = 0;
    for (std::size_t i = 0; i < fine.size(); ++i) {
        const double lam = fine.lambdas[i];
        bool keep = true;
        if (lam <= validate_below) {
            const double tol = tol_scale * std::max(1.0, lam);
            while (j < coarse.size() && coarse.lambdas[j] < lam - tol) ++j;
            if (j < coarse.size() && std::abs(coarse.lambdas[j] - lam) <= tol)
                ++j;  // consume the matching coarse eigenvalue
            else
                keep = false;
        }
        if (keep) {
            out.lambdas.push_back(lam);
            out.mode_tags.push_back(fine.mode_tags[i]);
            out.multiplicity_hints.push_back(fine.multiplicity_hints[i]);
        } else {
            ++dropped;
        }
    }
    out.finalize();
    out.diagnostics["cross_validation_dropped"] = dropped;
    out.diagnostics["cross_validation_below"] = validate_below;
    return out;
}

double mfs_rayleigh_error(const PlanarDomain& domain, const MfsResult& result, int pair_index) {
    if (pair_index < 0 || pair_index >= static_cast<int>(result.spectrum.size()))
        throw ConfigError("mfs_rayleigh_error: pair index out of range");
    const Eigen::VectorXd coeff = result.eigvec_source_coeff.col(pair_index);
    const double lambda = result.spectrum.lambdas[pair_index];
    const double mu = result.mu;
    const int ns = static_cast<int>(result.source_points.rows());

    const Eigen::Vector2d cen = domain.centroid();
    const int nang = 256;
    const double hs = two_pi / nang;
    std::vector<double> rn, rw, nodes, weights;
    for (int p = 0; p < 4; ++p) {
        gl_rule(p / 4.0, (p + 1) / 4.0, nodes, weights);
        rn.insert(rn.end(), nodes.begin(), nodes.end());
        rw.insert(rw.end(), weights.begin(), weights.end());
    }

    auto field_grad = [&](const Eigen::Vector2d& x) {
        Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
        for (int q = 0; q < ns; ++q) {
            const Eigen::Vector2d y = result.source_points.row(q).transpose();
            const Eigen::Vector2d f(coeff(2 * q), coeff(2 * q + 1));
            g += stokeslet_velocity_gradient(x, y, f, mu);
        }
        return g;
    };
    auto field_u = [&](const Eigen::Vector2d& x) {
        Eigen::Vector2d u = Eigen::Vector2d::Zero();
        for (int q = 0; q < ns; ++q) {
            const Eigen::Vector2d y = result.source_points.row(q).transpose();
            const Eigen::Vector2d f(coeff(2 * q), coeff(2 * q + 1));
            u += stokeslet_velocity(x, y, f, mu);
        }
        return u;
    };

    double energy = 0.0;
    for (int i = 0; i < nang; ++i) {
        const double s = hs * i;
        const Eigen::Vector2d g = domain.point(s) - cen;
        const Eigen::Vector2d dg = domain.tangent(s);
        const double cross = g.x() * dg.y() - g.y() * dg.x();
        for (std::size_t q = 0; q < rn.size(); ++q) {
            const double r = rn[q];
            const Eigen::Vector2d x = cen + r * g;
            const Eigen::Matrix2d gr = field_grad(x);
            const Eigen::Matrix2d def = 0.5 * (gr + gr.transpose());
            energy += rw[q] * hs * r * cross * 2.0 * mu * def.squaredNorm();
        }
    }
    double mass = 0.0;
    for (int i = 0; i < nang; ++i) {
        const double s = hs * i;
        mass += hs * domain.speed(s) * field_u(domain.point(s)).squaredNorm();
    }
    const double quotient = energy / mass;
    if (lambda < result.spectrum.zero_threshold) return std::abs(quotient);
    return std::abs(quotient - lambda) / std::max(lambda, 1e-12);
}

}  // namespace steklov
