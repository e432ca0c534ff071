#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "steklov/errors.hpp"
#include "steklov/geometry.hpp"

namespace steklov {

// Sorted Steklov eigenvalues with bookkeeping. Eigenvalues are repeated
// according to multiplicity.
struct Spectrum {
    std::vector<double> lambdas;           // sorted ascending
    std::vector<std::string> mode_tags;    // per entry
    std::vector<int> multiplicity_hints;   // per entry
    int zero_modes = 0;
    double zero_threshold = 0.0;
    std::string solver;
    std::map<std::string, double> diagnostics;

    std::size_t size() const { return lambdas.size(); }
    // eigenvalue counting function N(lambda)
    int counting(double lambda) const;
    void finalize();  // sort by lambda (ties by tag), recount zero modes
};

// ---- closed-disk mode solver ----
// Per angular mode |k| <= k_max, the regular biharmonic stream-function
// basis {r^|k|, r^|k|+2} e^{ik theta} with its pressure gives a 2x2 (1x1 at
// k = 0) boundary DtN eigenproblem.
Spectrum disk_mode_spectrum(double radius, double mu, int k_max);

// ---- divergence-free polynomial Galerkin ----
struct GalerkinOptions {
    int degree = 12;         // stream polynomial degree is degree+1
    int radial_points = 48;  // Gauss-Legendre
    int angular_points = 512;
    // Boundary-mass cut. The quadrature noise floor of monomial trace Grams
    // sits near 1e-9 relative in double precision, so the cut lives above it;
    // the kept/dropped gap is still checked against required_gap.
    double pencil_threshold = 1e-8;
    double gram_threshold = 1e-9;      // interior-mass orthonormalization cut
    double required_gap = 100.0;       // gap below this records a conditioning warning
};

Spectrum galerkin_spectrum(const PlanarDomain& domain, double mu, const GalerkinOptions& opts);
Spectrum galerkin_spectrum(const PlanarDomain& domain, double mu, int degree);

// ---- method of fundamental solutions ----
struct MfsOptions {
    int n_sources = 128;
    int collocation_factor = 2;    // collocation = factor * sources
    double offset = 0.5;           // source curve dilation (1 + offset)
    double sv_threshold = 1e-10;   // relative singular value cut
    // Optional spike filter on the per-pair traction residuals. Off by
    // default: hard-to-represent true modes also carry elevated residuals
    // (the ellipse has several below lambda = 12), so deleting by residual
    // is reserved for diagnosis.
    double junk_spike_factor = 10.0;
    double junk_floor = 1e9;
    double lambda_cap = -1.0;      // truncate spectrum here (<0: keep all)
    double asymmetry_warn = 1e-6;
    double conditioning_limit = 1e18;
};

struct MfsResult {
    Eigen::MatrixXd dtn;  // band-projected pointwise DtN on boundary samples
    Spectrum spectrum;
    double asymmetry = 0.0;       // ||S - S^T|| / ||S|| of the weighted form
    double condition = 0.0;       // singular value range of the trace matrix
    int ritz_dimension = 0;
    int junk_pairs = 0;
    std::vector<double> pair_residuals;  // per retained eigenpair
    // retained quantities for Rayleigh checks
    Eigen::MatrixXd source_points;       // n_sources x 2
    Eigen::MatrixXd eigvec_source_coeff; // 2*n_sources x n_pairs (columns)
    double mu = 1.0;
};

MfsResult mfs_dtn(const PlanarDomain& domain, double mu, const MfsOptions& opts);
MfsResult mfs_dtn(const PlanarDomain& domain, double mu, int n_sources, int n_collocation);

// Keep only eigenvalues of `fine` below `validate_below` that a second,
// independent discretization reproduces within tol_scale * max(1, lambda).
// Spurious Ritz pairs land at arbitrary positions and fail the match; the
// trace-relevant low spectrum is exactly where the coarse run is reliable.
Spectrum cross_validate_spectrum(const Spectrum& fine, const Spectrum& coarse,
                                 double validate_below, double tol_scale = 1e-4);

// Relative Rayleigh-quotient error of an MFS eigenpair, using interior
// star-shaped quadrature of the deformation energy.
double mfs_rayleigh_error(const PlanarDomain& domain, const MfsResult& result, int pair_index);

// Stokeslet fields (unit circle of sources is the caller's business):
// velocity, velocity gradient and pressure of a point force.
Eigen::Vector2d stokeslet_velocity(const Eigen::Vector2d& x, const Eigen::Vector2d& y,
                                   const Eigen::Vector2d& force, double mu);
Eigen::Matrix2d stokeslet_velocity_gradient(const Eigen::Vector2d& x, const Eigen::Vector2d& y,
                                            const Eigen::Vector2d& force, double mu);
double stokeslet_pressure(const Eigen::Vector2d& x, const Eigen::Vector2d& y,
                          const Eigen::Vector2d& force);
Eigen::Vector2d stokeslet_traction(const Eigen::Vector2d& x, const Eigen::Vector2d& nu,
                                   const Eigen::Vector2d& y, const Eigen::Vector2d& force);

}  // namespace steklov
