#pragma once

#include <optional>
#include <vector>

#include "steklov/eigensolver.hpp"
#include "steklov/errors.hpp"
#include "steklov/symbols.hpp"

namespace steklov {

struct HeatTraceSample {
    double t = 0.0;
    double partial_sum = 0.0;
    double tail_bound = 0.0;
    int terms_used = 0;
    bool usable = true;
};

struct HeatTraceFit {
    double a0_hat = 0.0;
    double a1_hat = 0.0;
    std::optional<double> tlogt_coeff;
    double residual_norm = 0.0;
    double condition = 0.0;
    std::vector<double> t_grid;
    // filled by invert_geometry
    std::optional<double> perimeter_estimate;
    std::optional<double> weighted_curvature_estimate;
    MuConvention convention = MuConvention::carried;
};

// Partial heat traces over a t-grid with a geometric tail model fitted to
// the last decade of eigenvalues (safety factor 2). Samples whose tail bound
// exceeds `tail_fraction` of the partial sum are flagged unusable.
std::vector<HeatTraceSample> partial_trace(const Spectrum& spectrum,
                                           const std::vector<double>& t_grid,
                                           double tail_fraction = 1e-8);

// Least squares on {t^{1-n}, t^{2-n}} (+ t log t for n = 2 when enabled).
HeatTraceFit fit_two_term(const std::vector<HeatTraceSample>& samples, int n,
                          bool include_tlogt = false);

// vol(boundary) and the weighted total curvature integral from the fitted
// coefficients.
std::pair<double, double> invert_geometry(const HeatTraceFit& fit, int n, double mu_const,
                                          MuConvention conv);

std::vector<double> log_grid(double t_min, double t_max, int count);

}  // namespace steklov
