#include "steklov/heattrace.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace steklov {

std::vector<double> log_grid(double t_min, double t_max, int count) {
    if (t_min <= 0.0 || t_max <= t_min || count < 2)
        throw ConfigError("log_grid: need 0 < t_min < t_max and count >= 2");
    std::vector<double> g(count);
    const double r = std::log(t_max / t_min) / (count - 1);
    for (int i = 0; i < count; ++i) g[i] = t_min * std::exp(r * i);
    return g;
}

std::vector<HeatTraceSample> partial_trace(const Spectrum& spectrum,
                                           const std::vector<double>& t_grid,
                                           double tail_fraction) {
    const auto& lam = spectrum.lambdas;
    if (lam.empty()) throw ConfigError("partial_trace: empty spectrum");
    if (!std::is_sorted(lam.begin(), lam.end()))
        throw ConfigError("partial_trace: spectrum must be sorted");

    // geometric tail model: mean gap over the last decade of eigenvalues
    const std::size_t K = lam.size();
    const std::size_t lo = std::max<std::size_t>(K > 10 ? K - K / 10 : 0, 0);
    double mean_gap = 0.0;
    if (K >= 2 && lo < K - 1) mean_gap = (lam[K - 1] - lam[lo]) / double(K - 1 - lo);

    std::vector<HeatTraceSample> out;
    out.reserve(t_grid.size());
    for (double t : t_grid) {
        if (t <= 0.0) throw ConfigError("partial_trace: t must be positive");
        // Neumaier compensated summation in ascending-lambda order
        double sum = 0.0, comp = 0.0;
        for (double l : lam) {
            const double term = std::exp(-t * l);
            const double s = sum + term;
            comp += (std::abs(sum) >= std::abs(term)) ? (sum - s) + term : (term - s) + sum;
            sum = s;
        }
        sum += comp;

        HeatTraceSample sample;
        sample.t = t;
        sample.partial_sum = sum;
        sample.terms_used = static_cast<int>(K);
        if (mean_gap > 0.0) {
            const double r = std::exp(-t * mean_gap);
            sample.tail_bound = 2.0 * std::exp(-t * lam.back()) * r / (1.0 - r);
        } else {
            sample.tail_bound = std::exp(-t * lam.back()) * double(K);  // no decay information
        }
        sample.usable = sample.tail_bound < tail_fraction * std::abs(sample.partial_sum);
        out.push_back(sample);
    }
    return out;
}

HeatTraceFit fit_two_term(const std::vector<HeatTraceSample>& samples, int n,
                          bool include_tlogt) {
    std::vector<const HeatTraceSample*> use;
    for (const auto& s : samples)
        if (s.usable) use.push_back(&s);
    if (use.size() < 3)
        throw FitError("fit_two_term: need at least 3 usable samples, have " +
                       std::to_string(use.size()));
    double tmin = use.front()->t, tmax = use.front()->t;
    for (auto* s : use) {
        tmin = std::min(tmin, s->t);
        tmax = std::max(tmax, s->t);
    }
    if (tmax / tmin < 5.0)
        throw FitError("fit_two_term: t-grid must span at least a factor 5");

    const int cols = include_tlogt && n == 2 ? 3 : 2;
    Eigen::MatrixXd D(use.size(), cols);
    Eigen::VectorXd y(use.size());
    for (std::size_t i = 0; i < use.size(); ++i) {
        const double t = use[i]->t;
        D(i, 0) = std::pow(t, 1 - n);
        D(i, 1) = std::pow(t, 2 - n);
        if (cols == 3) D(i, 2) = t * std::log(t);
        y(i) = use[i]->partial_sum;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(D, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double cond = svd.singularValues()(0) / svd.singularValues()(cols - 1);
    if (cond > 1e12)
        throw FitError("fit_two_term: design matrix condition " + std::to_string(cond) +
                       "; widen the t-range");
    Eigen::VectorXd coef = svd.solve(y);

    HeatTraceFit fit;
    fit.a0_hat = coef(0);
    fit.a1_hat = coef(1);
    if (cols == 3) fit.tlogt_coeff = coef(2);
    fit.residual_norm = (D * coef - y).norm();
    fit.condition = cond;
    for (auto* s : use) fit.t_grid.push_back(s->t);
    return fit;
}

std::pair<double, double> invert_geometry(const HeatTraceFit& fit, int n, double mu_const,
                                          MuConvention conv) {
    if (fit.a0_hat <= 0.0)
        throw InversionError("invert_geometry: nonpositive fitted leading coefficient");
    const double dens = a0_density(n, mu_const, conv);
    const double perim = fit.a0_hat / dens;
    const double c = (2.0 * n + 1.0) * std::tgamma(n - 1.0) * sphere_volume(n - 2) /
                     (2.0 * (n - 1.0) * std::pow(4.0 * std::numbers::pi, n - 1));
    const double curv = fit.a1_hat / c;
    return {perim, curv};
}

}  // namespace steklov
