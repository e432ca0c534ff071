// Command line front end: config-driven spectrum / invariants / heat-fit /
// audit runs with CSV/JSON outputs. Exit codes: 0 ok, 1 config error,
// 2 numerical error, 3 audit tolerances violated.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"

#include "steklov/eigensolver.hpp"
#include "steklov/geometry.hpp"
#include "steklov/heattrace.hpp"
#include "steklov/io.hpp"
#include "steklov/parallel.hpp"
#include "steklov/symbols.hpp"

namespace fs = std::filesystem;
using namespace steklov;

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

bool domain_is_circle(const PlanarDomain& d, double& radius) {
    // circle centered anywhere: single mode-1 coefficients of equal magnitude
    const auto& xc = d.x.cos_coeffs;
    const auto& xs = d.x.sin_coeffs;
    const auto& yc = d.y.cos_coeffs;
    const auto& ys = d.y.sin_coeffs;
    auto coef = [](const std::vector<double>& v, int m) { return m < (int)v.size() ? v[m] : 0.0; };
    int maxm = std::max(d.x.modes(), d.y.modes());
    for (int m = 2; m < maxm; ++m)
        if (coef(xc, m) != 0.0 || coef(xs, m) != 0.0 || coef(yc, m) != 0.0 || coef(ys, m) != 0.0)
            return false;
    const double r = coef(xc, 1);
    if (r <= 0.0) return false;
    if (coef(xs, 1) != 0.0 || coef(yc, 1) != 0.0) return false;
    if (std::abs(coef(ys, 1) - r) > 1e-14 * std::max(1.0, r)) return false;
    radius = r;
    return true;
}

Spectrum solve_spectrum(const ExperimentConfig& cfg, const DomainFile& df) {
    const double mu = df.viscosity.trace.cos_coeffs[0];
    if (!df.viscosity.is_constant())
        throw ConfigError("eigensolvers require constant viscosity; variable mu belongs to the symbol side");
    if (cfg.solver.method == "disk_modes") {
        double radius = cfg.solver.radius;
        if (!domain_is_circle(df.domain, radius))
            throw ConfigError("solver.method disk_modes requires a circular domain");
        return disk_mode_spectrum(radius, mu, cfg.solver.k_max);
    }
    if (cfg.solver.method == "galerkin_poly") {
        return galerkin_spectrum(df.domain, mu, cfg.solver.degree);
    }
    MfsResult r = mfs_dtn(df.domain, mu, cfg.solver.mfs);
    return r.spectrum;
}

int run_spectrum(const ExperimentConfig& cfg, const DomainFile& df, const fs::path& out_dir) {
    Spectrum sp = solve_spectrum(cfg, df);
    if (cfg.eigenvalue_count > 0 && (int)sp.size() < cfg.eigenvalue_count)
        throw InsufficientModesError("spectrum has " + std::to_string(sp.size()) +
                                     " eigenvalues, config requires " +
                                     std::to_string(cfg.eigenvalue_count));
    write_text(out_dir / "spectrum.csv", spectrum_to_csv(sp));
    write_json(out_dir / "spectrum_meta.json", spectrum_sidecar(sp));
    return 0;
}

int run_invariants(const ExperimentConfig& cfg, const DomainFile& df, const fs::path& out_dir) {
    json j;
    j["label"] = df.domain.label;
    j["perimeter"] = perimeter(df.domain);
    j["total_curvature"] = total_weighted_curvature(df.domain, df.viscosity, 0);
    j["total_weighted_curvature_w1"] = total_weighted_curvature(df.domain, df.viscosity, 1);
    for (auto conv : {MuConvention::paper, MuConvention::carried}) {
        const char* name = conv == MuConvention::paper ? "paper" : "carried";
        j["a0"][name] = assemble_coefficient(df.domain, df.viscosity, CoefficientKind::a0, conv);
        j["a1"][name] = assemble_coefficient(df.domain, df.viscosity, CoefficientKind::a1, conv);
    }
    if (cfg.run_pipeline_check) {
        j["a0_pipeline"] = assemble_coefficient(df.domain, df.viscosity, CoefficientKind::a0,
                                                cfg.convention, PipelineRoute::numeric,
                                                cfg.index_convention);
        j["a1_pipeline"] = assemble_coefficient(df.domain, df.viscosity, CoefficientKind::a1,
                                                cfg.convention, PipelineRoute::numeric,
                                                cfg.index_convention);
    }
    // density samples along the boundary
    json dens = json::array();
    const int N = 32;
    for (int i = 0; i < N; ++i) {
        const double s = 2.0 * std::numbers::pi * i / N;
        BoundaryJet jet = curve_jet(df.domain, df.viscosity, s);
        dens.push_back({{"s", s},
                        {"kappa", jet.kappa(0)},
                        {"mu", jet.mu},
                        {"a1_density_paper", a1_density(jet, 2, MuConvention::paper)},
                        {"a1_density_carried", a1_density(jet, 2, MuConvention::carried)}});
    }
    j["densities"] = dens;
    write_json(out_dir / "invariants.json", j);
    return 0;
}

int run_heat_fit(const ExperimentConfig& cfg, const DomainFile& df, const fs::path& out_dir) {
    Spectrum sp = solve_spectrum(cfg, df);
    auto samples = partial_trace(sp, cfg.t_grid, cfg.tail_fraction);
    HeatTraceFit fit = fit_two_term(samples, 2, cfg.include_tlogt);
    fit.convention = cfg.convention;
    const double mu = df.viscosity.trace.cos_coeffs[0];
    auto [perim, curv] = invert_geometry(fit, 2, mu, cfg.convention);
    fit.perimeter_estimate = perim;
    fit.weighted_curvature_estimate = curv;
    write_text(out_dir / "spectrum.csv", spectrum_to_csv(sp));
    write_json(out_dir / "spectrum_meta.json", spectrum_sidecar(sp));
    write_json(out_dir / "heat_fit.json", fit_report_json(fit, samples));
    return 0;
}

int run_audit(const ExperimentConfig& cfg, const DomainFile& df, const fs::path& out_dir) {
    json report;
    report["label"] = df.domain.label;
    const double mu = df.viscosity.trace.cos_coeffs[0];

    // geometry side
    const double perim_quad = perimeter(df.domain);
    const double curv_quad = total_weighted_curvature(df.domain, df.viscosity, 1);
    report["geometry"] = {{"perimeter", perim_quad}, {"weighted_total_curvature", curv_quad}};

    // symbol side
    json sym;
    for (auto conv : {MuConvention::paper, MuConvention::carried}) {
        const char* name = conv == MuConvention::paper ? "paper" : "carried";
        sym["a0"][name] = assemble_coefficient(df.domain, df.viscosity, CoefficientKind::a0, conv);
        sym["a1"][name] = assemble_coefficient(df.domain, df.viscosity, CoefficientKind::a1, conv);
    }
    const double a1_closed = sym["a1"]["carried"].get<double>();
    if (cfg.run_pipeline_check) {
        // index-convention adjudication: the pipeline built on the strict
        // upper-index derivative reproduces the closed-form coefficient.
        for (auto idx : {IndexConvention::strict, IndexConvention::mirrored}) {
            const char* name = idx == IndexConvention::strict ? "strict" : "mirrored";
            sym["a1_pipeline"][name] =
                assemble_coefficient(df.domain, df.viscosity, CoefficientKind::a1,
                                     MuConvention::carried, PipelineRoute::numeric, idx);
        }
        const double d_strict =
            std::abs(sym["a1_pipeline"]["strict"].get<double>() - a1_closed);
        const double d_mirror =
            std::abs(sym["a1_pipeline"]["mirrored"].get<double>() - a1_closed);
        sym["index_convention_selected"] = d_strict <= d_mirror ? "strict" : "mirrored";
    }
    report["symbols"] = sym;

    // spectrum side
    Spectrum sp = solve_spectrum(cfg, df);
    if (cfg.eigenvalue_count > 0 && (int)sp.size() < cfg.eigenvalue_count)
        throw InsufficientModesError("audit: spectrum has fewer eigenvalues than configured");
    auto samples = partial_trace(sp, cfg.t_grid, cfg.tail_fraction);
    HeatTraceFit fit = fit_two_term(samples, 2, false);
    HeatTraceFit fit_log = fit_two_term(samples, 2, true);
    fit.convention = cfg.convention;
    auto [perim_est, curv_est] = invert_geometry(fit, 2, mu, cfg.convention);
    fit.perimeter_estimate = perim_est;
    fit.weighted_curvature_estimate = curv_est;
    auto [perim_log, curv_log] = invert_geometry(fit_log, 2, mu, cfg.convention);
    fit_log.perimeter_estimate = perim_log;
    fit_log.weighted_curvature_estimate = curv_log;

    report["fit"] = fit_report_json(fit, samples);
    report["fit_tlogt"] = fit_report_json(fit_log, samples);
    report["spectrum"] = spectrum_sidecar(sp);

    // mu adjudication on a disk domain: refit at 3*mu over the mu-scaled
    // grid (the trace identity trace(t; c*mu) = trace(c*t; mu) makes the
    // constant terms comparable there).
    double radius;
    if (domain_is_circle(df.domain, radius) && cfg.solver.method == "disk_modes") {
        const double mu2 = 3.0 * mu;
        Spectrum sp2 = disk_mode_spectrum(radius, mu2, cfg.solver.k_max);
        std::vector<double> scaled = cfg.t_grid;
        for (auto& t : scaled) t *= mu / mu2;
        auto samples2 = partial_trace(sp2, scaled, cfg.tail_fraction);
        HeatTraceFit fit2 = fit_two_term(samples2, 2, false);
        json adj;
        adj["a1_hat_mu"] = fit.a1_hat;
        adj["a1_hat_3mu"] = fit2.a1_hat;
        adj["difference"] = std::abs(fit.a1_hat - fit2.a1_hat);
        // paper convention predicts the curvature density scales with mu;
        // carried predicts a mu-free constant term in two dimensions.
        adj["matching_formula"] =
            std::abs(fit2.a1_hat - fit.a1_hat) < std::abs(fit2.a1_hat - 3.0 * fit.a1_hat)
                ? "carried"
                : "paper";
        report["mu_adjudication"] = adj;
    }

    json checks;
    const double a0_expected = a0_density(2, mu, cfg.convention) * perim_quad;
    checks["a0_rel_error"] = std::abs(fit.a0_hat - a0_expected) / a0_expected;
    checks["a0_pass"] = checks["a0_rel_error"].get<double>() <= cfg.tol_a0_rel;
    const double a1_symbol = cfg.convention == MuConvention::paper
                                 ? sym["a1"]["paper"].get<double>()
                                 : a1_closed;
    checks["a1_abs_error"] = std::abs(fit.a1_hat - a1_symbol);
    checks["a1_pass"] = checks["a1_abs_error"].get<double>() <= cfg.tol_a1_abs;
    checks["perimeter_rel_error"] = std::abs(perim_est - perim_quad) / perim_quad;
    checks["perimeter_pass"] =
        checks["perimeter_rel_error"].get<double>() <= cfg.tol_perimeter_rel;
    report["checks"] = checks;

    const bool ok = checks["a0_pass"].get<bool>() && checks["a1_pass"].get<bool>() &&
                    checks["perimeter_pass"].get<bool>();
    report["pass"] = ok;

    write_text(out_dir / "spectrum.csv", spectrum_to_csv(sp));
    write_json(out_dir / "audit.json", report);
    return ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Steklov spectra and heat-trace invariants of planar Stokes flow"};
    std::string config_path;
    std::string out_dir = ".";
    std::string convention_flag;
    int threads = 0;
    app.add_option("--config", config_path, "experiment config (JSON)")->required();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--convention", convention_flag, "mu convention override: paper|carried")
        ->check(CLI::IsMember({"paper", "carried"}));
    app.add_option("--threads", threads, "worker thread cap (0 = hardware)");
    CLI11_PARSE(app, argc, argv);

    try {
        ExperimentConfig cfg = load_config(config_path);
        if (convention_flag == "paper") cfg.convention = MuConvention::paper;
        if (convention_flag == "carried") cfg.convention = MuConvention::carried;
        set_max_threads(threads);

        DomainFile df = cfg.resolve_domain(fs::path(config_path).parent_path());
        fs::create_directories(out_dir);

        switch (cfg.command) {
            case Command::spectrum:
                return run_spectrum(cfg, df, out_dir);
            case Command::invariants:
                return run_invariants(cfg, df, out_dir);
            case Command::heat_fit:
                return run_heat_fit(cfg, df, out_dir);
            case Command::audit:
                return run_audit(cfg, df, out_dir);
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
