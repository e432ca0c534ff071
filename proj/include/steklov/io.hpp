#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"

#include "steklov/eigensolver.hpp"
#include "steklov/geometry.hpp"
#include "steklov/heattrace.hpp"
#include "steklov/symbols.hpp"

namespace steklov {

using json = nlohmann::json;

// Domain files: {label, x_coeffs: [[cos, sin], ...], y_coeffs: [...],
// mu: number | {trace_coeffs: [...], normal_deriv_coeffs: [...]}}.
struct DomainFile {
    PlanarDomain domain;
    ViscositySpec viscosity;
};

DomainFile parse_domain_json(const json& j);
DomainFile load_domain_file(const std::filesystem::path& path);
json domain_to_json(const PlanarDomain& domain, const ViscositySpec& visc);

// Spectrum files: CSV `index,lambda,multiplicity_hint,mode_tag,solver` plus a
// JSON sidecar holding discretization parameters and diagnostics.
std::string spectrum_to_csv(const Spectrum& sp);
json spectrum_sidecar(const Spectrum& sp);

json fit_report_json(const HeatTraceFit& fit, const std::vector<HeatTraceSample>& samples);

// ---- experiment configuration ----

enum class Command { spectrum, invariants, heat_fit, audit };

struct SolverConfig {
    std::string method = "disk_modes";  // disk_modes | galerkin_poly | mfs
    int k_max = 256;
    double radius = 1.0;
    int degree = 12;
    MfsOptions mfs;
};

struct ExperimentConfig {
    int schema_version = 1;
    Command command = Command::spectrum;
    std::optional<std::string> domain_file;   // path, relative to config dir
    std::optional<DomainFile> inline_domain;  // alternative to domain_file
    SolverConfig solver;
    double mu_override = -1.0;  // <= 0: use the domain file's viscosity
    std::vector<double> t_grid;
    double tail_fraction = 1e-8;
    bool include_tlogt = false;
    MuConvention convention = MuConvention::carried;
    IndexConvention index_convention = IndexConvention::strict;
    int eigenvalue_count = 0;  // 0: no explicit requirement
    bool run_pipeline_check = false;
    // audit tolerances
    double tol_a0_rel = 0.01;
    double tol_a1_abs = 0.15;
    double tol_perimeter_rel = 0.02;

    DomainFile resolve_domain(const std::filesystem::path& config_dir) const;
};

// Throws ConfigError naming the offending field.
ExperimentConfig parse_config(const json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

std::string format_double(double v);  // shortest round-trip formatting

}  // namespace steklov
