#include "steklov/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace steklov {

namespace {

std::vector<std::array<double, 2>> parse_pairs(const json& arr, const std::string& field) {
    if (!arr.is_array()) throw ConfigError("field '" + field + "' must be an array of [a, b] pairs");
    std::vector<std::array<double, 2>> out;
    for (const auto& e : arr) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
            throw ConfigError("field '" + field + "' must contain [number, number] pairs");
        out.push_back({e[0].get<double>(), e[1].get<double>()});
    }
    if (out.empty()) throw ConfigError("field '" + field + "' must not be empty");
    return out;
}

json pairs_to_json(const FourierSeries& f) {
    json arr = json::array();
    for (int m = 0; m < f.modes(); ++m) arr.push_back({f.cos_coeffs[m], f.sin_coeffs[m]});
    return arr;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v,
                                   std::chars_format::general, 17);
    (void)ec;
    return std::string(buf, ptr);
}

DomainFile parse_domain_json(const json& j) {
    DomainFile out;
    if (!j.contains("x_coeffs")) throw ConfigError("domain: missing field 'x_coeffs'");
    if (!j.contains("y_coeffs")) throw ConfigError("domain: missing field 'y_coeffs'");
    out.domain.x = FourierSeries::from_pairs(parse_pairs(j["x_coeffs"], "x_coeffs"));
    out.domain.y = FourierSeries::from_pairs(parse_pairs(j["y_coeffs"], "y_coeffs"));
    out.domain.label = j.value("label", std::string("unnamed"));
    if (j.contains("quad_points")) {
        if (!j["quad_points"].is_number_integer() || j["quad_points"].get<int>() < 16)
            throw ConfigError("domain: field 'quad_points' must be an integer >= 16");
        out.domain.quad_points = j["quad_points"].get<int>();
    }
    if (!j.contains("mu")) throw ConfigError("domain: missing field 'mu'");
    const auto& mu = j["mu"];
    if (mu.is_number()) {
        const double v = mu.get<double>();
        if (v <= 0.0) throw ConfigError("domain: field 'mu' must be positive");
        out.viscosity = ViscositySpec::constant(v);
    } else if (mu.is_object()) {
        if (!mu.contains("trace_coeffs"))
            throw ConfigError("domain: variable 'mu' needs field 'trace_coeffs'");
        out.viscosity.trace =
            FourierSeries::from_pairs(parse_pairs(mu["trace_coeffs"], "mu.trace_coeffs"));
        if (mu.contains("normal_deriv_coeffs"))
            out.viscosity.normal_deriv = FourierSeries::from_pairs(
                parse_pairs(mu["normal_deriv_coeffs"], "mu.normal_deriv_coeffs"));
        else
            out.viscosity.normal_deriv = FourierSeries::constant(0.0);
    } else {
        throw ConfigError("domain: field 'mu' must be a number or an object");
    }
    out.domain.validate();
    out.viscosity.validate(out.domain);
    return out;
}

DomainFile load_domain_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open domain file '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("domain file '" + path.string() + "': " + e.what());
    }
    return parse_domain_json(j);
}

json domain_to_json(const PlanarDomain& domain, const ViscositySpec& visc) {
    json j;
    j["label"] = domain.label;
    j["x_coeffs"] = pairs_to_json(domain.x);
    j["y_coeffs"] = pairs_to_json(domain.y);
    if (visc.is_constant()) {
        j["mu"] = visc.trace.cos_coeffs[0];
    } else {
        j["mu"] = {{"trace_coeffs", pairs_to_json(visc.trace)},
                   {"normal_deriv_coeffs", pairs_to_json(visc.normal_deriv)}};
    }
    j["quad_points"] = domain.quad_points;
    return j;
}

std::string spectrum_to_csv(const Spectrum& sp) {
    std::ostringstream os;
    os << "index,lambda,multiplicity_hint,mode_tag,solver\n";
    for (std::size_t i = 0; i < sp.size(); ++i) {
        os << i << "," << format_double(sp.lambdas[i]) << "," << sp.multiplicity_hints[i] << ","
           << sp.mode_tags[i] << "," << sp.solver << "\n";
    }
    return os.str();
}

json spectrum_sidecar(const Spectrum& sp) {
    json j;
    j["solver"] = sp.solver;
    j["count"] = sp.size();
    j["zero_modes"] = sp.zero_modes;
    j["zero_threshold"] = sp.zero_threshold;
    json diag = json::object();
    for (const auto& [k, v] : sp.diagnostics) diag[k] = v;
    j["diagnostics"] = diag;
    return j;
}

json fit_report_json(const HeatTraceFit& fit, const std::vector<HeatTraceSample>& samples) {
    json j;
    j["a0_hat"] = fit.a0_hat;
    j["a1_hat"] = fit.a1_hat;
    if (fit.tlogt_coeff) j["tlogt_coeff"] = *fit.tlogt_coeff;
    j["residual"] = fit.residual_norm;
    j["condition"] = fit.condition;
    j["t_grid"] = fit.t_grid;
    if (fit.perimeter_estimate) j["perimeter_est"] = *fit.perimeter_estimate;
    if (fit.weighted_curvature_estimate) j["curvature_est"] = *fit.weighted_curvature_estimate;
    j["convention"] = fit.convention == MuConvention::carried ? "carried" : "paper";
    json samps = json::array();
    for (const auto& s : samples) {
        samps.push_back({{"t", s.t},
                         {"partial_sum", s.partial_sum},
                         {"tail_bound", s.tail_bound},
                         {"terms", s.terms_used},
                         {"usable", s.usable}});
    }
    j["samples"] = samps;
    return j;
}

DomainFile ExperimentConfig::resolve_domain(const std::filesystem::path& config_dir) const {
    DomainFile df;
    if (inline_domain)
        df = *inline_domain;
    else if (domain_file) {
        std::filesystem::path p = *domain_file;
        if (p.is_relative()) p = config_dir / p;
        df = load_domain_file(p);
    } else {
        throw ConfigError("config: one of 'domain' or 'domain_file' is required");
    }
    if (mu_override > 0.0) df.viscosity = ViscositySpec::constant(mu_override);
    return df;
}

ExperimentConfig parse_config(const json& j) {
    ExperimentConfig cfg;
    if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
    if (!j.contains("schema_version") || !j["schema_version"].is_number_integer())
        throw ConfigError("config: missing integer field 'schema_version'");
    cfg.schema_version = j["schema_version"].get<int>();
    if (cfg.schema_version != 1)
        throw ConfigError("config: unsupported schema_version " +
                          std::to_string(cfg.schema_version));

    if (!j.contains("command") || !j["command"].is_string())
        throw ConfigError("config: missing string field 'command'");
    const std::string cmd = j["command"].get<std::string>();
    if (cmd == "spectrum")
        cfg.command = Command::spectrum;
    else if (cmd == "invariants")
        cfg.command = Command::invariants;
    else if (cmd == "heat-fit")
        cfg.command = Command::heat_fit;
    else if (cmd == "audit")
        cfg.command = Command::audit;
    else
        throw ConfigError("config: field 'command' must be one of spectrum|invariants|heat-fit|audit");

    if (j.contains("deterministic") && j["deterministic"].is_boolean() &&
        !j["deterministic"].get<bool>())
        throw ConfigError("config: field 'deterministic' must be true; no randomness is available");

    if (j.contains("domain_file")) {
        if (!j["domain_file"].is_string())
            throw ConfigError("config: field 'domain_file' must be a string path");
        cfg.domain_file = j["domain_file"].get<std::string>();
    }
    if (j.contains("domain")) cfg.inline_domain = parse_domain_json(j["domain"]);

    if (j.contains("mu")) {
        if (!j["mu"].is_number() || j["mu"].get<double>() <= 0.0)
            throw ConfigError("config: field 'mu' must be a positive number");
        cfg.mu_override = j["mu"].get<double>();
    }

    if (j.contains("solver")) {
        const auto& s = j["solver"];
        if (!s.is_object()) throw ConfigError("config: field 'solver' must be an object");
        cfg.solver.method = s.value("method", std::string("disk_modes"));
        if (cfg.solver.method != "disk_modes" && cfg.solver.method != "galerkin_poly" &&
            cfg.solver.method != "mfs")
            throw ConfigError("config: solver.method must be disk_modes|galerkin_poly|mfs");
        if (s.contains("k_max")) {
            if (!s["k_max"].is_number_integer() || s["k_max"].get<int>() < 1)
                throw ConfigError("config: solver.k_max must be a positive integer");
            cfg.solver.k_max = s["k_max"].get<int>();
        }
        if (s.contains("radius")) {
            if (!s["radius"].is_number() || s["radius"].get<double>() <= 0.0)
                throw ConfigError("config: solver.radius must be positive");
            cfg.solver.radius = s["radius"].get<double>();
        }
        if (s.contains("degree")) {
            if (!s["degree"].is_number_integer() || s["degree"].get<int>() < 1 ||
                s["degree"].get<int>() > 20)
                throw ConfigError("config: solver.degree must lie in [1, 20]");
            cfg.solver.degree = s["degree"].get<int>();
        }
        if (s.contains("n_sources")) {
            if (!s["n_sources"].is_number_integer() || s["n_sources"].get<int>() < 4)
                throw ConfigError("config: solver.n_sources must be an integer >= 4");
            cfg.solver.mfs.n_sources = s["n_sources"].get<int>();
        }
        if (s.contains("offset")) {
            const double v = s["offset"].is_number() ? s["offset"].get<double>() : -1.0;
            if (v <= 0.0 || v >= 1.0)
                throw ConfigError("config: solver.offset must lie in (0, 1)");
            cfg.solver.mfs.offset = v;
        }
        if (s.contains("sv_threshold")) cfg.solver.mfs.sv_threshold = s["sv_threshold"].get<double>();
        if (s.contains("junk_floor")) cfg.solver.mfs.junk_floor = s["junk_floor"].get<double>();
        if (s.contains("lambda_cap")) cfg.solver.mfs.lambda_cap = s["lambda_cap"].get<double>();
    }

    if (j.contains("t_grid")) {
        const auto& t = j["t_grid"];
        if (t.is_array()) {
            for (const auto& v : t) {
                if (!v.is_number() || v.get<double>() <= 0.0)
                    throw ConfigError("config: t_grid entries must be positive numbers");
                cfg.t_grid.push_back(v.get<double>());
            }
        } else if (t.is_object()) {
            if (!t.contains("min") || !t.contains("max") || !t.contains("count"))
                throw ConfigError("config: t_grid object needs fields min, max, count");
            try {
                cfg.t_grid = log_grid(t["min"].get<double>(), t["max"].get<double>(),
                                      t["count"].get<int>());
            } catch (const ConfigError& e) {
                throw ConfigError("config: field 't_grid': " + std::string(e.what()));
            }
        } else {
            throw ConfigError("config: field 't_grid' must be an array or {min,max,count}");
        }
    } else {
        cfg.t_grid = log_grid(0.02, 0.2, 12);
    }

    if (j.contains("tail_fraction")) {
        if (!j["tail_fraction"].is_number() || j["tail_fraction"].get<double>() <= 0.0)
            throw ConfigError("config: field 'tail_fraction' must be positive");
        cfg.tail_fraction = j["tail_fraction"].get<double>();
    }
    if (j.contains("include_tlogt")) {
        if (!j["include_tlogt"].is_boolean())
            throw ConfigError("config: field 'include_tlogt' must be a boolean");
        cfg.include_tlogt = j["include_tlogt"].get<bool>();
    }
    if (j.contains("convention")) {
        const std::string c = j["convention"].is_string() ? j["convention"].get<std::string>() : "";
        if (c == "carried")
            cfg.convention = MuConvention::carried;
        else if (c == "paper")
            cfg.convention = MuConvention::paper;
        else
            throw ConfigError("config: field 'convention' must be 'paper' or 'carried'");
    }
    if (j.contains("index_convention")) {
        const std::string c =
            j["index_convention"].is_string() ? j["index_convention"].get<std::string>() : "";
        if (c == "strict")
            cfg.index_convention = IndexConvention::strict;
        else if (c == "mirrored")
            cfg.index_convention = IndexConvention::mirrored;
        else
            throw ConfigError("config: field 'index_convention' must be 'strict' or 'mirrored'");
    }
    if (j.contains("eigenvalue_count")) {
        if (!j["eigenvalue_count"].is_number_integer() || j["eigenvalue_count"].get<int>() < 0)
            throw ConfigError("config: field 'eigenvalue_count' must be a nonnegative integer");
        cfg.eigenvalue_count = j["eigenvalue_count"].get<int>();
    }
    if (j.contains("pipeline_check")) {
        if (!j["pipeline_check"].is_boolean())
            throw ConfigError("config: field 'pipeline_check' must be a boolean");
        cfg.run_pipeline_check = j["pipeline_check"].get<bool>();
    }
    if (j.contains("tolerances")) {
        const auto& t = j["tolerances"];
        if (!t.is_object()) throw ConfigError("config: field 'tolerances' must be an object");
        cfg.tol_a0_rel = t.value("a0_rel", cfg.tol_a0_rel);
        cfg.tol_a1_abs = t.value("a1_abs", cfg.tol_a1_abs);
        cfg.tol_perimeter_rel = t.value("perimeter_rel", cfg.tol_perimeter_rel);
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("config '" + path.string() + "': " + e.what());
    }
    return parse_config(j);
}

}  // namespace steklov
