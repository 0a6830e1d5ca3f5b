// tasks.cpp

#include "dephase/tasks.hpp"

#include "dephase/acceptance.hpp"
#include "dephase/dynamics.hpp"
#include "dephase/models.hpp"
#include "dephase/response.hpp"
#include "dephase/version.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <unistd.h>

namespace dephase::cli {

// ------------------------------------------------------------- writers ----

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

void dump_into(const json& j, std::string& out, int depth) {
    const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
    const std::string close_pad(static_cast<std::size_t>(2 * depth), ' ');
    switch (j.type()) {
    case json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) out += ",\n";
            first = false;
            out += pad + json(it.key()).dump() + ": ";
            dump_into(it.value(), out, depth + 1);
        }
        out += "\n" + close_pad + "}";
        return;
    }
    case json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        out += "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i) out += ",\n";
            out += pad;
            dump_into(j[i], out, depth + 1);
        }
        out += "\n" + close_pad + "]";
        return;
    }
    case json::value_t::number_float: {
        const double v = j.get<double>();
        out += std::isfinite(v) ? format_double(v) : "null";
        return;
    }
    default:
        out += j.dump();
    }
}

}  // namespace

std::string dump_json(const json& j) {
    std::string out;
    dump_into(j, out, 0);
    out += "\n";
    return out;
}

void write_atomic(const std::filesystem::path& target, const std::string& content) {
    namespace fs = std::filesystem;
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw std::runtime_error("cannot rename onto '" + target.string() + "': " + ec.message());
    }
}

namespace {

constexpr double pi = std::numbers::pi;

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json to_json(const rmat& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) r.push_back(m(i, k));
        rows.push_back(r);
    }
    return rows;
}

json to_json(const rvec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

class Csv {
public:
    explicit Csv(const std::vector<std::string>& header) {
        for (std::size_t i = 0; i < header.size(); ++i) text_ += (i ? "," : "") + header[i];
        text_ += "\n";
    }
    Csv& num(double v) { return cell(format_double(v)); }
    Csv& str(const std::string& s) { return cell(s); }
    void end_row() {
        text_ += row_ + "\n";
        row_.clear();
        first_ = true;
    }
    const std::string& text() const { return text_; }

private:
    Csv& cell(const std::string& s) {
        row_ += (first_ ? "" : ",") + s;
        first_ = false;
        return *this;
    }
    std::string text_, row_;
    bool first_{true};
};

// ------------------------------------------------------------- models ----

struct Model {
    std::string name;
    std::optional<HamiltonianFamily> ham;
    std::optional<StateFamily> states;
    std::vector<std::string> coords;
    bool spherical_qubit{false};

    int control_dim() const { return ham ? ham->control_dim : states->control_dim; }
    ManifoldKind manifold() const { return ham ? ham->manifold : states->manifold; }
    const rvec& lower() const { return ham ? ham->domain_lower : states->domain_lower; }
    const rvec& upper() const { return ham ? ham->domain_upper : states->domain_upper; }
};

Model build_model(const json& manifest) {
    const json& m = manifest["model"];
    const json& p = m["params"];
    Model out;
    out.name = m["name"];
    if (out.name == "qubit") {
        if (p["chart"] == "spherical") {
            out.ham = qubit_spherical(p["radius"].get<double>());
            out.coords = {"theta", "alpha"};
            out.spherical_qubit = true;
        } else {
            out.ham = qubit_stereographic();
            out.coords = {"x", "y"};
        }
    } else if (out.name == "oscillator") {
        out.ham = OscillatorModel(p["cutoff"].get<int>()).family();
        out.coords = {"zeta", "mu"};
    } else if (out.name == "landau") {
        LandauModel lm;
        lm.tau = cplx(p["tau"][0].get<double>(), p["tau"][1].get<double>());
        lm.flux = p["flux"].get<int>();
        lm.theta_cutoff = p["theta_cutoff"].get<int>();
        lm.grid = p["grid"].get<int>();
        out.states = landau_family(lm);
        out.coords = {"phi_1", "phi_2"};
    } else if (out.name == "random") {
        RandomFamilyOptions o;
        o.hilbert_dim = p["dim"].get<int>();
        o.control_dim = p["control_dim"].get<int>();
        o.seed = manifest["seed"].get<std::uint64_t>();
        const std::string kind = p["kind"];
        o.kind = kind == "generic" ? RandomKind::generic
                                   : kind == "real_symmetric" ? RandomKind::real_symmetric : RandomKind::isospectral;
        o.spacing = p["spacing"].get<double>();
        o.coupling = p["coupling"].get<double>();
        out.ham = random_family(o);
    } else {
        const auto e = p["energies"].get<std::vector<double>>();
        cmat H0 = cmat::Zero(static_cast<Eigen::Index>(e.size()), static_cast<Eigen::Index>(e.size()));
        for (std::size_t i = 0; i < e.size(); ++i) H0(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = e[i];
        out.ham = constant_family(H0, p["control_dim"].get<int>());
    }
    if (out.coords.empty() || out.control_dim() != 2) {
        out.coords.clear();
        for (int i = 0; i < out.control_dim(); ++i) out.coords.push_back("phi_" + std::to_string(i + 1));
    }
    return out;
}

void require_two_parameters(const Model& m, const std::string& task) {
    if (m.control_dim() != 2) {
        throw SchemaError("task " + task + " needs a two-parameter family; model has " +
                          std::to_string(m.control_dim()));
    }
}

std::vector<ControlPoint> cell_centres(const Model& m, const json& manifest) {
    const int n1 = manifest["grids"]["control"][0], n2 = manifest["grids"]["control"][1];
    const rvec lo = m.lower(), hi = m.upper();
    std::vector<ControlPoint> pts;
    for (int i = 0; i < n1; ++i) {
        for (int j = 0; j < n2; ++j) {
            ControlPoint p(2);
            p << lo[0] + (hi[0] - lo[0]) * (i + 0.5) / n1, lo[1] + (hi[1] - lo[1]) * (j + 0.5) / n2;
            pts.push_back(p);
        }
    }
    return pts;
}

SpectralData spectral_at(const Model& m, const ControlPoint& p, const json& manifest) {
    const json& params = manifest["params"];
    const double fd_step = params.value("fd_step", m.states ? 1e-4 : 1e-5);
    if (m.states) return bundle_spectral_data(*m.states, p, fd_step);
    DerivativeOptions opts;
    opts.gap_tol = manifest["tolerances"]["gap"].get<double>();
    opts.fd_step = fd_step;
    if (params.value("derivative", std::string("perturbative")) == "finite_difference") {
        opts.method = DerivativeMethod::finite_difference;
    }
    return projection_derivatives(*m.ham, p, opts);
}

std::vector<double> doubles(const json& a) { return a.get<std::vector<double>>(); }

// -------------------------------------------------------------- tasks ----

struct Produced {
    json result;
    std::optional<std::string> csv;
    int exit_code{0};
    json timing;  // nondeterministic, kept with the provenance
};

Produced task_geometry(const json& manifest) {
    const Model m = build_model(manifest);
    require_two_parameters(m, "geometry");
    const double tol = manifest["tolerances"]["compatibility"];
    Csv csv({m.coords[0], m.coords[1], "g_11", "g_12", "g_22", "omega_12", "compat_residual", "det_gap",
             "closed_form_error"});
    json points = json::array();
    double worst_closed = 0.0;
    for (const ControlPoint& p : cell_centres(m, manifest)) {
        const GeometricTensor gt = geometric_tensor(spectral_at(m, p, manifest));
        json row{{"point", to_json(p)}, {"g", to_json(gt.g)}, {"omega", to_json(gt.omega)}};
        double residual = std::nan(""), det_gap = std::nan(""), closed = std::nan("");
        try {
            const CompatibilityReport c = compatibility(gt, tol);
            residual = c.residual;
            det_gap = c.det_gap;
            row["compatibility"] = {{"residual", c.residual}, {"det_gap", c.det_gap}, {"compatible", c.compatible}};
        } catch (const NumericalError& e) {
            row["compatibility"] = {{"error", e.what()}};
        }
        if (m.spherical_qubit) {
            const GeometricTensor ex = qubit_closed_form_geometry(p[0], p[1]);
            closed = std::max((gt.g - ex.g).cwiseAbs().maxCoeff(), (gt.omega - ex.omega).cwiseAbs().maxCoeff());
            worst_closed = std::max(worst_closed, closed);
            row["closed_form_error"] = closed;
        }
        csv.num(p[0]).num(p[1]).num(gt.g(0, 0)).num(gt.g(0, 1)).num(gt.g(1, 1)).num(gt.omega(0, 1));
        csv.num(residual).num(det_gap).num(closed);
        csv.end_row();
        points.push_back(row);
    }
    json result{{"coordinates", m.coords}, {"points", points}};
    if (m.spherical_qubit) result["max_closed_form_error"] = worst_closed;
    return {result, csv.text(), 0, json()};
}

Produced task_chern(const json& manifest) {
    const Model m = build_model(manifest);
    require_two_parameters(m, "chern");
    const ChernGrid grid{manifest["grids"]["control"][0].get<int>(), manifest["grids"]["control"][1].get<int>()};
    const auto gammas = doubles(manifest["grids"]["gamma"]);
    const ChernResult c = m.ham ? chern_number(*m.ham, grid, manifest["params"]["quadrature"].get<bool>())
                                : chern_number(*m.states, grid);
    const SweepTable sweep =
        m.ham ? conductance_sweep(*m.ham, [](double g) { return DephasingSpec::single_rate(g); }, gammas, grid)
              : conductance_sweep(*m.states, gammas, grid);
    json rows = json::array();
    Csv csv({"gamma", "value", "expected", "chern", "float"});
    for (const SweepRow& r : sweep.rows) {
        const double expected = c.chern / (1.0 + r.gamma * r.gamma);
        rows.push_back({{"gamma", r.gamma}, {"value", r.value}, {"expected", expected}});
        csv.num(r.gamma).num(r.value).num(expected).str(std::to_string(c.chern)).num(c.value);
        csv.end_row();
    }
    json result{{"chern", c.chern},
                {"float", c.value},
                {"deviation", c.deviation},
                {"grid", {c.n1, c.n2}},
                {"curvature_integral", sweep.curvature_integral},
                {"sweep", rows}};
    if (c.quadrature_value) result["quadrature"] = *c.quadrature_value;
    return {result, csv.text(), 0, json()};
}

Produced task_response(const json& manifest) {
    const Model m = build_model(manifest);
    require_two_parameters(m, "response");
    const std::string route = manifest["params"]["route"];
    if (m.states && route != "closed_form") {
        throw SchemaError("model " + m.name + " is a state bundle; only the closed_form route applies");
    }
    const auto gammas = doubles(manifest["grids"]["gamma"]);
    Csv csv({m.coords[0], m.coords[1], "gamma", "f_11", "f_12", "f_21", "f_22", "route"});
    json rows = json::array();
    for (const ControlPoint& p : cell_centres(m, manifest)) {
        const SpectralData spec = spectral_at(m, p, manifest);
        const GeometricTensor gt = geometric_tensor(spec);
        for (double gamma : gammas) {
            const DephasingSpec deph = DephasingSpec::single_rate(gamma);
            ResponseMatrix r;
            if (route == "spectral_sum") r = response_spectral_sum(spec, deph);
            else if (route == "superop") r = response_superop(spec, deph, false);
            else if (route == "superop_vectorized") r = response_superop(spec, deph, true);
            else r = response_closed_form(gt, gamma);
            rows.push_back({{"point", to_json(p)}, {"gamma", gamma}, {"f", to_json(r.f)}, {"route", to_string(r.route)}});
            csv.num(p[0]).num(p[1]).num(gamma).num(r.f(0, 0)).num(r.f(0, 1)).num(r.f(1, 0)).num(r.f(1, 1));
            csv.str(to_string(r.route));
            csv.end_row();
        }
    }
    return {json{{"coordinates", m.coords}, {"rows", rows}}, csv.text(), 0, json()};
}

Produced task_inverse_check(const json& manifest) {
    const Model m = build_model(manifest);
    require_two_parameters(m, "inverse_check");
    const auto gammas = doubles(manifest["grids"]["gamma"]);
    const double tol = manifest["tolerances"]["compatibility"];
    Csv csv({m.coords[0], m.coords[1], "gamma", "antisym_error", "sym_error", "relative_antisym_error",
             "compatible"});
    json points = json::array();
    double worst = 0.0;
    for (const ControlPoint& p : cell_centres(m, manifest)) {
        const InverseResponseReport rep = inverse_response_check(geometric_tensor(spectral_at(m, p, manifest)),
                                                                 gammas, tol);
        const double scale = rep.omega_inverse.norm();
        json rows = json::array();
        for (const auto& row : rep.rows) {
            worst = std::max(worst, row.antisym_error / scale);
            rows.push_back({{"gamma", row.gamma}, {"antisym_error", row.antisym_error}, {"sym_error", row.sym_error}});
            csv.num(p[0]).num(p[1]).num(row.gamma).num(row.antisym_error).num(row.sym_error);
            csv.num(row.antisym_error / scale).str(rep.compat.compatible ? "true" : "false");
            csv.end_row();
        }
        points.push_back({{"point", to_json(p)},
                          {"compatible", rep.compat.compatible},
                          {"compat_residual", rep.compat.residual},
                          {"antisym_variation", rep.antisym_variation},
                          {"rows", rows}});
    }
    return {json{{"points", points}, {"max_relative_antisym_error", worst}}, csv.text(), 0, json()};
}

Produced task_dynamics(const json& manifest) {
    const Model m = build_model(manifest);
    if (!m.spherical_qubit) throw SchemaError("task dynamics runs the latitude protocol of the spherical qubit");
    const json& p = manifest["params"];
    const double theta0 = p["theta0"], gamma = p["gamma"];
    Protocol protocol;
    protocol.ramp_fraction = p["ramp_fraction"];
    protocol.path = [theta0](double s) {
        ControlPoint x(2);
        x << theta0, 2.0 * pi * s;
        return x;
    };
    protocol.tangent = [](double) {
        ControlPoint d(2);
        d << 0.0, 2.0 * pi;
        return d;
    };
    ExtractionOptions eo;
    eo.driven = 1;
    eo.samples = p["samples"].get<std::size_t>();
    const ExtractionReport rep =
        extract_response(*m.ham, DephasingSpec::single_rate(gamma), protocol, doubles(manifest["grids"]["epsilon"]), eo);
    json runs = json::array();
    Csv csv({"epsilon", "measured_f_12", "measured_f_22", "predicted_f_12", "predicted_f_22", "relative_error"});
    for (const ExtractionRun& r : rep.runs) {
        runs.push_back({{"epsilon", r.epsilon},
                        {"measured", to_json(r.measured)},
                        {"predicted", to_json(r.predicted)},
                        {"relative_error", r.relative_error},
                        {"valid_samples", r.valid_samples},
                        {"undefined_samples", r.undefined_samples},
                        {"trace_drift", r.trace_drift}});
        csv.num(r.epsilon).num(r.measured[0]).num(r.measured[1]).num(r.predicted[0]).num(r.predicted[1]);
        csv.num(r.relative_error);
        csv.end_row();
    }
    return {json{{"driven", "alpha"}, {"runs", runs}, {"error_decreasing", rep.error_decreasing}}, csv.text(), 0,
            json()};
}

Produced task_sde(const json& manifest) {
    const json& p = manifest["params"];
    SdeConfig cfg;
    if (p["h0"] == "sigma_z") {
        const cmat sz = pauli_z();
        cfg.h0 = [sz](double) { return sz; };
    } else {
        const double rate = p["rotation_rate"];
        cfg.h0 = [rate](double t) {
            const double th = 1.0, a = rate * t;
            return cmat(std::sin(th) * std::cos(a) * pauli_x() + std::sin(th) * std::sin(a) * pauli_y() +
                        std::cos(th) * pauli_z());
        };
    }
    cfg.bias = p["bias"];
    cfg.variance = p["variance"];
    cfg.dt = p["dt"];
    cfg.t_final = p["t_final"];
    cfg.n_traj = p["n_traj"].get<std::size_t>();
    cfg.record_every = p["record_every"].get<std::size_t>();
    cfg.seed = manifest["seed"].get<std::uint64_t>();
    const cmat rho0 = cmat::Constant(2, 2, 0.5);
    const SdeResult res = evolve_sde_ensemble(cfg, rho0);

    MasterOptions mo;
    mo.t_final = cfg.t_final;
    mo.dt = cfg.dt;
    mo.record_every = cfg.record_every;
    const Trajectory lind = integrate_master(sde_mean_generator(cfg), rho0, mo);
    if (lind.states.size() != res.mean.size()) {
        throw NumericalError("sde: ensemble and Lindblad records are misaligned; make t_final a multiple of dt");
    }
    Csv csv({"t", "abs_rho01_ensemble", "abs_rho01_lindblad", "trace_distance"});
    json rows = json::array();
    double worst = 0.0;
    for (std::size_t i = 0; i < res.mean.size(); ++i) {
        const double d = trace_distance(res.mean[i], lind.states[i]);
        worst = std::max(worst, d);
        const double a = std::abs(res.mean[i](0, 1)), b = std::abs(lind.states[i](0, 1));
        rows.push_back({{"t", res.times[i]}, {"abs_rho01_ensemble", a}, {"abs_rho01_lindblad", b}, {"trace_distance", d}});
        csv.num(res.times[i]).num(a).num(b).num(d);
        csv.end_row();
    }
    json result{{"rows", rows},
                {"max_trace_distance", worst},
                {"max_trace_drift", res.max_trace_drift},
                {"warnings", res.warnings}};
    return {result, csv.text(), 0, json()};
}

Produced task_acceptance(const json& manifest, std::ostream* log) {
    AcceptanceOptions opts;
    opts.seed = manifest["seed"].get<std::uint64_t>();
    opts.enforce_budget = manifest["params"]["enforce_budget"];
    for (const json& c : manifest["params"]["criteria"]) opts.only.push_back(c.get<int>());
    json criteria = json::array(), timing = json::array();
    Csv csv({"id", "name", "passed", "seconds"});
    bool all = true;
    for (int id = 1; id <= acceptance_criteria_count; ++id) {
        if (!opts.only.empty() && std::find(opts.only.begin(), opts.only.end(), id) == opts.only.end()) continue;
        const CriterionResult r = run_criterion(id, opts);
        if (log) *log << format_line(r) << std::endl;
        all = all && r.passed;
        criteria.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"budget_seconds", r.budget_seconds}});
        timing.push_back({{"id", r.id}, {"seconds", r.seconds}, {"detail", r.detail}});
        csv.str(std::to_string(r.id)).str(r.name).str(r.passed ? "true" : "false").num(r.seconds);
        csv.end_row();
    }
    return {json{{"criteria", criteria}, {"all_passed", all}}, csv.text(), all ? 0 : 1, timing};
}

}  // namespace

TaskOutcome run_task(const json& manifest, const TaskContext& ctx) {
    const std::string task = manifest.at("task");
    Produced produced;
    if (task == "geometry") produced = task_geometry(manifest);
    else if (task == "chern") produced = task_chern(manifest);
    else if (task == "response") produced = task_response(manifest);
    else if (task == "inverse_check") produced = task_inverse_check(manifest);
    else if (task == "dynamics") produced = task_dynamics(manifest);
    else if (task == "sde") produced = task_sde(manifest);
    else if (task == "acceptance") produced = task_acceptance(manifest, ctx.log);
    else throw SchemaError("unknown task '" + task + "'");

    json provenance{{"manifest", manifest},
                    {"version", library_version},
                    {"seed", manifest["seed"]},
                    {"timestamp", ctx.timestamp.empty() ? utc_now() : ctx.timestamp}};
    if (!produced.timing.is_null()) provenance["timing"] = produced.timing;

    TaskOutcome out;
    out.exit_code = produced.exit_code;
    out.result = produced.result;
    const std::filesystem::path target = ctx.out_dir / manifest["output"]["path"].get<std::string>();
    if (manifest["output"]["format"] == "csv") {
        write_atomic(target, *produced.csv);
        const std::filesystem::path side = target.string() + ".provenance.json";
        write_atomic(side, dump_json(json{{"provenance", provenance}}));
        out.files = {target, side};
    } else {
        write_atomic(target, dump_json(json{{"task", task}, {"result", produced.result}, {"provenance", provenance}}));
        out.files = {target};
    }
    return out;
}

}  // namespace dephase::cli
