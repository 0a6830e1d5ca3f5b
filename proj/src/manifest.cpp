// manifest.cpp

#include "dephase/manifest.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>

namespace dephase::cli {

const std::vector<std::string>& task_names() {
    static const std::vector<std::string> names{"geometry", "chern",    "response",  "inverse_check",
                                                "dynamics", "sde",      "acceptance"};
    return names;
}

const std::vector<std::string>& model_names() {
    static const std::vector<std::string> names{"qubit", "oscillator", "landau", "random", "constant"};
    return names;
}

namespace {

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

std::string joined(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) out += (out.empty() ? "" : ", ") + s;
    return out;
}

json& object_at(json& parent, const std::string& key, const std::string& where) {
    if (!parent.contains(key)) parent[key] = json::object();
    json& j = parent[key];
    if (!j.is_object()) throw SchemaError(where + "." + key + ": expected an object");
    return j;
}

void check_keys(const json& obj, const std::vector<std::string>& allowed, const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!contains(allowed, it.key())) {
            throw SchemaError(where + ": unknown key '" + it.key() + "' (allowed: " + joined(allowed) + ")");
        }
    }
}

double number(json& obj, const std::string& key, double def, const std::string& where, double lo, bool lo_open,
              double hi = std::numeric_limits<double>::infinity()) {
    if (!obj.contains(key)) obj[key] = def;
    const json& v = obj[key];
    if (!v.is_number()) throw SchemaError(where + "." + key + ": expected a number");
    const double x = v.get<double>();
    if (!(lo_open ? x > lo : x >= lo) || !(x <= hi)) {
        std::ostringstream os;
        os << where << "." << key << ": value " << x << " outside " << (lo_open ? "(" : "[") << lo << ", " << hi
           << "]";
        throw SchemaError(os.str());
    }
    return x;
}

std::int64_t integer(json& obj, const std::string& key, std::int64_t def, const std::string& where,
                     std::int64_t lo) {
    if (!obj.contains(key)) obj[key] = def;
    const json& v = obj[key];
    if (!v.is_number_integer()) throw SchemaError(where + "." + key + ": expected an integer");
    const auto x = v.get<std::int64_t>();
    if (x < lo) throw SchemaError(where + "." + key + ": must be >= " + std::to_string(lo));
    return x;
}

bool boolean(json& obj, const std::string& key, bool def, const std::string& where) {
    if (!obj.contains(key)) obj[key] = def;
    if (!obj[key].is_boolean()) throw SchemaError(where + "." + key + ": expected true or false");
    return obj[key].get<bool>();
}

std::string choice(json& obj, const std::string& key, const std::string& def, const std::vector<std::string>& options,
                   const std::string& where) {
    if (!obj.contains(key)) obj[key] = def;
    if (!obj[key].is_string()) throw SchemaError(where + "." + key + ": expected a string");
    const auto s = obj[key].get<std::string>();
    if (!contains(options, s)) throw SchemaError(where + "." + key + ": '" + s + "' not one of " + joined(options));
    return s;
}

void number_list(json& obj, const std::string& key, const json& def, const std::string& where, double lo,
                 std::size_t min_len = 1) {
    if (!obj.contains(key)) obj[key] = def;
    const json& v = obj[key];
    if (!v.is_array() || v.size() < min_len) {
        throw SchemaError(where + "." + key + ": expected a list of at least " + std::to_string(min_len) + " numbers");
    }
    for (const json& x : v) {
        if (!x.is_number() || x.get<double>() < lo) {
            throw SchemaError(where + "." + key + ": entries must be numbers >= " + std::to_string(lo));
        }
    }
}

void int_list(json& obj, const std::string& key, const json& def, const std::string& where, std::int64_t lo,
              std::size_t len) {
    if (!obj.contains(key)) obj[key] = def;
    const json& v = obj[key];
    if (!v.is_array() || (len > 0 && v.size() != len)) {
        throw SchemaError(where + "." + key + ": expected a list of " + std::to_string(len) + " integers");
    }
    for (const json& x : v) {
        if (!x.is_number_integer() || x.get<std::int64_t>() < lo) {
            throw SchemaError(where + "." + key + ": entries must be integers >= " + std::to_string(lo));
        }
    }
}

std::uint64_t parse_seed(const std::string& text) {
    if (text.empty() || !std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        throw SchemaError("DEPHASE_SEED: expected a non-negative integer, got '" + text + "'");
    }
    try {
        return std::stoull(text);
    } catch (const std::exception&) {
        throw SchemaError("DEPHASE_SEED: value out of range");
    }
}

void resolve_model(json& m) {
    check_keys(m, {"name", "params"}, "model");
    const std::string name = choice(m, "name", "qubit", model_names(), "model");
    json& p = object_at(m, "params", "model");
    const std::string where = "model.params";
    if (name == "qubit") {
        check_keys(p, {"chart", "radius"}, where);
        choice(p, "chart", "spherical", {"spherical", "stereographic"}, where);
        number(p, "radius", 1.0, where, 0.0, true);
    } else if (name == "oscillator") {
        check_keys(p, {"cutoff"}, where);
        integer(p, "cutoff", 60, where, 2);
    } else if (name == "landau") {
        check_keys(p, {"tau", "flux", "theta_cutoff", "grid"}, where);
        if (!p.contains("tau")) p["tau"] = json::array({0.0, 1.0});
        const json& t = p["tau"];
        if (!t.is_array() || t.size() != 2 || !t[0].is_number() || !t[1].is_number() || !(t[1].get<double>() > 0.0)) {
            throw SchemaError(where + ".tau: expected [re, im] with im > 0");
        }
        integer(p, "flux", 1, where, 1);
        integer(p, "theta_cutoff", 10, where, 1);
        integer(p, "grid", 256, where, 4);
    } else if (name == "random") {
        check_keys(p, {"dim", "control_dim", "kind", "spacing", "coupling"}, where);
        integer(p, "dim", 4, where, 2);
        integer(p, "control_dim", 2, where, 1);
        choice(p, "kind", "generic", {"generic", "real_symmetric", "isospectral"}, where);
        number(p, "spacing", 1.0, where, 0.0, true);
        number(p, "coupling", 0.3, where, 0.0, false);
    } else {
        check_keys(p, {"energies", "control_dim"}, where);
        if (!p.contains("energies")) p["energies"] = json::array({0.0, 1.0});
        const json& e = p["energies"];
        if (!e.is_array() || e.empty() || !std::all_of(e.begin(), e.end(), [](const json& x) { return x.is_number(); })) {
            throw SchemaError(where + ".energies: expected a non-empty list of numbers");
        }
        integer(p, "control_dim", 2, where, 1);
    }
}

json default_control_grid(const std::string& task, const json& model) {
    const std::string name = model["name"];
    if (task == "chern") {
        if (name == "qubit") return json::array({32, 64});
        return json::array({24, 24});
    }
    if (name == "landau") return json::array({8, 8});
    return json::array({20, 20});
}

json default_gammas(const std::string& task) {
    if (task == "inverse_check") return json::array({0.0, 0.3, 1.0, 5.0, 20.0});
    if (task == "chern") return json::array({0.0, 1.0, 3.0});
    return json::array({0.0, 1.0});
}

void resolve_params(json& p, const std::string& task, const json& model) {
    const std::string where = "params";
    const double fd_default = model["name"] == "landau" ? 1e-4 : 1e-5;
    if (task == "geometry") {
        check_keys(p, {"derivative", "fd_step"}, where);
        choice(p, "derivative", "perturbative", {"perturbative", "finite_difference"}, where);
        number(p, "fd_step", fd_default, where, 0.0, true);
    } else if (task == "chern") {
        check_keys(p, {"quadrature"}, where);
        boolean(p, "quadrature", false, where);
    } else if (task == "response") {
        check_keys(p, {"route", "fd_step"}, where);
        const std::string def = model["name"] == "landau" ? "closed_form" : "spectral_sum";
        choice(p, "route", def, {"spectral_sum", "superop", "superop_vectorized", "closed_form"}, where);
        number(p, "fd_step", fd_default, where, 0.0, true);
    } else if (task == "inverse_check") {
        check_keys(p, {"fd_step"}, where);
        number(p, "fd_step", fd_default, where, 0.0, true);
    } else if (task == "dynamics") {
        check_keys(p, {"theta0", "gamma", "samples", "ramp_fraction"}, where);
        number(p, "theta0", 1.0, where, 0.0, true, 3.14159);
        number(p, "gamma", 1.0, where, 0.0, false);
        integer(p, "samples", 200, where, 1);
        number(p, "ramp_fraction", 0.1, where, 0.0, false, 0.5);
    } else if (task == "sde") {
        check_keys(p, {"h0", "rotation_rate", "bias", "variance", "dt", "t_final", "n_traj", "record_every"}, where);
        choice(p, "h0", "sigma_z", {"sigma_z", "rotating"}, where);
        number(p, "rotation_rate", 0.5, where, 0.0, false);
        number(p, "bias", 1.0, where, -std::numeric_limits<double>::infinity(), false);
        number(p, "variance", 0.2, where, 0.0, false);
        number(p, "dt", 1e-3, where, 0.0, true);
        number(p, "t_final", 1.0, where, 0.0, true);
        integer(p, "n_traj", 10000, where, 1);
        integer(p, "record_every", 10, where, 1);
    } else {
        check_keys(p, {"criteria", "enforce_budget"}, where);
        int_list(p, "criteria", json::array(), where, 1, 0);
        for (const json& c : p["criteria"]) {
            if (c.get<std::int64_t>() > 11) throw SchemaError("params.criteria: criteria are numbered 1 to 11");
        }
        boolean(p, "enforce_budget", true, where);
    }
}

}  // namespace

json read_manifest_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open manifest '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw SchemaError("manifest '" + path + "' is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw SchemaError("manifest root must be an object");
    return j;
}

void apply_override(json& raw, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw SchemaError("--set expects key=value, got '" + assignment + "'");
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;

    json* node = &raw;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) throw SchemaError("--set: empty key segment in '" + path + "'");
        if (!node->is_object()) throw SchemaError("--set: '" + path + "' descends into a non-object");
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        if (!node->contains(key)) (*node)[key] = json::object();
        node = &(*node)[key];
        start = dot + 1;
    }
}

json resolve_manifest(json raw, const ResolveInputs& in) {
    if (!raw.is_object()) throw SchemaError("manifest root must be an object");
    if (in.model) apply_override(raw, "model.name=\"" + *in.model + "\"");
    for (const auto& s : in.overrides) apply_override(raw, s);

    check_keys(raw, {"task", "model", "grids", "tolerances", "params", "seed", "output"}, "manifest");
    if (!in.task.empty()) raw["task"] = in.task;
    if (!raw.contains("task")) throw SchemaError("manifest: no task given");
    const std::string task = choice(raw, "task", "", task_names(), "manifest");

    json& model = object_at(raw, "model", "manifest");
    resolve_model(model);

    json& grids = object_at(raw, "grids", "manifest");
    check_keys(grids, {"control", "gamma", "epsilon"}, "grids");
    int_list(grids, "control", default_control_grid(task, model), "grids", 1, 2);
    number_list(grids, "gamma", default_gammas(task), "grids", 0.0);
    number_list(grids, "epsilon", json::array({1e-2, 3e-3, 1e-3}), "grids", 1e-12);
    for (const json& e : grids["epsilon"]) {
        if (!(e.get<double>() > 0.0)) throw SchemaError("grids.epsilon: entries must be positive");
    }

    json& tol = object_at(raw, "tolerances", "manifest");
    check_keys(tol, {"compatibility", "gap"}, "tolerances");
    number(tol, "compatibility", 1e-6, "tolerances", 0.0, true);
    number(tol, "gap", 1e-6, "tolerances", 0.0, true);

    json& params = object_at(raw, "params", "manifest");
    resolve_params(params, task, model);

    if (in.env_seed) {
        raw["seed"] = parse_seed(*in.env_seed);
    } else if (!raw.contains("seed")) {
        raw["seed"] = 20240611;
    }
    const json& seed = raw["seed"];
    const bool seed_ok = seed.is_number_unsigned() || (seed.is_number_integer() && seed.get<std::int64_t>() >= 0);
    if (!seed_ok) throw SchemaError("manifest.seed: expected a non-negative integer");
    raw["seed"] = seed.get<std::uint64_t>();

    json& out = object_at(raw, "output", "manifest");
    check_keys(out, {"path", "format"}, "output");
    const std::string fmt = choice(out, "format", "json", {"json", "csv"}, "output");
    if (!out.contains("path")) out["path"] = task + "." + fmt;
    if (!out["path"].is_string() || out["path"].get<std::string>().empty()) {
        throw SchemaError("output.path: expected a non-empty string");
    }
    return raw;
}

}  // namespace dephase::cli
