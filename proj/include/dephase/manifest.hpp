// manifest.hpp: run manifests for the batch front end.
//
// A manifest is a JSON object
//   { "task", "model": {"name", "params"}, "grids": {"control", "gamma", "epsilon"},
//     "tolerances": {"compatibility", "gap"}, "params": {...task specific...},
//     "seed", "output": {"path", "format"} }
// Unknown keys are rejected at every level. Resolution fills every default in,
// so the resolved object is a complete record of what was run.

#pragma once

#include "json.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dephase::cli {

using json = nlohmann::json;

class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

const std::vector<std::string>& task_names();
const std::vector<std::string>& model_names();

// Parse errors and non-object roots raise SchemaError.
json read_manifest_file(const std::string& path);

// "a.b.c=value": value is parsed as JSON when it parses, else taken as a string.
void apply_override(json& raw, const std::string& assignment);

struct ResolveInputs {
    std::string task;                       // positional task; empty keeps the manifest's
    std::optional<std::string> model;       // --model shorthand for model.name
    std::vector<std::string> overrides;     // --set assignments, applied in order
    std::optional<std::string> env_seed;    // DEPHASE_SEED
};

json resolve_manifest(json raw, const ResolveInputs& in);

}  // namespace dephase::cli
