// tasks.hpp: execution of resolved manifests and deterministic output writers.

#pragma once

#include "dephase/manifest.hpp"

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace dephase::cli {

// Two-space indented JSON with sorted keys; doubles printed with 17 significant
// digits, non-finite doubles as null.
std::string dump_json(const json& j);

// %.17g; "nan" / "inf" / "-inf" for non-finite values.
std::string format_double(double v);

// Writes to a temporary sibling, then renames over the target.
void write_atomic(const std::filesystem::path& target, const std::string& content);

struct TaskContext {
    std::filesystem::path out_dir{"."};
    std::ostream* log{nullptr};
    std::string timestamp;  // empty: current UTC time
};

struct TaskOutcome {
    int exit_code{0};  // 0, or 1 when an acceptance criterion fails
    json result;
    std::vector<std::filesystem::path> files;
};

// Expects a manifest from resolve_manifest. Throws SchemaError for requests the
// chosen model cannot serve and NumericalError / std::invalid_argument when a
// numerical precondition fails.
TaskOutcome run_task(const json& manifest, const TaskContext& ctx = {});

}  // namespace dephase::cli
