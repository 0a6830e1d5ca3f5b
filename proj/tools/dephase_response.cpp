// dephase-response: batch front end for manifest-driven runs.
//
//   dephase-response <task> --manifest FILE [--set k=v]... [--threads N] [--out DIR]
//
// Exit codes: 0 success, 1 acceptance failure, 2 schema or usage error,
// 3 numerical precondition failure.

#include "dephase/manifest.hpp"
#include "dephase/operator_core.hpp"
#include "dephase/parallel.hpp"
#include "dephase/tasks.hpp"
#include "dephase/version.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <iostream>

namespace cli = dephase::cli;

int main(int argc, char** argv) {
    CLI::App app{"Adiabatic response of dephasing Lindbladians", "dephase-response"};
    app.set_version_flag("--version", dephase::library_version);

    std::string task, manifest_path, model, out_dir = ".";
    std::vector<std::string> overrides;
    unsigned threads = 0;
    app.add_option("task", task, "Task to run")->required()->check(CLI::IsMember(cli::task_names()));
    app.add_option("--manifest", manifest_path, "Run manifest (JSON)")->required();
    app.add_option("--set", overrides, "Override a manifest entry, key.path=value")->take_all();
    app.add_option("--model", model, "Shorthand for --set model.name=NAME");
    app.add_option("--threads", threads, "Cap on worker threads (0: hardware concurrency)");
    app.add_option("--out", out_dir, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        dephase::set_default_threads(threads);
        cli::ResolveInputs in;
        in.task = task;
        if (!model.empty()) in.model = model;
        in.overrides = overrides;
        if (const char* seed = std::getenv("DEPHASE_SEED")) in.env_seed = seed;
        const cli::json manifest = cli::resolve_manifest(cli::read_manifest_file(manifest_path), in);

        cli::TaskContext ctx;
        ctx.out_dir = out_dir;
        ctx.log = &std::cout;
        const cli::TaskOutcome outcome = cli::run_task(manifest, ctx);
        for (const auto& f : outcome.files) std::cout << "wrote " << f.string() << "\n";
        return outcome.exit_code;
    } catch (const cli::SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return 2;
    } catch (const dephase::NumericalError& e) {
        std::cerr << "numerical precondition failed: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "numerical precondition failed: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
