#include "doctest.h"

#include "dephase/manifest.hpp"
#include "dephase/tasks.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace dephase::cli;
namespace fs = std::filesystem;

namespace {

json base(const std::string& task, const std::string& model = "qubit") {
    return json{{"task", task}, {"model", {{"name", model}}}};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("dephase_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("resolution fills every default in") {
    const json m = resolve_manifest(base("chern"), {});
    CHECK(m["seed"].get<std::uint64_t>() == 20240611u);
    CHECK(m["grids"]["control"] == json::array({32, 64}));
    CHECK(m["grids"]["gamma"] == json::array({0.0, 1.0, 3.0}));
    CHECK(m["model"]["params"]["chart"] == "spherical");
    CHECK(m["tolerances"]["compatibility"].get<double>() == 1e-6);
    CHECK(m["output"]["path"] == "chern.json");

    const json l = resolve_manifest(base("geometry", "landau"), {});
    CHECK(l["model"]["params"]["tau"] == json::array({0.0, 1.0}));
    CHECK(l["params"]["fd_step"].get<double>() == 1e-4);
    CHECK(l["grids"]["control"] == json::array({8, 8}));
    // resolving twice is idempotent
    CHECK(resolve_manifest(l, {}) == l);
}

TEST_CASE("unknown keys and malformed values are schema errors") {
    json m = base("geometry");
    m["model"]["params"]["colour"] = "red";
    CHECK_THROWS_AS(resolve_manifest(m, {}), SchemaError);
    json top = base("geometry");
    top["extra"] = 1;
    CHECK_THROWS_AS(resolve_manifest(top, {}), SchemaError);
    CHECK_THROWS_AS(resolve_manifest(base("teleport"), {}), SchemaError);
    CHECK_THROWS_AS(resolve_manifest(base("geometry", "graphene"), {}), SchemaError);
    json neg = base("response");
    neg["grids"] = {{"gamma", {1.0, -1.0}}};
    CHECK_THROWS_AS(resolve_manifest(neg, {}), SchemaError);
    json fmt = base("response");
    fmt["output"] = {{"format", "xml"}};
    CHECK_THROWS_AS(resolve_manifest(fmt, {}), SchemaError);
    CHECK_THROWS_AS(resolve_manifest(json::array(), {}), SchemaError);
}

TEST_CASE("command-line overrides and the seed environment variable") {
    ResolveInputs in;
    in.task = "response";
    in.overrides = {"model.params.radius=2.5", "grids.gamma=[0.5]", "output.format=csv"};
    const json m = resolve_manifest(base("geometry"), in);
    CHECK(m["task"] == "response");
    CHECK(m["model"]["params"]["radius"].get<double>() == 2.5);
    CHECK(m["grids"]["gamma"] == json::array({0.5}));
    CHECK(m["output"]["path"] == "response.csv");

    ResolveInputs bad;
    bad.overrides = {"model.params.radius=-1"};
    CHECK_THROWS_AS(resolve_manifest(base("geometry"), bad), SchemaError);
    bad.overrides = {"no_equals_sign"};
    CHECK_THROWS_AS(resolve_manifest(base("geometry"), bad), SchemaError);

    ResolveInputs env;
    env.env_seed = "99";
    CHECK(resolve_manifest(base("geometry"), env)["seed"].get<std::uint64_t>() == 99u);
    env.env_seed = "-3";
    CHECK_THROWS_AS(resolve_manifest(base("geometry"), env), SchemaError);

    ResolveInputs shorthand;
    shorthand.model = "oscillator";
    CHECK(resolve_manifest(base("geometry"), shorthand)["model"]["params"]["cutoff"] == 60);
}

TEST_CASE("JSON writer: sorted keys, 17 digits, null for non-finite") {
    const json j{{"b", 0.1}, {"a", std::numeric_limits<double>::quiet_NaN()}, {"c", 1.0 / 3.0}};
    const std::string s = dump_json(j);
    CHECK(s.find("\"a\"") < s.find("\"b\""));
    CHECK(s.find("0.10000000000000001") != std::string::npos);
    CHECK(s.find("0.33333333333333331") != std::string::npos);
    CHECK(s.find("null") != std::string::npos);
    CHECK(json::parse(s)["c"].get<double>() == 1.0 / 3.0);
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("atomic writes leave no temporary behind") {
    const fs::path dir = scratch("atomic");
    write_atomic(dir / "a.txt", "one");
    write_atomic(dir / "a.txt", "two");
    CHECK(slurp(dir / "a.txt") == "two");
    CHECK(std::distance(fs::directory_iterator(dir), fs::directory_iterator{}) == 1);
}

TEST_CASE("geometry task output is deterministic for a fixed timestamp") {
    const fs::path dir = scratch("geometry");
    json raw = base("geometry");
    raw["grids"] = {{"control", {3, 4}}};
    const json m = resolve_manifest(raw, {});
    TaskContext ctx;
    ctx.out_dir = dir;
    ctx.timestamp = "2000-01-01T00:00:00Z";
    const TaskOutcome a = run_task(m, ctx);
    REQUIRE(a.files.size() == 1);
    const std::string first = slurp(a.files.front());
    run_task(m, ctx);
    CHECK(slurp(a.files.front()) == first);

    const json doc = json::parse(first);
    CHECK(doc["task"] == "geometry");
    CHECK(doc["provenance"]["manifest"] == m);
    CHECK(doc["provenance"]["seed"] == m["seed"]);
    CHECK(doc["provenance"]["timestamp"] == ctx.timestamp);
    CHECK(doc["provenance"].contains("version"));
}

TEST_CASE("response task writes CSV with a provenance sidecar") {
    const fs::path dir = scratch("response");
    ResolveInputs in;
    in.overrides = {"output.format=csv", "grids.control=[2,3]", "grids.gamma=[0,1]"};
    const json m = resolve_manifest(base("response"), in);
    TaskContext ctx;
    ctx.out_dir = dir;
    const TaskOutcome o = run_task(m, ctx);
    CHECK(o.exit_code == 0);
    const std::string csv = slurp(dir / "response.csv");
    CHECK(csv.rfind("theta,alpha,gamma,f_11,f_12,f_21,f_22,route\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 3 * 2);
    CHECK(fs::exists(dir / "response.csv.provenance.json"));
}

TEST_CASE("models that cannot serve a task are schema errors") {
    const fs::path dir = scratch("refuse");
    TaskContext ctx;
    ctx.out_dir = dir;
    ResolveInputs in;
    in.overrides = {"params.route=superop"};
    CHECK_THROWS_AS(run_task(resolve_manifest(base("response", "landau"), in), ctx), SchemaError);
    CHECK_THROWS_AS(run_task(resolve_manifest(base("dynamics", "oscillator"), {}), ctx), SchemaError);
}
