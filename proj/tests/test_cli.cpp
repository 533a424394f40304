#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "fabsearch/engine.hpp"
#include "fabsearch/evaluate.hpp"
#include "fabsearch/index.hpp"
#include "fabsearch/simulate.hpp"
#include "fabsearch/sph.hpp"

using namespace fabsearch;
namespace fs = std::filesystem;

namespace {

struct Run {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  const Bytes b = read_file(p.string());
  return {b.begin(), b.end()};
}

struct ScratchDir {
  fs::path path;
  ScratchDir() : path(fs::temp_directory_path() / ("fabsearch_cli_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

fs::path work_dir() {
  static const ScratchDir dir;
  return dir.path;
}

Run run(const std::string& args) {
  const fs::path out = work_dir() / "stdout.txt", err = work_dir() / "stderr.txt";
  const std::string cmd = std::string(FABSEARCH_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

// Small simulated repository written through the CLI once for the suite.
struct Pipeline {
  fs::path dir, index, config;
  bool ok = false;
};

const Pipeline& pipeline() {
  static const Pipeline p = [] {
    Pipeline out;
    out.dir = work_dir() / "sim";
    out.index = work_dir() / "built.fidx";
    out.config = work_dir() / "small.json";
    SimulationConfig c = default_desk_config();
    for (FamilySpec& f : c.families) f.count = 8;
    c.signature = {16, 8, 8, false};
    write_file(out.config.string(), as_bytes(dump_simulation_config(c)));
    const Run sim = run("simulate --config " + q(out.config) + " -o " + q(out.dir));
    const Run build = run("index-build " + q(out.dir / "parts") + " -o " + q(out.index) + " --R 16 --shells 8 --freq 8");
    out.ok = sim.exit_code == 0 && build.exit_code == 0;
    return out;
  }();
  return p;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("sign matches the library signature byte for byte") {
    SimulationConfig c = default_desk_config();
    for (FamilySpec& f : c.families) f.count = 1;
    const SimulationResult sim = build_simulated_repository(c);
    for (std::size_t i = 0; i < sim.meshes.size(); ++i) {
      const fs::path mesh = work_dir() / ("m" + std::to_string(i) + ".stl");
      const fs::path sig = work_dir() / ("m" + std::to_string(i) + ".fsig");
      write_file(mesh.string(), write_stl_binary(sim.meshes[i]));
      const Run r = run("sign " + q(mesh) + " -o " + q(sig) + " --R 32 --id 7");
      REQUIRE(r.exit_code == 0);
      CHECK(r.out.find("16x16") != std::string::npos);
      CHECK(read_file(sig.string()) == encode_fsig(mesh_signature(load_mesh_file(mesh.string())), 7));
    }
  }

  TEST_CASE("a truncated STL exits 2 with the error prefix") {
    const fs::path mesh = work_dir() / "trunc.stl";
    Bytes stl = write_stl_binary(TriangleMesh{{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}}});
    stl.resize(stl.size() - 10);
    write_file(mesh.string(), stl);
    const Run r = run("sign " + q(mesh) + " -o " + q(work_dir() / "x.fsig"));
    CHECK(r.exit_code == 2);
    CHECK(r.err.rfind("fabsearch: ERROR MalformedFile:", 0) == 0);
    CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
  }

  TEST_CASE("usage and runtime errors") {
    CHECK(run("").exit_code == 2);
    CHECK(run("query --index").exit_code == 2);
    const Run missing = run("sign " + q(work_dir() / "nope.stl") + " -o " + q(work_dir() / "x.fsig"));
    CHECK(missing.exit_code == 1);
    CHECK(missing.err.rfind("fabsearch: ERROR IoError:", 0) == 0);
    const fs::path bad_index = work_dir() / "bad.fidx";
    write_file(bad_index.string(), as_bytes("FIDXgarbage"));
    const Run corrupt = run("evaluate --index " + q(bad_index) + " --truth " + q(bad_index));
    CHECK(corrupt.exit_code == 2);
    CHECK(corrupt.err.rfind("fabsearch: ERROR CorruptIndex:", 0) == 0);
  }

  TEST_CASE("simulate, index-build and evaluate compose end to end") {
    const Pipeline& p = pipeline();
    REQUIRE(p.ok);
    CHECK(fs::exists(p.dir / "ground_truth.csv"));
    CHECK(fs::exists(p.dir / "config.json"));
    const SimulationResult sim = build_simulated_repository(load_simulation_config(slurp(p.config)));
    CHECK(load_repository_file(p.index.string()) == sim.repository);

    const Run text = run("evaluate --index " + q(p.index) + " --truth " + q(p.dir / "ground_truth.csv") + " --k 5");
    REQUIRE(text.exit_code == 0);
    CHECK(text.out.find("Metric 1") != std::string::npos);
    CHECK(text.out.find("Metric 2") != std::string::npos);

    const fs::path verdicts = work_dir() / "verdicts.csv";
    const Run csv = run("evaluate --index " + q(p.index) + " --truth " + q(p.dir / "ground_truth.csv") +
                        " --k 5 --csv --strict --verdicts " + q(verdicts));
    REQUIRE(csv.exit_code == 0);
    EvaluationOptions opts;
    opts.k = 5;
    opts.strict = true;
    const auto lib = evaluate_all(sim.repository, TruthTable(sim.truth), opts);
    CHECK(csv.out == format_report_csv(make_report(lib, opts)));
    CHECK(slurp(verdicts) == format_verdicts_csv(lib));
  }

  TEST_CASE("query prints the library ranking") {
    const Pipeline& p = pipeline();
    REQUIRE(p.ok);
    const Repository repo = load_repository_file(p.index.string());
    const SearchEngine engine(repo, {16, 8, 8, false});
    const fs::path mesh = p.dir / "parts" / (format_part_id(repo[3].id()) + ".stl");
    const std::string args = "query --index " + q(p.index) + " " + q(mesh) +
                             " --tolerance HIGH --material METAL --R 16 --shells 8 --freq 8 --k 6";
    const Run json_run = run(args + " --json");
    REQUIRE(json_run.exit_code == 0);
    const QueryResponse lib = engine.query(load_mesh_file(mesh.string()), {MaterialClass::Metal, ToleranceClass::High}, 6);
    CHECK(json_run.out == response_to_json(lib) + "\n");
    const Run text_run = run(args);
    REQUIRE(text_run.exit_code == 0);
    CHECK(text_run.out == response_to_text(lib));
  }
}
