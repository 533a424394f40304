// fabsearch command line: signatures, indexing, search, simulation,
// leave-one-out evaluation and the HTTP service.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include "fabsearch/engine.hpp"
#include "fabsearch/error.hpp"
#include "fabsearch/evaluate.hpp"
#include "fabsearch/index.hpp"
#include "fabsearch/mesh_io.hpp"
#include "fabsearch/service.hpp"
#include "fabsearch/simulate.hpp"
#include "fabsearch/sph.hpp"

using namespace fabsearch;
namespace fs = std::filesystem;

namespace {

// Errors that mean "the input could not be parsed" exit with 2.
int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedFile:
    case ErrorCode::EmptyMesh:
    case ErrorCode::SchemaError:
    case ErrorCode::CorruptIndex:
      return 2;
    default: return 1;
  }
}

void add_signature_flags(CLI::App* cmd, SignatureParams& p) {
  cmd->add_option("--R", p.resolution, "voxel grid resolution")->check(CLI::Range(4, 512));
  cmd->add_option("--shells", p.n_shells, "number of concentric shells")->check(CLI::Range(1, 256));
  cmd->add_option("--freq", p.n_freq, "number of harmonic degrees")->check(CLI::Range(1, 128));
  cmd->add_flag("--normalize-amplitude", p.normalize_amplitude, "divide by occupied voxel count");
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

template <class T>
std::optional<T> parse_enum(const std::string& text, std::optional<T> (*parse)(std::string_view), const char* what) {
  if (text.empty()) return std::nullopt;
  auto v = parse(text);
  if (!v) throw Error(ErrorCode::SchemaError, std::string("unknown ") + what + " '" + text + "'");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"3D part search and manufacturer recommendation"};
  app.require_subcommand(1);

  SignatureParams params;

  // sign
  auto* sign = app.add_subcommand("sign", "compute the signature of one mesh");
  std::string sign_mesh, sign_out, sign_format = "auto";
  unsigned sign_id = 0;
  sign->add_option("mesh", sign_mesh, "STL or OFF file")->required();
  sign->add_option("-o,--out", sign_out, "output FSIG file")->required();
  sign->add_option("--format", sign_format, "auto, stl-binary, stl-ascii or off");
  sign->add_option("--id", sign_id, "part id stored in the file");
  add_signature_flags(sign, params);

  // index-build
  auto* build = app.add_subcommand("index-build", "index a directory of mesh + sidecar pairs");
  std::string build_dir, index_path;
  build->add_option("parts_dir", build_dir, "directory of <id>.stl / <id>.json pairs")->required()->check(CLI::ExistingDirectory);
  build->add_option("-o,--out,--index", index_path, "output FIDX file")->required();
  add_signature_flags(build, params);

  // query
  auto* query = app.add_subcommand("query", "rank manufacturers for a query mesh");
  std::string query_mesh, query_format = "auto", material_text, tolerance_text;
  std::size_t k = kDefaultK;
  std::size_t max_results = 0;
  bool as_json = false, timing = false;
  query->add_option("--index", index_path, "FIDX file")->required()->check(CLI::ExistingFile);
  query->add_option("mesh", query_mesh, "query mesh")->required();
  query->add_option("--format", query_format, "auto, stl-binary, stl-ascii or off");
  query->add_option("--material", material_text, "Metal or Nonmetal")->required();
  query->add_option("--tolerance", tolerance_text, "Standard, Medium or High")->required();
  query->add_option("--k", k, "neighbourhood size")->check(CLI::PositiveNumber);
  query->add_option("--max-results", max_results, "truncate the ranking");
  query->add_flag("--json", as_json, "print the JSON response document");
  query->add_flag("--timing", timing, "include timing in the JSON document");
  add_signature_flags(query, params);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "generate a simulated repository with ground truth");
  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  bool dump_default = false;
  simulate->add_option("--config", config_path, "simulation config JSON (default: desk-scale)")->check(CLI::ExistingFile);
  simulate->add_option("-o,--out", out_dir, "output directory");
  simulate->add_option("--seed", seed, "override the config seed");
  simulate->add_option("--index", index_path, "also write the FIDX index here");
  simulate->add_flag("--print-default-config", dump_default, "print the default config and exit");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "leave-one-out evaluation against ground truth");
  std::string truth_path, verdicts_path;
  bool strict = false, as_csv = false;
  evaluate->add_option("--index", index_path, "FIDX file")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--truth", truth_path, "ground_truth.csv")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--k", k, "neighbourhood size")->check(CLI::PositiveNumber);
  evaluate->add_option("--material", material_text, "evaluate only Metal or Nonmetal parts");
  evaluate->add_flag("--strict", strict, "count only strictly improved assignments");
  evaluate->add_flag("--csv", as_csv, "CSV instead of text tables");
  evaluate->add_option("--verdicts", verdicts_path, "write per-part verdicts CSV");

  // serve
  auto* serve = app.add_subcommand("serve", "HTTP JSON service over one index");
  std::string bind = "127.0.0.1:8080";
  std::size_t max_mesh_bytes = max_mesh_bytes_from_env();
  std::size_t max_k = 32;
  serve->add_option("--index", index_path, "FIDX file")->required()->check(CLI::ExistingFile);
  serve->add_option("--bind", bind, "host:port, port 0 picks a free one");
  serve->add_option("--max-mesh-bytes", max_mesh_bytes, "mesh upload cap")->check(CLI::PositiveNumber);
  serve->add_option("--max-k", max_k, "deepest k served from the precomputed graph")->check(CLI::PositiveNumber);
  add_signature_flags(serve, params);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "fabsearch: ERROR UsageError: %s\n", e.what());
    return 2;
  }

  try {
    if (*sign) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto format = parse_enum<MeshFormat>(sign_format, parse_mesh_format, "mesh format");
      const SphSignature sig = mesh_signature(load_mesh_file(sign_mesh, format.value_or(MeshFormat::Auto)), params);
      write_file(sign_out, encode_fsig(sig, sign_id));
      std::printf("signature %dx%d written to %s in %.1f ms\n", sig.n_shells, sig.n_freq, sign_out.c_str(), ms_since(t0));
    } else if (*build) {
      const auto t0 = std::chrono::steady_clock::now();
      const Repository repo = build_index_from_dir(build_dir, params);
      save_repository_file(repo, index_path);
      std::printf("indexed %zu parts into %s in %.1f ms\n", repo.size(), index_path.c_str(), ms_since(t0));
    } else if (*query) {
      QueryRequest req;
      req.mesh.path = query_mesh;
      req.mesh.format = parse_enum<MeshFormat>(query_format, parse_mesh_format, "mesh format").value_or(MeshFormat::Auto);
      req.requirements = {*parse_enum<MaterialClass>(material_text, parse_material_class, "material class"),
                          *parse_enum<ToleranceClass>(tolerance_text, parse_tolerance_class, "tolerance class")};
      req.k = k;
      if (max_results > 0) req.max_results = max_results;
      const SearchEngine engine(load_repository_file(index_path), params, k);
      const QueryResponse resp = engine.query(req, max_mesh_bytes_from_env());
      if (as_json)
        std::printf("%s\n", response_to_json(resp, timing).c_str());
      else
        std::printf("%s", response_to_text(resp).c_str());
    } else if (*simulate) {
      if (dump_default) {
        std::printf("%s\n", dump_simulation_config(default_desk_config()).c_str());
        return 0;
      }
      if (out_dir.empty()) throw Error(ErrorCode::InvalidParams, "simulate needs --out");
      SimulationConfig config = default_desk_config();
      if (!config_path.empty()) {
        const Bytes text = read_file(config_path);
        config = load_simulation_config({reinterpret_cast<const char*>(text.data()), text.size()});
      }
      if (seed) config.rng_seed = *seed;
      const auto t0 = std::chrono::steady_clock::now();
      const SimulationResult sim = build_simulated_repository(config);
      write_parts_dir((fs::path(out_dir) / "parts").string(), sim);
      write_file((fs::path(out_dir) / "ground_truth.csv").string(), as_bytes(dump_ground_truth(sim.truth)));
      write_file((fs::path(out_dir) / "config.json").string(), as_bytes(dump_simulation_config(config)));
      if (!index_path.empty()) save_repository_file(sim.repository, index_path);
      std::printf("simulated %zu parts into %s in %.1f ms\n", sim.repository.size(), out_dir.c_str(), ms_since(t0));
      std::printf("tolerance centroids %.6g %.6g %.6g, thresholds %.6g %.6g\n", sim.classing.centroids[0],
                  sim.classing.centroids[1], sim.classing.centroids[2], sim.classing.thresholds[0],
                  sim.classing.thresholds[1]);
    } else if (*evaluate) {
      EvaluationOptions options;
      options.k = k;
      options.strict = strict;
      options.material = parse_enum<MaterialClass>(material_text, parse_material_class, "material class");
      const Repository repo = load_repository_file(index_path);
      const Bytes csv = read_file(truth_path);
      const TruthTable truth(load_ground_truth({reinterpret_cast<const char*>(csv.data()), csv.size()}));
      const std::vector<Verdict> verdicts = evaluate_all(repo, truth, options);
      const EvaluationReport report = make_report(verdicts, options);
      std::printf("%s", (as_csv ? format_report_csv(report) : format_report_text(report)).c_str());
      if (!verdicts_path.empty()) write_file(verdicts_path, as_bytes(format_verdicts_csv(verdicts)));
    } else if (*serve) {
      const SearchEngine engine(load_repository_file(index_path), params, max_k);
      HttpService service(engine, max_mesh_bytes);
      const auto [host, port] = parse_bind_address(bind);
      const int bound = service.bind(host, port);
      std::printf("listening on %s:%d (%zu parts)\n", host.c_str(), bound, engine.repository().size());
      std::fflush(stdout);
      service.listen();
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "fabsearch: ERROR %s: %s\n", std::string(to_string(e.code())).c_str(), e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fabsearch: ERROR Internal: %s\n", e.what());
    return 1;
  }
  return 0;
}
