#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <json.hpp>
#include <random>
#include <unistd.h>

#include "fabsearch/engine.hpp"
#include "fabsearch/error.hpp"
#include "support.hpp"

using namespace fabsearch;
using namespace fabsearch::testing;
namespace fs = std::filesystem;

namespace {

SimulationConfig small_config() {
  SimulationConfig c = default_desk_config();
  for (FamilySpec& f : c.families) f.count = 6;
  c.signature = {16, 8, 8, false};
  return c;
}

const SimulationResult& small_sim() {
  static const SimulationResult sim = build_simulated_repository(small_config());
  return sim;
}

std::string b64(const std::string& s) { return base64_encode(as_bytes(s)); }

std::string box_request(const std::string& extra = "") {
  const Bytes stl = write_stl_binary(box_mesh({0, 0, 0}, {2, 3, 4}));
  return R"({"mesh":{"base64":")" + base64_encode(stl) + R"("},"material_class":"Metal","required_tolerance":"High")" +
         extra + "}";
}

fs::path temp_path(const std::string& name) {
  return fs::temp_directory_path() / ("fabsearch_engine_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST_SUITE("engine") {
  TEST_CASE("base64 matches the standard test vectors") {
    CHECK(b64("") == "");
    CHECK(b64("f") == "Zg==");
    CHECK(b64("fo") == "Zm8=");
    CHECK(b64("foo") == "Zm9v");
    CHECK(b64("foob") == "Zm9vYg==");
    CHECK(b64("fooba") == "Zm9vYmE=");
    CHECK(b64("foobar") == "Zm9vYmFy");
    const Bytes d = base64_decode("Zm9vYmE=");
    CHECK(std::string(d.begin(), d.end()) == "fooba");
  }

  TEST_CASE("base64 round-trips random bytes") {
    std::mt19937_64 rng(3);
    for (int n = 0; n < 200; ++n) {
      Bytes bytes(static_cast<std::size_t>(n));
      for (auto& b : bytes) b = static_cast<std::uint8_t>(rng());
      CHECK(base64_decode(base64_encode(bytes)) == bytes);
    }
  }

  TEST_CASE("base64 rejects malformed text") {
    for (const char* bad : {"Zm9", "Zm9v!A==", "Z===", "Zg==Zm9v", "Zm=v", "====", "Zg=A"}) {
      CAPTURE(bad);
      try {
        base64_decode(bad);
        FAIL("decoded");
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SchemaError);
      }
    }
  }

  TEST_CASE("query requests parse with defaults and case-insensitive enums") {
    const QueryRequest r = parse_query_request(R"({"mesh":{"path":"a.stl"},"material_class":"METAL","required_tolerance":"high"})");
    CHECK(r.mesh.path == "a.stl");
    CHECK_FALSE(r.mesh.base64);
    CHECK(r.mesh.format == MeshFormat::Auto);
    CHECK(r.requirements.material_class == MaterialClass::Metal);
    CHECK(r.requirements.required_tolerance == ToleranceClass::High);
    CHECK(r.k == 10);
    CHECK_FALSE(r.max_results);
    CHECK_FALSE(r.include_timing);

    const QueryRequest full = parse_query_request(
        R"({"mesh":{"base64":"Zm9v","format":"off"},"material_class":"Nonmetal","required_tolerance":"Medium",)"
        R"("k":4,"max_results":2,"include_timing":true})");
    CHECK(full.mesh.base64 == "Zm9v");
    CHECK(full.mesh.format == MeshFormat::Off);
    CHECK(full.k == 4);
    CHECK(full.max_results == 2u);
    CHECK(full.include_timing);
    const QueryRequest again = parse_query_request(dump_query_request(full));
    CHECK(again.mesh.base64 == full.mesh.base64);
    CHECK(again.mesh.format == full.mesh.format);
    CHECK(again.requirements == full.requirements);
    CHECK(again.k == full.k);
    CHECK(again.max_results == full.max_results);
    CHECK(again.include_timing);
  }

  TEST_CASE("invalid query requests raise SchemaError") {
    const char* mesh = R"("mesh":{"path":"a.stl"})";
    const std::string enums = R"("material_class":"Metal","required_tolerance":"High")";
    const std::vector<std::string> bad = {
        "not json",
        "[]",
        "{" + enums + "}",
        R"({"mesh":{"path":"a","base64":"Zm9v"},)" + enums + "}",
        R"({"mesh":{},)" + enums + "}",
        std::string("{") + mesh + R"(,"material_class":"Wood","required_tolerance":"High"})",
        std::string("{") + mesh + R"(,"material_class":"Metal","required_tolerance":"Tight"})",
        std::string("{") + mesh + R"(,"material_class":"Metal"})",
        std::string("{") + mesh + "," + enums + R"(,"k":0})",
        std::string("{") + mesh + "," + enums + R"(,"k":"10"})",
        std::string("{") + mesh + "," + enums + R"(,"k":2.5})",
        std::string("{") + mesh + "," + enums + R"(,"max_results":-1})",
        std::string("{") + mesh + "," + enums + R"(,"include_timing":1})",
        R"({"mesh":{"path":"a","format":"step"},)" + enums + "}",
    };
    for (const std::string& doc : bad) {
      CAPTURE(doc);
      try {
        parse_query_request(doc);
        FAIL("parsed");
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SchemaError);
      }
    }
  }

  TEST_CASE("request meshes load from base64 and from path, within the cap") {
    const TriangleMesh box = box_mesh({0, 0, 0}, {2, 3, 4});
    const Bytes stl = write_stl_binary(box);
    const TriangleMesh direct = load_mesh(stl);

    MeshSource inline_src;
    inline_src.base64 = base64_encode(stl);
    CHECK(load_request_mesh(inline_src, stl.size()).triangles == direct.triangles);
    CHECK(load_request_mesh(inline_src, stl.size()).vertices == direct.vertices);

    const fs::path path = temp_path("box.stl");
    write_file(path.string(), stl);
    MeshSource file_src;
    file_src.path = path.string();
    CHECK(load_request_mesh(file_src, stl.size()).vertices == direct.vertices);

    for (const MeshSource& src : {inline_src, file_src}) {
      try {
        load_request_mesh(src, stl.size() - 1);
        FAIL("accepted oversized mesh");
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::PayloadTooLarge);
      }
    }
    fs::remove(path);

    try {
      load_request_mesh(file_src, stl.size());
      FAIL("read missing file");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::IoError);
    }
  }

  TEST_CASE("engine results equal the library pipeline") {
    const SimulationResult& sim = small_sim();
    const SignatureParams params = small_config().signature;
    const SearchEngine engine(sim.repository, params, 4);
    std::mt19937_64 rng(11);
    for (int q = 0; q < 12; ++q) {
      const std::size_t i = rng() % sim.meshes.size();
      const std::size_t k = 1 + rng() % 8;  // some above max_k
      const QueryRequirements req{MaterialClass::Metal, static_cast<ToleranceClass>(rng() % 3)};
      CAPTURE(i);
      CAPTURE(k);
      const SphSignature sig = mesh_signature(sim.meshes[i], params);
      const Neighborhood n = query_neighborhood(sim.repository, sig, k);
      const QueryResponse r = engine.query(sim.meshes[i], req, k);
      CHECK(r.ranking == rank_manufacturers(n, sim.repository, req));
      REQUIRE(r.neighborhood.size() == n.members.size());
      for (std::size_t j = 0; j < n.members.size(); ++j) {
        CHECK(r.neighborhood[j].id == n.members[j].id);
        CHECK(r.neighborhood[j].distance == n.members[j].distance);
        CHECK(r.neighborhood[j].direction == n.members[j].direction);
        const PartMeta& meta = sim.repository.get(n.members[j].id).meta;
        CHECK(r.neighborhood[j].manufacturer_id == meta.manufacturer_id);
        CHECK(r.neighborhood[j].tolerance_class == meta.tolerance_class);
      }
      CHECK(response_to_json(engine.query(sig, req, k)) == response_to_json(r));
    }
  }

  TEST_CASE("max_results keeps a prefix of the ranking") {
    const SimulationResult& sim = small_sim();
    const SearchEngine engine(sim.repository, small_config().signature);
    const QueryRequirements req{MaterialClass::Metal, ToleranceClass::Standard};
    const QueryResponse full = engine.query(sim.meshes[0], req, 10);
    REQUIRE(full.ranking.entries.size() >= 2);
    const QueryResponse cut = engine.query(sim.meshes[0], req, 10, 1);
    REQUIRE(cut.ranking.entries.size() == 1);
    CHECK(cut.ranking.entries[0] == full.ranking.entries[0]);
    CHECK(cut.neighborhood == full.neighborhood);
    CHECK(engine.query(sim.meshes[0], req, 10, 100).ranking == full.ranking);
  }

  TEST_CASE("a nonmetal query on an all-metal index is empty") {
    const SimulationResult& sim = small_sim();
    const SearchEngine engine(sim.repository, small_config().signature);
    const QueryResponse r = engine.query(sim.meshes[3], {MaterialClass::Nonmetal, ToleranceClass::Standard}, 10);
    CHECK(r.ranking.status == RankingStatus::EmptyNeighborhood);
    CHECK(r.ranking.entries.empty());
    CHECK_FALSE(r.neighborhood.empty());
  }

  TEST_CASE("signature dimensions must match the index") {
    const SimulationResult& sim = small_sim();
    const SearchEngine engine(sim.repository, {16, 4, 4, false});
    try {
      engine.query(sim.meshes[0], {}, 5);
      FAIL("accepted mismatched dimensions");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DimensionMismatch);
    }
  }

  TEST_CASE("response JSON layout") {
    const SimulationResult& sim = small_sim();
    const SearchEngine engine(sim.repository, small_config().signature);
    const QueryRequest req = parse_query_request(box_request(R"(,"k":3)"));
    const QueryResponse r = engine.query(req);
    const auto doc = nlohmann::json::parse(response_to_json(r));
    CHECK(doc.at("status") == "ok");
    CHECK(doc.at("k") == 3);
    CHECK(doc.at("requirements").at("required_tolerance") == "High");
    CHECK_FALSE(doc.contains("timing"));
    double sum = 0;
    bool any_satisfied = false;
    for (const auto& e : doc.at("ranking")) {
      sum += e.at("posterior").get<double>();
      any_satisfied |= e.at("tolerance_satisfied").get<bool>();
    }
    CHECK(sum == doctest::Approx(any_satisfied ? 1.0 : 0.0).epsilon(1e-12));
    for (const auto& m : doc.at("neighborhood")) {
      CHECK(m.at("part_id").get<std::string>().size() == 8);
      CHECK(parse_part_id(m.at("part_id").get<std::string>()));
    }
    const auto timed = nlohmann::json::parse(response_to_json(r, true));
    CHECK(timed.at("timing").at("signature_ms").get<double>() >= 0.0);
    CHECK(timed.at("timing").at("search_ms").get<double>() >= 0.0);
    CHECK(response_to_json(engine.query(req)) == response_to_json(r));
  }

  TEST_CASE("manufacturer summary counts parts per manufacturer") {
    const SimulationResult& sim = small_sim();
    const SearchEngine engine(sim.repository, small_config().signature);
    std::size_t total = 0;
    std::string prev;
    for (const auto& m : engine.manufacturers()) {
      CHECK(m.id > prev);
      prev = m.id;
      total += m.parts;
      CHECK(m.processes.size() == 1);
    }
    CHECK(total == sim.repository.size());
  }

  TEST_CASE("parts directory round-trips into the simulated repository") {
    const SimulationResult& sim = small_sim();
    const fs::path dir = temp_path("parts");
    fs::remove_all(dir);
    write_parts_dir(dir.string(), sim);
    const Repository rebuilt = build_index_from_dir(dir.string(), small_config().signature);
    CHECK(rebuilt == sim.repository);

    fs::remove(dir / (format_part_id(sim.repository[0].id()) + ".stl"));
    try {
      build_index_from_dir(dir.string(), small_config().signature);
      FAIL("indexed a sidecar without a mesh");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::IoError);
    }
    fs::remove_all(dir);
  }
}
