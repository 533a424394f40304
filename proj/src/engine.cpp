#include "fabsearch/engine.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <json.hpp>
#include <map>
#include <set>

#include "fabsearch/error.hpp"

namespace fabsearch {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::size_t max_mesh_bytes_from_env() {
  const char* v = std::getenv("FABSEARCH_MAX_MESH_BYTES");
  if (!v || !*v) return kDefaultMaxMeshBytes;
  char* end = nullptr;
  const unsigned long long n = std::strtoull(v, &end, 10);
  if (*end != '\0' || n == 0) return kDefaultMaxMeshBytes;
  return static_cast<std::size_t>(n);
}

// ---- base64 ----

namespace {
constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(ByteView bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  for (std::size_t i = 0; i < bytes.size(); i += 3) {
    const std::size_t n = std::min<std::size_t>(3, bytes.size() - i);
    std::uint32_t v = static_cast<std::uint32_t>(bytes[i]) << 16;
    if (n > 1) v |= static_cast<std::uint32_t>(bytes[i + 1]) << 8;
    if (n > 2) v |= bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += n > 1 ? kAlphabet[(v >> 6) & 63] : '=';
    out += n > 2 ? kAlphabet[v & 63] : '=';
  }
  return out;
}

Bytes base64_decode(std::string_view text) {
  static const std::array<int, 256> table = [] {
    std::array<int, 256> t{};
    t.fill(-1);
    for (int i = 0; i < 64; ++i) t[static_cast<unsigned char>(kAlphabet[i])] = i;
    return t;
  }();
  auto bad = [] { throw Error(ErrorCode::SchemaError, "mesh.base64 is not valid base64"); };
  if (text.size() % 4 != 0) bad();
  Bytes out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    const bool last = i + 4 == text.size();
    int pad = 0;
    std::uint32_t v = 0;
    for (std::size_t j = 0; j < 4; ++j) {
      const char c = text[i + j];
      if (c == '=' && last && j >= 2) {
        ++pad;
        v <<= 6;
        continue;
      }
      const int d = table[static_cast<unsigned char>(c)];
      if (d < 0 || pad) bad();
      v = (v << 6) | static_cast<std::uint32_t>(d);
    }
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

// ---- requests ----

namespace {

[[noreturn]] void request_error(const std::string& what) { throw Error(ErrorCode::SchemaError, what); }

const ojson* member(const ojson& doc, const char* key) {
  auto it = doc.find(key);
  return it == doc.end() || it->is_null() ? nullptr : &*it;
}

std::string text_member(const ojson& doc, const char* key) {
  const ojson* v = member(doc, key);
  if (!v) request_error(std::string("missing ") + key);
  if (!v->is_string()) request_error(std::string(key) + " must be a string");
  return v->get<std::string>();
}

std::size_t count_member(const ojson& v, const char* key) {
  if (!v.is_number_integer() || v.get<long long>() <= 0) request_error(std::string(key) + " must be a positive integer");
  return v.get<std::size_t>();
}

std::string_view format_name(MeshFormat f) {
  switch (f) {
    case MeshFormat::Auto: return "auto";
    case MeshFormat::StlBinary: return "stl-binary";
    case MeshFormat::StlAscii: return "stl-ascii";
    case MeshFormat::Off: return "off";
  }
  return "auto";
}

}  // namespace

QueryRequest parse_query_request(std::string_view text) {
  const ojson doc = ojson::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) request_error("request body must be a JSON object");
  QueryRequest req;

  const ojson* mesh = member(doc, "mesh");
  if (!mesh || !mesh->is_object()) request_error("missing mesh object");
  const ojson* b64 = member(*mesh, "base64");
  const ojson* path = member(*mesh, "path");
  if ((b64 != nullptr) == (path != nullptr)) request_error("mesh needs exactly one of base64 or path");
  if (b64) req.mesh.base64 = text_member(*mesh, "base64");
  if (path) req.mesh.path = text_member(*mesh, "path");
  if (member(*mesh, "format")) {
    auto f = parse_mesh_format(text_member(*mesh, "format"));
    if (!f) request_error("unknown mesh format");
    req.mesh.format = *f;
  }

  auto material = parse_material_class(text_member(doc, "material_class"));
  if (!material) request_error("material_class must be Metal or Nonmetal");
  auto tolerance = parse_tolerance_class(text_member(doc, "required_tolerance"));
  if (!tolerance) request_error("required_tolerance must be Standard, Medium or High");
  req.requirements = {*material, *tolerance};

  if (const ojson* k = member(doc, "k")) req.k = count_member(*k, "k");
  if (const ojson* m = member(doc, "max_results")) req.max_results = count_member(*m, "max_results");
  if (const ojson* t = member(doc, "include_timing")) {
    if (!t->is_boolean()) request_error("include_timing must be a boolean");
    req.include_timing = t->get<bool>();
  }
  return req;
}

std::string dump_query_request(const QueryRequest& r) {
  ojson mesh = ojson::object();
  if (r.mesh.base64) mesh["base64"] = *r.mesh.base64;
  if (r.mesh.path) mesh["path"] = *r.mesh.path;
  mesh["format"] = std::string(format_name(r.mesh.format));
  ojson doc = {{"mesh", mesh},
               {"material_class", std::string(to_string(r.requirements.material_class))},
               {"required_tolerance", std::string(to_string(r.requirements.required_tolerance))},
               {"k", r.k}};
  if (r.max_results) doc["max_results"] = *r.max_results;
  if (r.include_timing) doc["include_timing"] = true;
  return doc.dump();
}

TriangleMesh load_request_mesh(const MeshSource& source, std::size_t max_bytes) {
  auto too_large = [max_bytes](std::size_t n) {
    throw Error(ErrorCode::PayloadTooLarge,
                "mesh of " + std::to_string(n) + " bytes exceeds the " + std::to_string(max_bytes) + "-byte limit");
  };
  if (source.base64) {
    // Decoded size is at most 3/4 of the text; check before decoding.
    const std::size_t decoded_bound = source.base64->size() / 4 * 3;
    if (decoded_bound > max_bytes + 2) too_large(decoded_bound);
    const Bytes bytes = base64_decode(*source.base64);
    if (bytes.size() > max_bytes) too_large(bytes.size());
    return load_mesh(bytes, source.format);
  }
  if (!source.path) request_error("mesh needs exactly one of base64 or path");
  std::error_code ec;
  const auto size = fs::file_size(*source.path, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot read " + *source.path + ": " + ec.message());
  if (size > max_bytes) too_large(static_cast<std::size_t>(size));
  return load_mesh_file(*source.path, source.format);
}

// ---- engine ----

SearchEngine::SearchEngine(Repository repo, SignatureParams params, std::size_t max_k)
    : repo_(std::move(repo)), params_(params), depth_graph_(build_neighbor_lists(repo_, max_k + 1)) {}

QueryResponse SearchEngine::query(const SphSignature& sig, const QueryRequirements& req, std::size_t k,
                                  std::optional<std::size_t> max_results) const {
  if (k == 0) throw Error(ErrorCode::InvalidParams, "k must be positive");
  const auto t0 = std::chrono::steady_clock::now();
  const bool deep_enough = depth_graph_.k >= k + 1 || depth_graph_.k + 1 >= repo_.size();
  const Neighborhood n = deep_enough ? query_neighborhood(repo_, depth_graph_, sig, k) : query_neighborhood(repo_, sig, k);

  QueryResponse out;
  out.k = k;
  out.requirements = req;
  out.ranking = rank_manufacturers(n, repo_, req);
  if (max_results && out.ranking.entries.size() > *max_results) out.ranking.entries.resize(*max_results);
  for (const NeighborhoodMember& m : n.members) {
    const PartMeta& meta = repo_.get(m.id).meta;
    out.neighborhood.push_back({m.id, m.distance, meta.tolerance_class, meta.manufacturer_id, m.direction});
  }
  out.search_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

QueryResponse SearchEngine::query(const TriangleMesh& mesh, const QueryRequirements& req, std::size_t k,
                                  std::optional<std::size_t> max_results) const {
  const auto t0 = std::chrono::steady_clock::now();
  const SphSignature sig = mesh_signature(mesh, params_);
  const double sig_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  QueryResponse out = query(sig, req, k, max_results);
  out.signature_ms = sig_ms;
  return out;
}

QueryResponse SearchEngine::query(const QueryRequest& request, std::size_t max_mesh_bytes) const {
  return query(load_request_mesh(request.mesh, max_mesh_bytes), request.requirements, request.k, request.max_results);
}

std::vector<SearchEngine::ManufacturerSummary> SearchEngine::manufacturers() const {
  std::map<std::string, std::pair<std::size_t, std::set<Process>>> acc;
  for (const PartRecord& r : repo_.records()) {
    if (!r.meta.manufacturer_id) continue;
    auto& [count, processes] = acc[*r.meta.manufacturer_id];
    ++count;
    if (r.meta.process) processes.insert(*r.meta.process);
  }
  std::vector<ManufacturerSummary> out;
  for (const auto& [id, v] : acc) out.push_back({id, v.first, {v.second.begin(), v.second.end()}});
  return out;
}

// ---- documents ----

std::string response_to_json(const QueryResponse& r, bool include_timing) {
  ojson doc;
  doc["status"] = std::string(to_string(r.ranking.status));
  doc["k"] = r.k;
  doc["requirements"] = {{"material_class", std::string(to_string(r.requirements.material_class))},
                         {"required_tolerance", std::string(to_string(r.requirements.required_tolerance))}};
  doc["ranking"] = ojson::array();
  for (const RankingEntry& e : r.ranking.entries)
    doc["ranking"].push_back({{"manufacturer_id", e.manufacturer_id},
                              {"posterior", e.posterior},
                              {"matched_count", e.matched_count},
                              {"best_distance", e.best_distance},
                              {"tolerance_satisfied", e.tolerance_satisfied}});
  doc["skipped_missing_manufacturer"] = r.ranking.skipped_missing_manufacturer;
  doc["neighborhood"] = ojson::array();
  for (const NeighborInfo& n : r.neighborhood) {
    ojson m = {{"part_id", format_part_id(n.id)}, {"distance", n.distance}};
    m["tolerance_class"] = n.tolerance_class ? ojson(std::string(to_string(*n.tolerance_class))) : ojson(nullptr);
    m["manufacturer_id"] = n.manufacturer_id ? ojson(*n.manufacturer_id) : ojson(nullptr);
    m["direction"] = std::string(to_string(n.direction));
    doc["neighborhood"].push_back(m);
  }
  if (include_timing) doc["timing"] = {{"signature_ms", r.signature_ms}, {"search_ms", r.search_ms}};
  return doc.dump();
}

std::string response_to_text(const QueryResponse& r) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "Ranking (material %s, tolerance %s, k = %zu): %s\n",
                std::string(to_string(r.requirements.material_class)).c_str(),
                std::string(to_string(r.requirements.required_tolerance)).c_str(), r.k,
                std::string(to_string(r.ranking.status)).c_str());
  out += line;
  std::snprintf(line, sizeof line, "%-5s %-16s %10s %8s %14s %10s\n", "rank", "manufacturer", "posterior", "matched",
                "best_distance", "tolerance");
  out += line;
  for (std::size_t i = 0; i < r.ranking.entries.size(); ++i) {
    const RankingEntry& e = r.ranking.entries[i];
    std::snprintf(line, sizeof line, "%-5zu %-16s %10.4f %8zu %14.4f %10s\n", i + 1, e.manufacturer_id.c_str(), e.posterior,
                  e.matched_count, e.best_distance, e.tolerance_satisfied ? "ok" : "fails");
    out += line;
  }
  std::snprintf(line, sizeof line, "\nNeighborhood (%zu parts)\n%-10s %14s %-10s %-16s %-9s\n", r.neighborhood.size(),
                "part_id", "distance", "tolerance", "manufacturer", "direction");
  out += line;
  for (const NeighborInfo& n : r.neighborhood) {
    std::snprintf(line, sizeof line, "%-10s %14.4f %-10s %-16s %-9s\n", format_part_id(n.id).c_str(), n.distance,
                  n.tolerance_class ? std::string(to_string(*n.tolerance_class)).c_str() : "-",
                  n.manufacturer_id ? n.manufacturer_id->c_str() : "-", std::string(to_string(n.direction)).c_str());
    out += line;
  }
  return out;
}

std::string part_to_json(const PartRecord& record) {
  ojson doc = ojson::parse(dump_part_meta(record.meta));
  doc["signature"] = {{"shells", record.signature.n_shells}, {"freq", record.signature.n_freq}};
  return doc.dump();
}

std::string manufacturers_to_json(const std::vector<SearchEngine::ManufacturerSummary>& list) {
  ojson arr = ojson::array();
  for (const auto& m : list) {
    ojson processes = ojson::array();
    for (Process p : m.processes) processes.push_back(std::string(to_string(p)));
    arr.push_back({{"manufacturer_id", m.id}, {"parts", m.parts}, {"processes", processes}});
  }
  return ojson{{"manufacturers", arr}}.dump();
}

std::string error_to_json(std::string_view code, std::string_view message) {
  return ojson{{"code", std::string(code)}, {"message", std::string(message)}}.dump();
}

// ---- parts directory ----

void write_parts_dir(const std::string& dir, const SimulationResult& sim) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir + ": " + ec.message());
  for (std::size_t i = 0; i < sim.repository.size(); ++i) {
    const PartRecord& r = sim.repository[i];
    const std::string stem = (fs::path(dir) / format_part_id(r.id())).string();
    write_file(stem + ".stl", write_stl_binary(sim.meshes[i]));
    write_file(stem + ".json", as_bytes(dump_part_meta(r.meta, 2)));
  }
}

Repository build_index_from_dir(const std::string& dir, const SignatureParams& params) {
  std::error_code ec;
  std::vector<fs::path> sidecars;
  for (fs::directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec))
    if (it->is_regular_file() && it->path().extension() == ".json") sidecars.push_back(it->path());
  if (ec) throw Error(ErrorCode::IoError, "cannot list " + dir + ": " + ec.message());
  std::sort(sidecars.begin(), sidecars.end());

  std::vector<PartRecord> records(sidecars.size());
  std::vector<fs::path> meshes(sidecars.size());
  for (std::size_t i = 0; i < sidecars.size(); ++i) {
    const Bytes doc = read_file(sidecars[i].string());
    try {
      records[i].meta = load_part_meta({reinterpret_cast<const char*>(doc.data()), doc.size()});
    } catch (const Error& e) {
      throw Error(e.code(), sidecars[i].string() + ": " + e.what());
    }
    for (const char* ext : {".stl", ".STL", ".off", ".OFF"}) {
      fs::path candidate = sidecars[i];
      candidate.replace_extension(ext);
      if (fs::exists(candidate)) {
        meshes[i] = candidate;
        break;
      }
    }
    if (meshes[i].empty()) throw Error(ErrorCode::IoError, sidecars[i].string() + " has no mesh next to it");
  }

  std::vector<std::exception_ptr> failures(sidecars.size());
  const auto n = static_cast<std::ptrdiff_t>(sidecars.size());
#pragma omp parallel for schedule(dynamic, 2)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    try {
      records[u].signature = mesh_signature(load_mesh_file(meshes[u].string()), params);
    } catch (...) {
      failures[u] = std::current_exception();
    }
  }
  for (std::size_t i = 0; i < failures.size(); ++i) {
    if (!failures[i]) continue;
    try {
      std::rethrow_exception(failures[i]);
    } catch (const Error& e) {
      throw Error(e.code(), meshes[i].string() + ": " + e.what());
    }
  }

  Repository repo;
  for (PartRecord& r : records) repo.add(std::move(r));
  return repo;
}

}  // namespace fabsearch
