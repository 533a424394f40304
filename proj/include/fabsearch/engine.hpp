#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fabsearch/graph.hpp"
#include "fabsearch/index.hpp"
#include "fabsearch/mesh_io.hpp"
#include "fabsearch/ranker.hpp"
#include "fabsearch/simulate.hpp"
#include "fabsearch/sph.hpp"

namespace fabsearch {

inline constexpr std::size_t kDefaultMaxMeshBytes = 50u * 1024u * 1024u;

/// FABSEARCH_MAX_MESH_BYTES if set to a positive integer, else the default.
std::size_t max_mesh_bytes_from_env();

std::string base64_encode(ByteView bytes);
/// Standard alphabet, padding required. Throws SchemaError.
Bytes base64_decode(std::string_view text);

struct MeshSource {
  std::optional<std::string> base64;
  std::optional<std::string> path;
  MeshFormat format = MeshFormat::Auto;
};

struct QueryRequest {
  MeshSource mesh;
  QueryRequirements requirements;
  std::size_t k = kDefaultK;
  std::optional<std::size_t> max_results;
  /// Timing varies run to run, so it is left out of the response unless asked.
  bool include_timing = false;
};

/// Parses a QueryRequest document. Exactly one of mesh.base64 / mesh.path.
/// Throws SchemaError.
QueryRequest parse_query_request(std::string_view json_text);
std::string dump_query_request(const QueryRequest& request);

/// Loads the request's mesh, refusing more than `max_bytes` of mesh data
/// (PayloadTooLarge).
TriangleMesh load_request_mesh(const MeshSource& source, std::size_t max_bytes);

struct NeighborInfo {
  PartId id = 0;
  double distance = 0.0;
  std::optional<ToleranceClass> tolerance_class;
  std::optional<std::string> manufacturer_id;
  Direction direction = Direction::Out;

  friend bool operator==(const NeighborInfo&, const NeighborInfo&) = default;
};

struct QueryResponse {
  std::size_t k = kDefaultK;
  QueryRequirements requirements;
  ManufacturerRanking ranking;
  std::vector<NeighborInfo> neighborhood;
  double signature_ms = 0.0;
  double search_ms = 0.0;
};

/// Read-only search service over one repository snapshot. Keeps a
/// (max_k + 1)-deep neighbour graph; larger k builds a graph per query.
class SearchEngine {
 public:
  SearchEngine(Repository repo, SignatureParams params, std::size_t max_k = 32);

  const Repository& repository() const { return repo_; }
  const SignatureParams& params() const { return params_; }

  QueryResponse query(const SphSignature& signature, const QueryRequirements& req, std::size_t k,
                      std::optional<std::size_t> max_results = std::nullopt) const;
  QueryResponse query(const TriangleMesh& mesh, const QueryRequirements& req, std::size_t k,
                      std::optional<std::size_t> max_results = std::nullopt) const;
  QueryResponse query(const QueryRequest& request, std::size_t max_mesh_bytes = kDefaultMaxMeshBytes) const;

  /// Distinct manufacturer ids with their part counts and processes, by id.
  struct ManufacturerSummary {
    std::string id;
    std::size_t parts = 0;
    std::vector<Process> processes;
  };
  std::vector<ManufacturerSummary> manufacturers() const;

 private:
  Repository repo_;
  SignatureParams params_;
  KnnGraph depth_graph_;
};

std::string response_to_json(const QueryResponse& response, bool include_timing = false);
/// Human-readable ranking and neighbourhood tables.
std::string response_to_text(const QueryResponse& response);
/// Record metadata plus signature dimensions.
std::string part_to_json(const PartRecord& record);
std::string manufacturers_to_json(const std::vector<SearchEngine::ManufacturerSummary>& list);
std::string error_to_json(std::string_view code, std::string_view message);

// Parts directory: one `<part_id>.json` sidecar per part next to a mesh
// with the same stem (.stl or .off).

/// Writes binary STL plus sidecar for every simulated part.
void write_parts_dir(const std::string& dir, const SimulationResult& sim);
/// Loads every sidecar/mesh pair in stem order and computes signatures in
/// parallel. Throws IoError for a sidecar without a mesh.
Repository build_index_from_dir(const std::string& dir, const SignatureParams& params);

}  // namespace fabsearch
