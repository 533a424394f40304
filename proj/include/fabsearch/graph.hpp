#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fabsearch/index.hpp"

namespace fabsearch {

inline constexpr std::size_t kDefaultK = 10;

/// Direction of an edge as seen from the node that owns the edge list:
/// Out = the owner lists the neighbour among its k nearest, In = the
/// neighbour lists the owner (a backlink), Both = mutual.
enum class Direction { Out, In, Both };

std::string_view to_string(Direction d);

struct Edge {
  PartId id = 0;
  double distance = 0.0;
  Direction direction = Direction::Out;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// KNN graph over a repository. `nodes[i]` is the part id of repository
/// record i and `edges[i]` its edge list, sorted ascending by (distance, id).
/// Directed form: exactly min(k, N-1) Out edges per node. Undirected form:
/// the symmetric closure, each edge tagged with its direction.
struct KnnGraph {
  std::size_t k = 0;
  bool directed = true;
  std::vector<PartId> nodes;
  std::vector<std::vector<Edge>> edges;

  const std::vector<Edge>& edges_of(PartId id) const;
};

/// Node a's out-edges are knn(repo, sig_a, k) without a itself.
/// Parallel over nodes. Throws TooFewRecords when the repository has < 2 records.
KnnGraph build_knn_graph(const Repository& repo, std::size_t k);
/// Single-threaded reference for build_knn_graph.
KnnGraph build_knn_graph_serial(const Repository& repo, std::size_t k);

/// Same out-edges as build_knn_graph, for any repository size (nodes of a
/// 0- or 1-record repository have empty lists). Used for the deep graph
/// behind query_neighborhood.
KnnGraph build_neighbor_lists(const Repository& repo, std::size_t depth);

/// Symmetric closure of a directed graph; each edge keeps its distance.
KnnGraph undirect(const KnnGraph& directed);

struct NeighborhoodMember {
  PartId id = 0;
  double distance = 0.0;
  Direction direction = Direction::Out;

  friend bool operator==(const NeighborhoodMember&, const NeighborhoodMember&) = default;
};

/// Backlinked neighbourhood of a query: its own k nearest parts plus every
/// part that would count the query among its k nearest once the query is
/// inserted. Members are sorted ascending by (distance, id).
struct Neighborhood {
  std::optional<PartId> query_id;
  std::vector<NeighborhoodMember> members;

  friend bool operator==(const Neighborhood&, const Neighborhood&) = default;
};

struct NeighborhoodOptions {
  /// Repository part removed from consideration (leave-one-out).
  std::optional<PartId> exclude;
  /// Id the query competes with on distance ties. Unset means the query is
  /// external and loses every tie.
  std::optional<PartId> query_id;
};

/// Computes the neighbourhood with insertion semantics against a
/// precomputed directed graph whose depth is at least k + 1 (or complete).
/// Throws InvalidParams if the graph is too shallow.
Neighborhood query_neighborhood(const Repository& repo, const KnnGraph& depth_graph, const SphSignature& query,
                                std::size_t k, const NeighborhoodOptions& options = {});

/// Convenience overload that builds the (k + 1)-deep graph itself.
Neighborhood query_neighborhood(const Repository& repo, const SphSignature& query, std::size_t k,
                                const NeighborhoodOptions& options = {});

/// Text edge list, one `part_id part_id distance direction` line per edge.
std::string dump_edge_list(const KnnGraph& graph);

}  // namespace fabsearch
