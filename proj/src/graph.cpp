#include "fabsearch/graph.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <unordered_map>

#include "fabsearch/error.hpp"

namespace fabsearch {

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::Out: return "out";
    case Direction::In: return "in";
    case Direction::Both: return "both";
  }
  return "out";
}

const std::vector<Edge>& KnnGraph::edges_of(PartId id) const {
  auto it = std::find(nodes.begin(), nodes.end(), id);
  if (it == nodes.end()) throw Error(ErrorCode::UnknownPart, "part " + format_part_id(id) + " is not in the graph");
  return edges[static_cast<std::size_t>(it - nodes.begin())];
}

namespace {

std::vector<Edge> out_edges(const Repository& repo, std::size_t i, std::size_t k) {
  const PartRecord& self = repo[i];
  const PartId self_id = self.id();
  std::vector<Edge> out;
  for (const Neighbor& n : knn(repo, self.signature, k, [self_id](const PartRecord& r) { return r.id() != self_id; }))
    out.push_back({n.id, n.distance, Direction::Out});
  return out;
}

KnnGraph empty_graph(const Repository& repo, std::size_t k) {
  KnnGraph g;
  g.k = k;
  g.directed = true;
  g.nodes.reserve(repo.size());
  for (const PartRecord& r : repo.records()) g.nodes.push_back(r.id());
  g.edges.resize(repo.size());
  return g;
}

void check_buildable(const Repository& repo, std::size_t k) {
  if (repo.size() < 2) throw Error(ErrorCode::TooFewRecords, "a KNN graph needs at least 2 records");
  if (k == 0) throw Error(ErrorCode::InvalidParams, "k must be positive");
}

bool edge_closer(const Edge& a, const Edge& b) {
  return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
}

}  // namespace

KnnGraph build_neighbor_lists(const Repository& repo, std::size_t depth) {
  KnnGraph g = empty_graph(repo, depth);
  const auto n = static_cast<std::ptrdiff_t>(repo.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < n; ++i) g.edges[static_cast<std::size_t>(i)] = out_edges(repo, static_cast<std::size_t>(i), depth);
  return g;
}

KnnGraph build_knn_graph(const Repository& repo, std::size_t k) {
  check_buildable(repo, k);
  return build_neighbor_lists(repo, k);
}

KnnGraph build_knn_graph_serial(const Repository& repo, std::size_t k) {
  check_buildable(repo, k);
  KnnGraph g = empty_graph(repo, k);
  for (std::size_t i = 0; i < repo.size(); ++i) g.edges[i] = out_edges(repo, i, k);
  return g;
}

KnnGraph undirect(const KnnGraph& directed) {
  std::unordered_map<PartId, std::size_t> slot;
  for (std::size_t i = 0; i < directed.nodes.size(); ++i) slot.emplace(directed.nodes[i], i);

  std::vector<std::map<PartId, Edge>> merged(directed.nodes.size());
  auto link = [&merged](std::size_t owner, PartId other, double dist, Direction dir) {
    auto [it, inserted] = merged[owner].try_emplace(other, Edge{other, dist, dir});
    if (!inserted && it->second.direction != dir) it->second.direction = Direction::Both;
  };
  for (std::size_t i = 0; i < directed.nodes.size(); ++i)
    for (const Edge& e : directed.edges[i]) {
      if (e.direction == Direction::In) continue;
      link(i, e.id, e.distance, Direction::Out);
      link(slot.at(e.id), directed.nodes[i], e.distance, Direction::In);
    }

  KnnGraph g;
  g.k = directed.k;
  g.directed = false;
  g.nodes = directed.nodes;
  g.edges.resize(directed.nodes.size());
  for (std::size_t i = 0; i < merged.size(); ++i) {
    for (const auto& [id, e] : merged[i]) g.edges[i].push_back(e);
    std::sort(g.edges[i].begin(), g.edges[i].end(), edge_closer);
  }
  return g;
}

Neighborhood query_neighborhood(const Repository& repo, const KnnGraph& depth_graph, const SphSignature& query,
                                std::size_t k, const NeighborhoodOptions& options) {
  if (k == 0) throw Error(ErrorCode::InvalidParams, "k must be positive");
  if (!depth_graph.directed || depth_graph.nodes.size() != repo.size())
    throw Error(ErrorCode::InvalidParams, "neighbourhood queries need the directed graph of this repository");
  if (depth_graph.k < k + 1 && depth_graph.k + 1 < repo.size())
    throw Error(ErrorCode::InvalidParams, "graph depth " + std::to_string(depth_graph.k) +
                                              " is too shallow for k = " + std::to_string(k));
  if (options.query_id && options.query_id != options.exclude && repo.contains(*options.query_id))
    throw Error(ErrorCode::InvalidParams, "query id collides with a repository part");

  // Ties are broken on part id; an external query sorts after every id.
  const std::uint64_t query_key = options.query_id ? *options.query_id : std::uint64_t{1} << 32;
  const auto excluded = [&options](PartId id) { return options.exclude && *options.exclude == id; };

  std::map<PartId, NeighborhoodMember> members;
  for (const Neighbor& n : knn(repo, query, k, [&](const PartRecord& r) { return !excluded(r.id()); }))
    members.emplace(n.id, NeighborhoodMember{n.id, n.distance, Direction::Out});

  for (std::size_t i = 0; i < repo.size(); ++i) {
    const PartRecord& p = repo[i];
    if (excluded(p.id())) continue;
    // p's current k-th neighbour once the excluded part is gone.
    const Edge* kth = nullptr;
    std::size_t seen = 0;
    for (const Edge& e : depth_graph.edges[i]) {
      if (excluded(e.id)) continue;
      if (++seen == k) {
        kth = &e;
        break;
      }
    }
    const double d = distance(query, p.signature);
    const bool displaces = !kth || d < kth->distance || (d == kth->distance && query_key < kth->id);
    if (!displaces) continue;
    auto [it, inserted] = members.try_emplace(p.id(), NeighborhoodMember{p.id(), d, Direction::In});
    if (!inserted) it->second.direction = Direction::Both;
  }

  Neighborhood out;
  out.query_id = options.query_id;
  for (const auto& [id, m] : members) out.members.push_back(m);
  std::sort(out.members.begin(), out.members.end(), [](const NeighborhoodMember& a, const NeighborhoodMember& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
  });
  return out;
}

Neighborhood query_neighborhood(const Repository& repo, const SphSignature& query, std::size_t k,
                                const NeighborhoodOptions& options) {
  if (k == 0) throw Error(ErrorCode::InvalidParams, "k must be positive");
  return query_neighborhood(repo, build_neighbor_lists(repo, k + 1), query, k, options);
}

std::string dump_edge_list(const KnnGraph& graph) {
  std::string out;
  char line[96];
  for (std::size_t i = 0; i < graph.nodes.size(); ++i)
    for (const Edge& e : graph.edges[i]) {
      std::snprintf(line, sizeof line, "%08x %08x %.17g %s\n", static_cast<unsigned>(graph.nodes[i]),
                    static_cast<unsigned>(e.id), e.distance, std::string(to_string(e.direction)).c_str());
      out += line;
    }
  return out;
}

}  // namespace fabsearch
