#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fabsearch/binary_io.hpp"
#include "fabsearch/part_meta.hpp"
#include "fabsearch/sph.hpp"

namespace fabsearch {

struct PartRecord {
  PartMeta meta;
  SphSignature signature;

  PartId id() const { return meta.part_id; }
  friend bool operator==(const PartRecord&, const PartRecord&) = default;
};

/// In-memory part store keyed by part_id. Records keep insertion order; the
/// first insert fixes the signature dimensions.
class Repository {
 public:
  /// Throws DuplicateId or DimensionMismatch.
  void add(PartRecord record);

  bool contains(PartId id) const { return by_id_.count(id) != 0; }
  /// Throws UnknownPart.
  const PartRecord& get(PartId id) const;
  const PartRecord* find(PartId id) const;
  std::size_t position(PartId id) const;

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  std::span<const PartRecord> records() const { return records_; }
  const PartRecord& operator[](std::size_t i) const { return records_[i]; }

  /// (n_shells, n_freq), unset until the first insert.
  std::optional<std::pair<int, int>> dims() const { return dims_; }

  friend bool operator==(const Repository& a, const Repository& b) { return a.records_ == b.records_; }

 private:
  std::vector<PartRecord> records_;
  std::unordered_map<PartId, std::size_t> by_id_;
  std::optional<std::pair<int, int>> dims_;
};

struct Neighbor {
  PartId id = 0;
  double distance = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Strict ordering used everywhere neighbours are ranked: ascending
/// distance, then ascending part id.
inline bool closer(const Neighbor& a, const Neighbor& b) {
  return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
}

using RecordFilter = std::function<bool(const PartRecord&)>;

/// Exact k nearest records by brute-force scan, ordered by `closer`.
/// Returns min(k, matching records) entries. Throws DimensionMismatch.
std::vector<Neighbor> knn(const Repository& repo, const SphSignature& query, std::size_t k,
                          const RecordFilter& filter = {});

// Index file: "FIDX", u16 version, u16 n_shells, u16 n_freq, u32 count; then
// per record u32 part_id, u32 byte length + UTF-8 metadata JSON, and
// n_shells * n_freq f64 values. Little-endian throughout.
Bytes save_repository(const Repository& repo);
/// Throws CorruptIndex on any structural problem.
Repository load_repository(ByteView bytes);

void save_repository_file(const Repository& repo, const std::string& path);
Repository load_repository_file(const std::string& path);

}  // namespace fabsearch
