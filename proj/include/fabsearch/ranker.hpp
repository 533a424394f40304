#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fabsearch/graph.hpp"
#include "fabsearch/index.hpp"
#include "fabsearch/types.hpp"

namespace fabsearch {

struct QueryRequirements {
  MaterialClass material_class = MaterialClass::Metal;
  ToleranceClass required_tolerance = ToleranceClass::Standard;

  friend bool operator==(const QueryRequirements&, const QueryRequirements&) = default;
};

/// True iff `part` is at least as tight as `required` (High > Medium > Standard).
constexpr bool tolerance_satisfies(ToleranceClass part, ToleranceClass required) {
  return tightness(part) >= tightness(required);
}

struct RankingEntry {
  std::string manufacturer_id;
  /// Share of the tolerance-satisfying members; 0 in the failing tier.
  double posterior = 0.0;
  /// Members counted for this entry: satisfying ones, or for the failing tier
  /// the non-satisfying ones.
  std::size_t matched_count = 0;
  double best_distance = 0.0;
  bool tolerance_satisfied = false;

  friend bool operator==(const RankingEntry&, const RankingEntry&) = default;
};

enum class RankingStatus { Ok, EmptyNeighborhood };

std::string_view to_string(RankingStatus s);

struct ManufacturerRanking {
  RankingStatus status = RankingStatus::Ok;
  std::vector<RankingEntry> entries;
  /// Members without a manufacturer_id.
  std::size_t skipped_missing_manufacturer = 0;

  friend bool operator==(const ManufacturerRanking&, const ManufacturerRanking&) = default;
};

/// Count-ratio posterior over the neighbourhood. Members are filtered by
/// material, then split by tolerance; satisfying manufacturers come first by
/// (posterior desc, best_distance asc, manufacturer_id asc), then the
/// failing-only manufacturers by (best_distance, manufacturer_id).
/// A member with no tolerance class counts as Standard.
/// Throws UnknownPart if a member is not in the repository.
ManufacturerRanking rank_manufacturers(const Neighborhood& neighborhood, const Repository& repo,
                                       const QueryRequirements& req);

}  // namespace fabsearch
