#include "fabsearch/ranker.hpp"

#include <algorithm>
#include <map>

namespace fabsearch {

std::string_view to_string(RankingStatus s) {
  return s == RankingStatus::Ok ? "ok" : "empty_neighborhood";
}

ManufacturerRanking rank_manufacturers(const Neighborhood& neighborhood, const Repository& repo,
                                       const QueryRequirements& req) {
  ManufacturerRanking out;
  std::map<std::string, RankingEntry> pass, fail;
  std::size_t material_matches = 0, satisfying = 0;

  for (const NeighborhoodMember& m : neighborhood.members) {
    const PartMeta& meta = repo.get(m.id).meta;
    if (meta.material_class != req.material_class) continue;
    ++material_matches;
    if (!meta.manufacturer_id) {
      ++out.skipped_missing_manufacturer;
      continue;
    }
    const bool ok = tolerance_satisfies(meta.tolerance_class.value_or(ToleranceClass::Standard), req.required_tolerance);
    auto& tier = ok ? pass : fail;
    auto [it, inserted] = tier.try_emplace(*meta.manufacturer_id);
    RankingEntry& e = it->second;
    if (inserted) {
      e.manufacturer_id = *meta.manufacturer_id;
      e.best_distance = m.distance;
      e.tolerance_satisfied = ok;
    }
    e.best_distance = std::min(e.best_distance, m.distance);
    ++e.matched_count;
    if (ok) ++satisfying;
  }

  if (material_matches == 0) {
    out.status = RankingStatus::EmptyNeighborhood;
    return out;
  }

  auto secondary = [](const RankingEntry& a, const RankingEntry& b) {
    if (a.best_distance != b.best_distance) return a.best_distance < b.best_distance;
    return a.manufacturer_id < b.manufacturer_id;
  };

  std::vector<RankingEntry> top;
  for (auto& [id, e] : pass) {
    e.posterior = static_cast<double>(e.matched_count) / static_cast<double>(satisfying);
    top.push_back(e);
  }
  std::sort(top.begin(), top.end(), [&](const RankingEntry& a, const RankingEntry& b) {
    // Equal counts give bit-equal posteriors.
    if (a.matched_count != b.matched_count) return a.matched_count > b.matched_count;
    return secondary(a, b);
  });

  std::vector<RankingEntry> tail;
  for (const auto& [id, e] : fail)
    if (!pass.count(id)) tail.push_back(e);
  std::sort(tail.begin(), tail.end(), secondary);

  out.entries = std::move(top);
  out.entries.insert(out.entries.end(), tail.begin(), tail.end());
  return out;
}

}  // namespace fabsearch
