#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "fabsearch/types.hpp"

namespace fabsearch {

/// Sidecar metadata for one part. Only part_id, material_class and
/// tolerance_value are mandatory; everything else stays unset when absent.
struct PartMeta {
  PartId part_id = 0;
  MaterialClass material_class = MaterialClass::Metal;
  std::optional<std::string> material_name;
  double tolerance_value = 1.0;
  std::optional<ToleranceClass> tolerance_class;
  std::optional<Process> process;
  std::optional<std::string> manufacturer_id;
  std::optional<std::string> units;
  std::optional<double> volume;
  std::optional<double> surface_area;
  std::optional<std::int64_t> feature_count;

  friend bool operator==(const PartMeta&, const PartMeta&) = default;
};

/// Parses a UTF-8 JSON sidecar document. Throws SchemaError.
PartMeta load_part_meta(std::string_view document);

/// Compact JSON rendering; load_part_meta(dump_part_meta(m)) == m.
std::string dump_part_meta(const PartMeta& meta, int indent = -1);

}  // namespace fabsearch
