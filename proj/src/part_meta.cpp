#include "fabsearch/part_meta.hpp"

#include <cmath>
#include <json.hpp>

#include "fabsearch/error.hpp"

namespace fabsearch {

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& what) { throw Error(ErrorCode::SchemaError, what); }

const json* field(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return nullptr;
  return &*it;
}

std::string string_field(const json& value, const char* key) {
  if (!value.is_string()) schema_error(std::string(key) + " must be a string");
  return value.get<std::string>();
}

double number_field(const json& value, const char* key) {
  if (!value.is_number()) schema_error(std::string(key) + " must be a number");
  const double v = value.get<double>();
  if (!std::isfinite(v)) schema_error(std::string(key) + " must be finite");
  return v;
}

}  // namespace

PartMeta load_part_meta(std::string_view document) {
  json doc = json::parse(document, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) schema_error("metadata is not valid JSON");
  if (!doc.is_object()) schema_error("metadata must be a JSON object");

  PartMeta meta;
  const json* id = field(doc, "part_id");
  if (!id) schema_error("missing part_id");
  auto parsed_id = parse_part_id(string_field(*id, "part_id"));
  if (!parsed_id) schema_error("part_id must be 8 hex characters");
  meta.part_id = *parsed_id;

  const json* material = field(doc, "material_class");
  if (!material) schema_error("missing material_class");
  auto mc = parse_material_class(string_field(*material, "material_class"));
  if (!mc) schema_error("material_class must be Metal or Nonmetal");
  meta.material_class = *mc;

  const json* tol = field(doc, "tolerance_value");
  if (!tol) schema_error("missing tolerance_value");
  meta.tolerance_value = number_field(*tol, "tolerance_value");
  if (!(meta.tolerance_value > 0)) schema_error("tolerance_value must be positive");

  if (const json* v = field(doc, "tolerance_class")) {
    auto tc = parse_tolerance_class(string_field(*v, "tolerance_class"));
    if (!tc) schema_error("tolerance_class must be Standard, Medium or High");
    meta.tolerance_class = tc;
  }
  if (const json* v = field(doc, "process")) {
    auto p = parse_process(string_field(*v, "process"));
    if (!p) schema_error("process must be Casting, Machining, Forming or Molding");
    meta.process = p;
  }
  if (const json* v = field(doc, "material_name")) meta.material_name = string_field(*v, "material_name");
  if (const json* v = field(doc, "manufacturer_id")) meta.manufacturer_id = string_field(*v, "manufacturer_id");
  if (const json* v = field(doc, "units")) meta.units = string_field(*v, "units");
  if (const json* v = field(doc, "volume")) meta.volume = number_field(*v, "volume");
  if (const json* v = field(doc, "surface_area")) meta.surface_area = number_field(*v, "surface_area");
  if (const json* v = field(doc, "feature_count")) {
    if (!v->is_number_integer()) schema_error("feature_count must be an integer");
    meta.feature_count = v->get<std::int64_t>();
  }
  return meta;
}

std::string dump_part_meta(const PartMeta& meta, int indent) {
  json doc = json::object();
  doc["part_id"] = format_part_id(meta.part_id);
  doc["material_class"] = to_string(meta.material_class);
  doc["tolerance_value"] = meta.tolerance_value;
  if (meta.material_name) doc["material_name"] = *meta.material_name;
  if (meta.tolerance_class) doc["tolerance_class"] = to_string(*meta.tolerance_class);
  if (meta.process) doc["process"] = to_string(*meta.process);
  if (meta.manufacturer_id) doc["manufacturer_id"] = *meta.manufacturer_id;
  if (meta.units) doc["units"] = *meta.units;
  if (meta.volume) doc["volume"] = *meta.volume;
  if (meta.surface_area) doc["surface_area"] = *meta.surface_area;
  if (meta.feature_count) doc["feature_count"] = *meta.feature_count;
  return doc.dump(indent);
}

}  // namespace fabsearch
