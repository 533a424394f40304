#include "fabsearch/error.hpp"
#include "fabsearch/types.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

namespace fabsearch {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedFile: return "MalformedFile";
    case ErrorCode::EmptyMesh: return "EmptyMesh";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::CorruptIndex: return "CorruptIndex";
    case ErrorCode::TooFewRecords: return "TooFewRecords";
    case ErrorCode::UnknownPart: return "UnknownPart";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::UnservableProcess: return "UnservableProcess";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::PayloadTooLarge: return "PayloadTooLarge";
  }
  return "Unknown";
}

std::string format_part_id(PartId id) {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", static_cast<unsigned>(id));
  return buf;
}

std::optional<PartId> parse_part_id(std::string_view text) {
  if (text.size() != 8) return std::nullopt;
  PartId value = 0;
  for (char c : text) {
    int digit;
    if (c >= '0' && c <= '9') digit = c - '0';
    else if (c >= 'a' && c <= 'f') digit = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') digit = c - 'A' + 10;
    else return std::nullopt;
    value = (value << 4) | static_cast<PartId>(digit);
  }
  return value;
}

namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

std::string_view to_string(MaterialClass m) { return m == MaterialClass::Metal ? "Metal" : "Nonmetal"; }

std::string_view to_string(ToleranceClass t) {
  switch (t) {
    case ToleranceClass::Standard: return "Standard";
    case ToleranceClass::Medium: return "Medium";
    case ToleranceClass::High: return "High";
  }
  return "Standard";
}

std::string_view to_string(Process p) {
  switch (p) {
    case Process::Casting: return "Casting";
    case Process::Machining: return "Machining";
    case Process::Forming: return "Forming";
    case Process::Molding: return "Molding";
  }
  return "Casting";
}

std::optional<MaterialClass> parse_material_class(std::string_view text) {
  if (iequals(text, "Metal")) return MaterialClass::Metal;
  if (iequals(text, "Nonmetal")) return MaterialClass::Nonmetal;
  return std::nullopt;
}

std::optional<ToleranceClass> parse_tolerance_class(std::string_view text) {
  if (iequals(text, "Standard") || iequals(text, "Low")) return ToleranceClass::Standard;
  if (iequals(text, "Medium") || iequals(text, "Med")) return ToleranceClass::Medium;
  if (iequals(text, "High")) return ToleranceClass::High;
  return std::nullopt;
}

std::optional<Process> parse_process(std::string_view text) {
  for (Process p : kAllProcesses)
    if (iequals(text, to_string(p))) return p;
  return std::nullopt;
}

}  // namespace fabsearch
