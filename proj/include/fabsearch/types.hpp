#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace fabsearch {

using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

// Squared norm summed in ascending order of the squared components, so the
// result is bit-identical under any permutation or sign flip of the axes.
inline double norm2_sym(const Vec3& a) {
  double s0 = a[0] * a[0], s1 = a[1] * a[1], s2 = a[2] * a[2];
  if (s0 > s1) std::swap(s0, s1);
  if (s1 > s2) std::swap(s1, s2);
  if (s0 > s1) std::swap(s0, s1);
  return (s0 + s1) + s2;
}

inline double norm_sym(const Vec3& a) { return std::sqrt(norm2_sym(a)); }

using PartId = std::uint32_t;

/// Renders a part id as 8 lowercase hex characters.
std::string format_part_id(PartId id);
/// Parses exactly 8 hex characters (either case).
std::optional<PartId> parse_part_id(std::string_view text);

enum class MaterialClass { Metal, Nonmetal };
enum class ToleranceClass { Standard, Medium, High };
enum class Process { Casting, Machining, Forming, Molding };

inline constexpr std::array<Process, 4> kAllProcesses = {Process::Casting, Process::Machining,
                                                         Process::Forming, Process::Molding};

std::string_view to_string(MaterialClass m);
std::string_view to_string(ToleranceClass t);
std::string_view to_string(Process p);

// Parsers accept the canonical spelling case-insensitively. Tolerance also
// accepts "Low" as an alias for Standard and "Med" for Medium.
std::optional<MaterialClass> parse_material_class(std::string_view text);
std::optional<ToleranceClass> parse_tolerance_class(std::string_view text);
std::optional<Process> parse_process(std::string_view text);

/// Tightness rank: Standard < Medium < High.
constexpr int tightness(ToleranceClass t) { return static_cast<int>(t); }

}  // namespace fabsearch
