#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fabsearch/binary_io.hpp"
#include "fabsearch/types.hpp"

namespace fabsearch {

using Triangle = std::array<std::uint32_t, 3>;

/// Triangle soup as loaded from disk. Every index is < vertices.size() and
/// no triangle is degenerate; loaders drop degenerate facets and count them
/// in `dropped_degenerate`.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::size_t dropped_degenerate = 0;

  bool empty() const { return triangles.empty(); }
  Vec3 corner(std::size_t tri, int c) const { return vertices[triangles[tri][c]]; }
};

enum class MeshFormat { Auto, StlBinary, StlAscii, Off };

std::optional<MeshFormat> parse_mesh_format(std::string_view text);

// Squared-cross-product threshold below which a facet counts as zero-area.
inline constexpr double kDegenerateCross2 = 1e-12;

bool is_degenerate(const Vec3& a, const Vec3& b, const Vec3& c);

/// Appends a triangle unless it is degenerate, in which case the drop
/// counter is bumped instead.
void push_triangle(TriangleMesh& mesh, const Triangle& tri);

/// Parses STL (binary or ASCII) or OFF bytes. Throws MalformedFile on
/// syntax or length errors and EmptyMesh when no usable facet remains.
TriangleMesh load_mesh(ByteView bytes, MeshFormat format = MeshFormat::Auto);
TriangleMesh load_mesh_file(const std::string& path, MeshFormat format = MeshFormat::Auto);

/// Binary STL writer. Triangles are emitted in mesh order with f32
/// coordinates and a recomputed unit normal.
Bytes write_stl_binary(const TriangleMesh& mesh, std::string_view header = "fabsearch");
std::string write_stl_ascii(const TriangleMesh& mesh, std::string_view name = "part");

struct MeshDiagnostics {
  std::size_t triangle_count = 0;
  std::size_t dropped_degenerate = 0;
  Vec3 bbox_min{};
  Vec3 bbox_max{};
  double surface_area = 0.0;
};

MeshDiagnostics mesh_diagnostics(const TriangleMesh& mesh);

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);

}  // namespace fabsearch
