#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "fabsearch/binary_io.hpp"
#include "fabsearch/mesh_io.hpp"

namespace fabsearch {

inline constexpr int kDefaultResolution = 32;

/// R x R x R binary occupancy grid. Voxel (x, y, z) covers the unit cube
/// [x, x+1) x [y, y+1) x [z, z+1); storage is x-fastest.
class VoxelGrid {
 public:
  VoxelGrid() = default;
  explicit VoxelGrid(int resolution);

  int resolution() const { return resolution_; }
  double center() const { return 0.5 * resolution_; }
  std::size_t voxel_count() const { return static_cast<std::size_t>(resolution_) * resolution_ * resolution_; }

  std::size_t linear_index(int x, int y, int z) const {
    return static_cast<std::size_t>(x) + static_cast<std::size_t>(resolution_) *
                                             (static_cast<std::size_t>(y) + static_cast<std::size_t>(resolution_) * z);
  }
  bool test(int x, int y, int z) const {
    const std::size_t i = linear_index(x, y, z);
    return (words_[i >> 6] >> (i & 63)) & 1u;
  }
  void set(int x, int y, int z) {
    const std::size_t i = linear_index(x, y, z);
    words_[i >> 6] |= std::uint64_t{1} << (i & 63);
  }
  /// Idempotent set that is safe to call concurrently from many threads.
  void set_atomic(int x, int y, int z);

  std::size_t count() const;
  std::vector<std::array<int, 3>> occupied() const;

  const std::vector<std::uint64_t>& words() const { return words_; }

  friend bool operator==(const VoxelGrid&, const VoxelGrid&) = default;

 private:
  int resolution_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Moves the area-weighted surface centroid to (R/2, R/2, R/2) and scales
/// uniformly so the farthest vertex sits at radius R/2 - 1.
/// Throws InvalidParams for R < 3 and DegenerateGeometry when the mesh has
/// no area or all vertices coincide.
TriangleMesh normalize_mesh(const TriangleMesh& mesh, int resolution = kDefaultResolution);

/// Conservative triangle / axis-aligned box overlap by the separating axis
/// theorem (3 box normals, triangle normal, 9 edge cross products). Boxes
/// are closed, so touching counts as overlapping.
bool triangle_box_overlap(const Vec3& box_center, const Vec3& half_size, const Vec3& a, const Vec3& b,
                          const Vec3& c);

/// Rasterizes an already-normalized mesh: a voxel is occupied iff some
/// triangle overlaps its cell. OpenMP-parallel over triangles.
VoxelGrid voxelize_surface(const TriangleMesh& normalized, int resolution = kDefaultResolution);

/// Single-threaded reference for voxelize_surface; produces the same grid.
VoxelGrid voxelize_surface_serial(const TriangleMesh& normalized, int resolution = kDefaultResolution);

/// normalize_mesh followed by voxelize_surface.
VoxelGrid voxelize(const TriangleMesh& mesh, int resolution = kDefaultResolution);

// Debug dump: "FVOX", u16 version, u16 R, then ceil(R^3 / 8) bytes with
// voxel i stored in bit (i % 8) of byte (i / 8), x-fastest.
Bytes encode_fvox(const VoxelGrid& grid);
VoxelGrid decode_fvox(ByteView bytes);

}  // namespace fabsearch
