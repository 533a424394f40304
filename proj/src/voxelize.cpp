#include "fabsearch/voxelize.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>

#include "fabsearch/error.hpp"

namespace fabsearch {

VoxelGrid::VoxelGrid(int resolution) : resolution_(resolution) {
  if (resolution <= 0) throw Error(ErrorCode::InvalidParams, "grid resolution must be positive");
  words_.assign((voxel_count() + 63) / 64, 0);
}

void VoxelGrid::set_atomic(int x, int y, int z) {
  const std::size_t i = linear_index(x, y, z);
  std::atomic_ref<std::uint64_t> word(words_[i >> 6]);
  word.fetch_or(std::uint64_t{1} << (i & 63), std::memory_order_relaxed);
}

std::size_t VoxelGrid::count() const {
  std::size_t n = 0;
  for (std::uint64_t w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::vector<std::array<int, 3>> VoxelGrid::occupied() const {
  std::vector<std::array<int, 3>> out;
  out.reserve(count());
  for (int z = 0; z < resolution_; ++z)
    for (int y = 0; y < resolution_; ++y)
      for (int x = 0; x < resolution_; ++x)
        if (test(x, y, z)) out.push_back({x, y, z});
  return out;
}

TriangleMesh normalize_mesh(const TriangleMesh& mesh, int resolution) {
  if (resolution < 3) throw Error(ErrorCode::InvalidParams, "resolution must be at least 3");
  if (mesh.triangles.empty()) throw Error(ErrorCode::EmptyMesh, "cannot normalize an empty mesh");

  // Each coordinate is accumulated independently with the same operation
  // order, so axis permutations and sign flips of the input commute exactly
  // with the centroid.
  double total_area = 0.0;
  Vec3 weighted{0.0, 0.0, 0.0};
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Vec3 a = mesh.corner(t, 0), b = mesh.corner(t, 1), c = mesh.corner(t, 2);
    const double area = triangle_area(a, b, c);
    total_area += area;
    for (int k = 0; k < 3; ++k) weighted[k] += area * ((a[k] + b[k] + c[k]) / 3.0);
  }
  if (!(total_area > 0.0)) throw Error(ErrorCode::DegenerateGeometry, "mesh has zero surface area");
  const Vec3 centroid = weighted * (1.0 / total_area);

  double max_radius = 0.0;
  for (const auto& tri : mesh.triangles)
    for (std::uint32_t v : tri) max_radius = std::max(max_radius, norm_sym(mesh.vertices[v] - centroid));
  if (!(max_radius > 0.0)) throw Error(ErrorCode::DegenerateGeometry, "all vertices coincide");

  const double half = 0.5 * resolution;
  const double scale = (half - 1.0) / max_radius;

  TriangleMesh out;
  out.vertices.reserve(mesh.vertices.size());
  for (const Vec3& v : mesh.vertices) {
    const Vec3 d = (v - centroid) * scale;
    out.vertices.push_back({d[0] + half, d[1] + half, d[2] + half});
  }
  out.triangles = mesh.triangles;
  out.dropped_degenerate = mesh.dropped_degenerate;
  return out;
}

namespace {

bool separated(double p0, double p1, double p2, double radius) {
  const double lo = std::min({p0, p1, p2});
  const double hi = std::max({p0, p1, p2});
  return lo > radius || hi < -radius;
}

// Axis test for edge `e` crossed with one box axis; pa/pb are the two vertex
// projections that differ, the third vertex projects equal to one of them.
bool edge_axis_separates(double pa, double pb, double radius) {
  return std::min(pa, pb) > radius || std::max(pa, pb) < -radius;
}

template <class SetVoxel>
void rasterize_triangle(const Vec3& a, const Vec3& b, const Vec3& c, int resolution, SetVoxel&& set_voxel) {
  int lo[3], hi[3];
  for (int k = 0; k < 3; ++k) {
    const double mn = std::min({a[k], b[k], c[k]});
    const double mx = std::max({a[k], b[k], c[k]});
    // Closed cells: a triangle on the plane x = i touches cells i-1 and i.
    lo[k] = std::max(0, static_cast<int>(std::ceil(mn)) - 1);
    hi[k] = std::min(resolution - 1, static_cast<int>(std::floor(mx)));
    if (lo[k] > hi[k]) return;
  }
  const Vec3 half{0.5, 0.5, 0.5};
  for (int z = lo[2]; z <= hi[2]; ++z)
    for (int y = lo[1]; y <= hi[1]; ++y)
      for (int x = lo[0]; x <= hi[0]; ++x) {
        const Vec3 center{x + 0.5, y + 0.5, z + 0.5};
        if (triangle_box_overlap(center, half, a, b, c)) set_voxel(x, y, z);
      }
}

}  // namespace

bool triangle_box_overlap(const Vec3& box_center, const Vec3& h, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 v0 = a - box_center, v1 = b - box_center, v2 = c - box_center;
  const Vec3 e0 = v1 - v0, e1 = v2 - v1, e2 = v0 - v2;

  // Box face normals.
  for (int k = 0; k < 3; ++k)
    if (separated(v0[k], v1[k], v2[k], h[k])) return false;

  // Edge x box-axis cross products. For axis u_k x e the projection of the
  // edge's own endpoints coincide, so only two distinct values need checking.
  const Vec3* edges[3] = {&e0, &e1, &e2};
  const Vec3* verts[3] = {&v0, &v1, &v2};
  for (int ei = 0; ei < 3; ++ei) {
    const Vec3& e = *edges[ei];
    const Vec3& p = *verts[ei];            // edge start
    const Vec3& q = *verts[(ei + 2) % 3];  // vertex opposite the edge
    const double fx = std::abs(e[0]), fy = std::abs(e[1]), fz = std::abs(e[2]);
    // axis x: (0, -e.z, e.y)
    if (edge_axis_separates(e[1] * p[2] - e[2] * p[1], e[1] * q[2] - e[2] * q[1], fz * h[1] + fy * h[2]))
      return false;
    // axis y: (e.z, 0, -e.x)
    if (edge_axis_separates(e[2] * p[0] - e[0] * p[2], e[2] * q[0] - e[0] * q[2], fz * h[0] + fx * h[2]))
      return false;
    // axis z: (-e.y, e.x, 0)
    if (edge_axis_separates(e[0] * p[1] - e[1] * p[0], e[0] * q[1] - e[1] * q[0], fy * h[0] + fx * h[1]))
      return false;
  }

  // Triangle plane against the box.
  const Vec3 n = cross(e0, e1);
  Vec3 vmin, vmax;
  for (int k = 0; k < 3; ++k) {
    if (n[k] > 0.0) {
      vmin[k] = -h[k] - v0[k];
      vmax[k] = h[k] - v0[k];
    } else {
      vmin[k] = h[k] - v0[k];
      vmax[k] = -h[k] - v0[k];
    }
  }
  if (dot(n, vmin) > 0.0) return false;
  return dot(n, vmax) >= 0.0;
}

VoxelGrid voxelize_surface(const TriangleMesh& normalized, int resolution) {
  VoxelGrid grid(resolution);
  const auto n = static_cast<std::ptrdiff_t>(normalized.triangles.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    const auto i = static_cast<std::size_t>(t);
    rasterize_triangle(normalized.corner(i, 0), normalized.corner(i, 1), normalized.corner(i, 2), resolution,
                       [&grid](int x, int y, int z) { grid.set_atomic(x, y, z); });
  }
  return grid;
}

VoxelGrid voxelize_surface_serial(const TriangleMesh& normalized, int resolution) {
  VoxelGrid grid(resolution);
  for (std::size_t t = 0; t < normalized.triangles.size(); ++t)
    rasterize_triangle(normalized.corner(t, 0), normalized.corner(t, 1), normalized.corner(t, 2), resolution,
                       [&grid](int x, int y, int z) { grid.set(x, y, z); });
  return grid;
}

VoxelGrid voxelize(const TriangleMesh& mesh, int resolution) {
  return voxelize_surface(normalize_mesh(mesh, resolution), resolution);
}

Bytes encode_fvox(const VoxelGrid& grid) {
  ByteWriter out;
  out.tag("FVOX");
  out.put(std::uint16_t{1});
  out.put(static_cast<std::uint16_t>(grid.resolution()));
  const std::size_t nbytes = (grid.voxel_count() + 7) / 8;
  const auto& words = grid.words();
  for (std::size_t i = 0; i < nbytes; ++i)
    out.put(static_cast<std::uint8_t>((words[i / 8] >> (8 * (i % 8))) & 0xFF));
  return out.take();
}

VoxelGrid decode_fvox(ByteView bytes) {
  ByteReader in(bytes, ErrorCode::MalformedFile);
  in.expect_tag("FVOX");
  if (in.get<std::uint16_t>() != 1) in.fail("unsupported FVOX version");
  const int resolution = in.get<std::uint16_t>();
  if (resolution == 0) in.fail("zero FVOX resolution");
  VoxelGrid grid(resolution);
  const std::size_t nbytes = (grid.voxel_count() + 7) / 8;
  ByteView payload = in.take(nbytes);
  if (in.remaining() != 0) in.fail("trailing bytes after FVOX payload");
  for (std::size_t i = 0; i < grid.voxel_count(); ++i)
    if ((payload[i / 8] >> (i % 8)) & 1u) {
      const int x = static_cast<int>(i % resolution);
      const int y = static_cast<int>((i / resolution) % resolution);
      const int z = static_cast<int>(i / (static_cast<std::size_t>(resolution) * resolution));
      grid.set(x, y, z);
    }
  return grid;
}

}  // namespace fabsearch
