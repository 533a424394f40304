#pragma once

// Shared fixtures for the test binaries: small hand-built meshes, the 24
// proper axis-aligned rotations and random generators.

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fabsearch/graph.hpp"
#include "fabsearch/index.hpp"
#include "fabsearch/mesh_io.hpp"

namespace fabsearch::testing {

inline TriangleMesh make_mesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles) {
  TriangleMesh m;
  m.vertices = std::move(vertices);
  for (const auto& t : triangles) push_triangle(m, t);
  return m;
}

/// Axis-aligned box soup, 12 triangles, outward winding.
inline TriangleMesh box_mesh(const Vec3& lo, const Vec3& hi) {
  std::vector<Vec3> v;
  for (int i = 0; i < 8; ++i) v.push_back({(i & 1) ? hi[0] : lo[0], (i & 2) ? hi[1] : lo[1], (i & 4) ? hi[2] : lo[2]});
  return make_mesh(v, {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
                       {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}});
}

/// Unit cube [0,1]^3 as 12 facets of ASCII STL.
inline const char* kUnitCubeAsciiStl = R"(solid cube
  facet normal 0 0 -1
    outer loop
      vertex 0 0 0
      vertex 0 1 0
      vertex 1 0 0
    endloop
  endfacet
  facet normal 0 0 -1
    outer loop
      vertex 1 0 0
      vertex 0 1 0
      vertex 1 1 0
    endloop
  endfacet
  facet normal 0 0 1
    outer loop
      vertex 0 0 1
      vertex 1 0 1
      vertex 0 1 1
    endloop
  endfacet
  facet normal 0 0 1
    outer loop
      vertex 1 0 1
      vertex 1 1 1
      vertex 0 1 1
    endloop
  endfacet
  facet normal 0 -1 0
    outer loop
      vertex 0 0 0
      vertex 1 0 0
      vertex 0 0 1
    endloop
  endfacet
  facet normal 0 -1 0
    outer loop
      vertex 1 0 0
      vertex 1 0 1
      vertex 0 0 1
    endloop
  endfacet
  facet normal 0 1 0
    outer loop
      vertex 0 1 0
      vertex 0 1 1
      vertex 1 1 0
    endloop
  endfacet
  facet normal 0 1 0
    outer loop
      vertex 1 1 0
      vertex 0 1 1
      vertex 1 1 1
    endloop
  endfacet
  facet normal -1 0 0
    outer loop
      vertex 0 0 0
      vertex 0 0 1
      vertex 0 1 0
    endloop
  endfacet
  facet normal -1 0 0
    outer loop
      vertex 0 1 0
      vertex 0 0 1
      vertex 0 1 1
    endloop
  endfacet
  facet normal 1 0 0
    outer loop
      vertex 1 0 0
      vertex 1 1 0
      vertex 1 0 1
    endloop
  endfacet
  facet normal 1 0 0
    outer loop
      vertex 1 1 0
      vertex 1 1 1
      vertex 1 0 1
    endloop
  endfacet
endsolid cube
)";

/// A signed permutation matrix: row i of the result is sign[i] * x[perm[i]].
struct AxisRotation {
  std::array<int, 3> perm;
  std::array<int, 3> sign;

  Vec3 apply(const Vec3& v) const {
    return {sign[0] * v[perm[0]], sign[1] * v[perm[1]], sign[2] * v[perm[2]]};
  }
};

/// The 24 signed permutations with determinant +1 (the cube's rotation group).
inline std::vector<AxisRotation> proper_axis_rotations() {
  std::vector<AxisRotation> out;
  const std::array<std::array<int, 3>, 6> perms = {{{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  const std::array<int, 6> perm_parity = {1, -1, -1, 1, 1, -1};
  for (int p = 0; p < 6; ++p)
    for (int s = 0; s < 8; ++s) {
      std::array<int, 3> sign = {(s & 1) ? -1 : 1, (s & 2) ? -1 : 1, (s & 4) ? -1 : 1};
      if (perm_parity[static_cast<std::size_t>(p)] * sign[0] * sign[1] * sign[2] == 1)
        out.push_back({perms[static_cast<std::size_t>(p)], sign});
    }
  return out;
}

inline TriangleMesh transform(const TriangleMesh& mesh, const AxisRotation& rot) {
  TriangleMesh out = mesh;
  for (Vec3& v : out.vertices) v = rot.apply(v);
  return out;
}

using Mat3 = std::array<std::array<double, 3>, 3>;

/// Uniformly random rotation from a random unit quaternion.
inline Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  double q[4];
  double n = 0;
  for (double& c : q) {
    c = g(rng);
    n += c * c;
  }
  n = std::sqrt(n);
  for (double& c : q) c /= n;
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  return {{{1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)},
           {2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)},
           {2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)}}};
}

inline TriangleMesh transform(const TriangleMesh& mesh, const Mat3& m) {
  TriangleMesh out = mesh;
  for (Vec3& v : out.vertices) {
    const Vec3 p = v;
    for (int i = 0; i < 3; ++i) v[i] = m[i][0] * p[0] + m[i][1] * p[1] + m[i][2] * p[2];
  }
  return out;
}

inline TriangleMesh translate(const TriangleMesh& mesh, const Vec3& offset) {
  TriangleMesh out = mesh;
  for (Vec3& v : out.vertices) v = v + offset;
  return out;
}

/// Random triangle soup inside [lo, hi]^3.
inline TriangleMesh random_soup(std::mt19937_64& rng, int triangles, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  TriangleMesh m;
  while (static_cast<int>(m.triangles.size()) < triangles) {
    const auto base = static_cast<std::uint32_t>(m.vertices.size());
    for (int c = 0; c < 3; ++c) m.vertices.push_back({u(rng), u(rng), u(rng)});
    push_triangle(m, {base, base + 1, base + 2});
  }
  m.dropped_degenerate = 0;
  return m;
}

/// Signature with every entry zero except the first, which holds `x`, so
/// signatures behave like points on a line.
inline SphSignature line_signature(double x, int shells = 2, int freqs = 2) {
  SphSignature s(shells, freqs);
  s.power[0] = x;
  return s;
}

inline SphSignature random_signature(std::mt19937_64& rng, int shells = 4, int freqs = 4) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SphSignature s(shells, freqs);
  for (double& v : s.power) v = u(rng);
  return s;
}

inline PartRecord make_record(PartId id, SphSignature sig) {
  PartRecord r;
  r.meta.part_id = id;
  r.signature = std::move(sig);
  return r;
}

inline Repository random_repository(std::mt19937_64& rng, std::size_t n, int shells = 4, int freqs = 4) {
  Repository repo;
  for (std::size_t i = 0; i < n; ++i) repo.add(make_record(static_cast<PartId>(i + 1), random_signature(rng, shells, freqs)));
  return repo;
}

/// Neighbourhood of the worked ranking example: members tagged by
/// manufacturer and tolerance, listed nearest first.
struct TaggedMember {
  const char* manufacturer;
  ToleranceClass tolerance;
};

inline const std::vector<TaggedMember>& worked_example_members() {
  static const std::vector<TaggedMember> members = {
      {"I", ToleranceClass::High}, {"J", ToleranceClass::High}, {"H", ToleranceClass::High},
      {"A", ToleranceClass::High}, {"L", ToleranceClass::High}, {"M", ToleranceClass::High},
      {"H", ToleranceClass::High}, {"H", ToleranceClass::High}, {"C", ToleranceClass::Standard}};
  return members;
}

/// Repository plus neighbourhood holding `members` at distances 1, 2, ...
inline std::pair<Repository, Neighborhood> tagged_neighborhood(const std::vector<TaggedMember>& members,
                                                               MaterialClass material = MaterialClass::Metal) {
  Repository repo;
  Neighborhood n;
  PartId id = 1;
  for (const TaggedMember& t : members) {
    PartRecord r = make_record(id, line_signature(static_cast<double>(id)));
    r.meta.material_class = material;
    r.meta.manufacturer_id = t.manufacturer;
    r.meta.tolerance_class = t.tolerance;
    repo.add(r);
    n.members.push_back({id, static_cast<double>(id), Direction::Both});
    ++id;
  }
  return {std::move(repo), std::move(n)};
}

}  // namespace fabsearch::testing
