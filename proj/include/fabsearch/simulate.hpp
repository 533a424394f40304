#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "fabsearch/index.hpp"
#include "fabsearch/mesh_io.hpp"
#include "fabsearch/sph.hpp"
#include "fabsearch/types.hpp"

namespace fabsearch {

// Random numbers. std::mt19937_64 has a fully specified output sequence;
// the distributions below are written out so results do not depend on the
// standard library's distribution implementations.
using Rng = std::mt19937_64;

/// Uniform in [0, 1) from the top 53 bits of one draw.
double uniform01(Rng& rng);
double uniform(Rng& rng, double lo, double hi);
/// Uniform integer in [0, n); n > 0.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

template <class T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[uniform_index(rng, i)]);
}

/// Seed of an independent substream; stream numbers are documented in
/// build_simulated_repository.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

enum class ShapeFamily { Washer, Bracket, Block, GearLike, Freeform };

inline constexpr std::array<ShapeFamily, 5> kAllFamilies = {ShapeFamily::Washer, ShapeFamily::Bracket,
                                                            ShapeFamily::Block, ShapeFamily::GearLike,
                                                            ShapeFamily::Freeform};

std::string_view to_string(ShapeFamily f);
std::optional<ShapeFamily> parse_shape_family(std::string_view text);

struct Range {
  double lo = 0.0;
  double hi = 0.0;

  friend bool operator==(const Range&, const Range&) = default;
};

using ShapeParams = std::map<std::string, double>;
using ParamRanges = std::map<std::string, Range>;

/// Parameter names a family reads, with the shipped default ranges.
///   Washer:   outer_radius, inner_radius, thickness
///   Bracket:  length, width, height, thickness
///   Block:    size_x, size_y, size_z, pockets, pocket_depth (fraction of size_z)
///   GearLike: outer_radius, tooth_depth, bore_radius, thickness, teeth
///   Freeform: radius, bump_amplitude (fraction of radius), bumps
const ParamRanges& default_param_ranges(ShapeFamily family);

/// One draw per parameter in name order.
ShapeParams sample_params(const ParamRanges& ranges, Rng& rng);

/// Procedural part. Only Freeform consumes `rng` (bump directions).
/// Throws InvalidParams for missing or inconsistent parameters.
TriangleMesh generate_part(ShapeFamily family, const ShapeParams& params, Rng& rng);

struct FamilySpec {
  std::string name;
  ShapeFamily shape = ShapeFamily::Block;
  Process process = Process::Machining;
  MaterialClass material = MaterialClass::Metal;
  std::size_t count = 0;
  ParamRanges params;

  friend bool operator==(const FamilySpec&, const FamilySpec&) = default;
};

struct ManufacturerSpec {
  std::string id;
  std::vector<Process> specialties;

  friend bool operator==(const ManufacturerSpec&, const ManufacturerSpec&) = default;
};

struct SimulationConfig {
  std::uint64_t rng_seed = 1;
  std::vector<FamilySpec> families;
  std::vector<ManufacturerSpec> manufacturers;
  std::map<Process, Range> tolerance_ranges;
  SignatureParams signature;

  friend bool operator==(const SimulationConfig&, const SimulationConfig&) = default;
};

/// 240 parts: washers (Forming), brackets (Machining), blocks (Casting) and
/// gear-like rings (Molding), 60 each; 8 metal manufacturers, 2 per process.
SimulationConfig default_desk_config();

/// Throws InvalidParams or UnservableProcess.
void validate(const SimulationConfig& config);

SimulationConfig load_simulation_config(std::string_view json_text);
std::string dump_simulation_config(const SimulationConfig& config);

/// One Uniform(lo, hi) draw per part, in order. Throws InvalidParams for a
/// process without a range.
std::vector<double> sample_tolerances(const std::vector<Process>& processes,
                                      const std::map<Process, Range>& ranges, Rng& rng);

struct ToleranceClassing {
  /// Ascending cluster means.
  std::vector<double> centroids;
  /// Boundaries between consecutive clusters, midway between the largest
  /// member of one cluster and the smallest of the next.
  std::vector<double> thresholds;

  /// Smallest-centroid cluster is High, largest Standard (k = 3).
  ToleranceClass classify(double tolerance_value) const;
  /// Cluster index in ascending order.
  std::size_t cluster_of(double value) const;
};

/// Globally optimal 1-D k-means (minimum within-cluster sum of squares) by
/// dynamic programming over the sorted distinct values.
/// Throws DegenerateData when fewer than k distinct values exist.
ToleranceClassing kmeans_1d(const std::vector<double>& values, std::size_t k = 3);

/// Each part goes to a specialist of its process; within a process the
/// parts are shuffled and dealt round-robin, so counts differ by at most 1.
/// Throws UnservableProcess.
std::vector<std::string> assign_manufacturers(const std::vector<Process>& processes,
                                              const std::vector<ManufacturerSpec>& manufacturers, Rng& rng);

struct GroundTruthRow {
  PartId part_id = 0;
  Process process = Process::Machining;
  std::string manufacturer_id;
  double tolerance_value = 0.0;
  ToleranceClass tolerance_class = ToleranceClass::Standard;
  MaterialClass material_class = MaterialClass::Metal;

  friend bool operator==(const GroundTruthRow&, const GroundTruthRow&) = default;
};

using GroundTruth = std::vector<GroundTruthRow>;

/// CSV with header `part_id,process,manufacturer_id,tolerance_value,tolerance_class,material_class`.
std::string dump_ground_truth(const GroundTruth& truth);
/// Throws SchemaError.
GroundTruth load_ground_truth(std::string_view csv);

struct SimulationResult {
  Repository repository;
  GroundTruth truth;
  ToleranceClassing classing;
  /// Generated meshes, parallel to repository records.
  std::vector<TriangleMesh> meshes;
};

/// Part ids run from 1 in family order. Substreams: family i draws from
/// stream i, tolerances from stream 1000, manufacturer assignment from
/// stream 1001.
SimulationResult build_simulated_repository(const SimulationConfig& config);

}  // namespace fabsearch
