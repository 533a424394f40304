#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "fabsearch/binary_io.hpp"
#include "fabsearch/mesh_io.hpp"
#include "fabsearch/types.hpp"
#include "fabsearch/voxelize.hpp"

namespace fabsearch {

inline constexpr int kDefaultShells = 16;
inline constexpr int kDefaultFrequencies = 16;

struct ShellPoint {
  double theta = 0.0;  // polar angle in [0, pi]
  double phi = 0.0;    // azimuth in [0, 2 pi)
  double weight = 1.0;
};

/// Occupied voxel centers whose distance from the grid center falls in
/// [r * delta, (r + 1) * delta) with delta = (R / 2) / n_shells.
struct ShellSamples {
  int shell_index = 0;
  std::vector<ShellPoint> points;
};

/// Bins occupied voxel centers into concentric shells. Voxels at radius
/// >= R/2 (rasterization slack) land in the outermost shell. A voxel center
/// that coincides with the grid center (odd R) gets theta = phi = 0.
std::vector<ShellSamples> bin_shells(const VoxelGrid& grid, int n_shells = kDefaultShells);

/// Associated Legendre function P_l^m(x) for 0 <= m <= l, WITHOUT the
/// Condon-Shortley phase (P_1^1(x) = +sqrt(1 - x^2)), matching
/// std::assoc_legendre. Computed by the diagonal recurrence
/// P_m^m = (2m-1)!! (1-x^2)^{m/2} followed by the upward recurrence in l.
/// Throws DomainError when |x| > 1 + 1e-12 or the indices are invalid.
double assoc_legendre(int l, int m, double x);

/// Packed index of coefficient (l, m), m >= 0: l (l + 1) / 2 + m.
constexpr std::size_t sh_index(int l, int m) {
  return static_cast<std::size_t>(l) * static_cast<std::size_t>(l + 1) / 2 + static_cast<std::size_t>(m);
}
constexpr std::size_t sh_count(int n_freq) { return sh_index(n_freq, 0); }

/// a_{l,m} = sum_p w_p conj(Y_l^m(theta_p, phi_p)) for l < n_freq and
/// 0 <= m <= l, using orthonormal complex harmonics
/// Y_l^m = N_lm P_l^m(cos theta) e^{i m phi}. Coefficients for m < 0 follow
/// from a_{l,-m} = (-1)^m conj(a_{l,m}) (real weights) and are not stored.
std::vector<std::complex<double>> sh_coefficients(const ShellSamples& shell, int n_freq);

/// Per-degree power: power[l] = sqrt(sum_{|m| <= l} |a_{l,m}|^2).
std::vector<double> sh_decompose(const ShellSamples& shell, int n_freq = kDefaultFrequencies);

/// n_shells x n_freq matrix of non-negative per-degree powers, row-major
/// by shell.
struct SphSignature {
  int n_shells = 0;
  int n_freq = 0;
  std::vector<double> power;

  SphSignature() = default;
  SphSignature(int shells, int freqs) : n_shells(shells), n_freq(freqs), power(static_cast<std::size_t>(shells) * freqs, 0.0) {}

  double& at(int shell, int degree) { return power[static_cast<std::size_t>(shell) * n_freq + degree]; }
  double at(int shell, int degree) const { return power[static_cast<std::size_t>(shell) * n_freq + degree]; }
  double norm() const;

  friend bool operator==(const SphSignature&, const SphSignature&) = default;
};

struct SignatureParams {
  int resolution = kDefaultResolution;
  int n_shells = kDefaultShells;
  int n_freq = kDefaultFrequencies;
  // Divide every entry by the number of occupied voxels. Off by default:
  // at fixed scale the amount of surface is itself shape information.
  bool normalize_amplitude = false;

  friend bool operator==(const SignatureParams&, const SignatureParams&) = default;
};

/// Signature of a voxel grid; shells are decomposed in parallel.
SphSignature signature(const VoxelGrid& grid, int n_shells = kDefaultShells, int n_freq = kDefaultFrequencies);
/// Single-threaded reference for signature().
SphSignature signature_serial(const VoxelGrid& grid, int n_shells = kDefaultShells,
                              int n_freq = kDefaultFrequencies);

/// Full pipeline: normalize, voxelize, decompose.
SphSignature mesh_signature(const TriangleMesh& mesh, const SignatureParams& params = {});

/// L2 (Frobenius) norm of the entrywise difference. Throws ShapeMismatch.
double distance(const SphSignature& a, const SphSignature& b);

// Signature file: "FSIG", u16 version, u16 n_shells, u16 n_freq, u32
// part_id, then n_shells * n_freq f64 row-major, little-endian.
struct SignatureFile {
  PartId part_id = 0;
  SphSignature signature;
};

Bytes encode_fsig(const SphSignature& sig, PartId part_id);
SignatureFile decode_fsig(ByteView bytes);

}  // namespace fabsearch
