#include "fabsearch/sph.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fabsearch/error.hpp"

namespace fabsearch {

std::vector<ShellSamples> bin_shells(const VoxelGrid& grid, int n_shells) {
  if (n_shells < 1) throw Error(ErrorCode::InvalidParams, "n_shells must be >= 1");
  std::vector<ShellSamples> shells(static_cast<std::size_t>(n_shells));
  for (int r = 0; r < n_shells; ++r) shells[static_cast<std::size_t>(r)].shell_index = r;

  const double c = grid.center();
  const double delta = c / n_shells;
  for (const auto& [x, y, z] : grid.occupied()) {
    const Vec3 d{x + 0.5 - c, y + 0.5 - c, z + 0.5 - c};
    const double radius = norm_sym(d);
    const int shell = std::min(n_shells - 1, static_cast<int>(std::floor(radius / delta)));
    ShellPoint p;
    if (radius > 0.0) {
      p.theta = std::acos(std::clamp(d[2] / radius, -1.0, 1.0));
      p.phi = std::atan2(d[1], d[0]);
      if (p.phi < 0.0) p.phi += 2.0 * std::numbers::pi;
    }
    shells[static_cast<std::size_t>(shell)].points.push_back(p);
  }
  return shells;
}

double assoc_legendre(int l, int m, double x) {
  if (l < 0 || m < 0 || m > l) throw Error(ErrorCode::DomainError, "assoc_legendre needs 0 <= m <= l");
  if (!(std::abs(x) <= 1.0 + 1e-12)) throw Error(ErrorCode::DomainError, "assoc_legendre needs |x| <= 1");
  x = std::clamp(x, -1.0, 1.0);

  const double s = std::sqrt((1.0 - x) * (1.0 + x));
  double pmm = 1.0;
  for (int i = 1; i <= m; ++i) pmm *= (2.0 * i - 1.0) * s;
  if (l == m) return pmm;

  double prev = pmm;
  double cur = (2.0 * m + 1.0) * x * pmm;
  for (int ll = m + 2; ll <= l; ++ll) {
    const double next = ((2.0 * ll - 1.0) * x * cur - (ll + m - 1.0) * prev) / (ll - m);
    prev = cur;
    cur = next;
  }
  return cur;
}

namespace {

// Recurrence factors for the orthonormal functions
// Pbar_l^m = N_lm P_l^m with N_lm = sqrt((2l+1)/(4 pi) (l-m)!/(l+m)!).
struct NormalizedLegendreTable {
  explicit NormalizedLegendreTable(int n_freq) : n(n_freq), a(sh_count(n_freq)), b(sh_count(n_freq)), diag(n_freq) {
    for (int m = 0; m < n; ++m) {
      diag[static_cast<std::size_t>(m)] = m == 0 ? 0.0 : std::sqrt((2.0 * m + 1.0) / (2.0 * m));
      for (int l = m + 2; l < n; ++l) {
        const double l2 = static_cast<double>(l) * l, m2 = static_cast<double>(m) * m;
        const double lm1 = static_cast<double>(l - 1) * (l - 1);
        a[sh_index(l, m)] = std::sqrt((4.0 * l2 - 1.0) / (l2 - m2));
        b[sh_index(l, m)] = std::sqrt((lm1 - m2) / (4.0 * lm1 - 1.0));
      }
    }
  }
  int n;
  std::vector<double> a, b, diag;
};

void accumulate_point(const NormalizedLegendreTable& tab, const ShellPoint& p,
                      std::vector<std::complex<double>>& coeffs) {
  const double x = std::cos(p.theta);
  const double s = std::sin(p.theta);
  const std::complex<double> step(std::cos(p.phi), -std::sin(p.phi));

  double pmm = 0.5 / std::sqrt(std::numbers::pi);
  std::complex<double> phase(p.weight, 0.0);
  for (int m = 0; m < tab.n; ++m) {
    if (m > 0) {
      pmm *= tab.diag[static_cast<std::size_t>(m)] * s;
      phase *= step;
    }
    coeffs[sh_index(m, m)] += pmm * phase;
    if (m + 1 >= tab.n) break;
    double prev = pmm;
    double cur = std::sqrt(2.0 * m + 3.0) * x * pmm;
    coeffs[sh_index(m + 1, m)] += cur * phase;
    for (int l = m + 2; l < tab.n; ++l) {
      const std::size_t i = sh_index(l, m);
      const double next = tab.a[i] * (x * cur - tab.b[i] * prev);
      prev = cur;
      cur = next;
      coeffs[i] += cur * phase;
    }
  }
}

std::vector<double> power_from_coefficients(const std::vector<std::complex<double>>& coeffs, int n_freq) {
  std::vector<double> power(static_cast<std::size_t>(n_freq), 0.0);
  for (int l = 0; l < n_freq; ++l) {
    double sum = std::norm(coeffs[sh_index(l, 0)]);
    for (int m = 1; m <= l; ++m) sum += 2.0 * std::norm(coeffs[sh_index(l, m)]);
    power[static_cast<std::size_t>(l)] = std::sqrt(sum);
  }
  return power;
}

void check_freq(int n_freq) {
  if (n_freq < 1) throw Error(ErrorCode::InvalidParams, "n_freq must be >= 1");
}

}  // namespace

std::vector<std::complex<double>> sh_coefficients(const ShellSamples& shell, int n_freq) {
  check_freq(n_freq);
  const NormalizedLegendreTable tab(n_freq);
  std::vector<std::complex<double>> coeffs(sh_count(n_freq));
  for (const ShellPoint& p : shell.points) accumulate_point(tab, p, coeffs);
  return coeffs;
}

std::vector<double> sh_decompose(const ShellSamples& shell, int n_freq) {
  return power_from_coefficients(sh_coefficients(shell, n_freq), n_freq);
}

double SphSignature::norm() const {
  double s = 0.0;
  for (double v : power) s += v * v;
  return std::sqrt(s);
}

namespace {

void fill_row(SphSignature& sig, const ShellSamples& shell) {
  const auto row = sh_decompose(shell, sig.n_freq);
  std::copy(row.begin(), row.end(), sig.power.begin() + static_cast<std::ptrdiff_t>(shell.shell_index) * sig.n_freq);
}

}  // namespace

SphSignature signature(const VoxelGrid& grid, int n_shells, int n_freq) {
  check_freq(n_freq);
  const auto shells = bin_shells(grid, n_shells);
  SphSignature sig(n_shells, n_freq);
#pragma omp parallel for schedule(dynamic, 1)
  for (int r = 0; r < n_shells; ++r) fill_row(sig, shells[static_cast<std::size_t>(r)]);
  return sig;
}

SphSignature signature_serial(const VoxelGrid& grid, int n_shells, int n_freq) {
  check_freq(n_freq);
  const auto shells = bin_shells(grid, n_shells);
  SphSignature sig(n_shells, n_freq);
  for (const auto& shell : shells) fill_row(sig, shell);
  return sig;
}

SphSignature mesh_signature(const TriangleMesh& mesh, const SignatureParams& params) {
  const VoxelGrid grid = voxelize(mesh, params.resolution);
  SphSignature sig = signature(grid, params.n_shells, params.n_freq);
  if (params.normalize_amplitude) {
    const double occupied = static_cast<double>(grid.count());
    for (double& v : sig.power) v /= occupied;
  }
  return sig;
}

double distance(const SphSignature& a, const SphSignature& b) {
  if (a.n_shells != b.n_shells || a.n_freq != b.n_freq || a.power.size() != b.power.size())
    throw Error(ErrorCode::ShapeMismatch, "signature dimensions differ");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.power.size(); ++i) {
    const double d = a.power[i] - b.power[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

Bytes encode_fsig(const SphSignature& sig, PartId part_id) {
  ByteWriter out;
  out.tag("FSIG");
  out.put(std::uint16_t{1});
  out.put(static_cast<std::uint16_t>(sig.n_shells));
  out.put(static_cast<std::uint16_t>(sig.n_freq));
  out.put(static_cast<std::uint32_t>(part_id));
  for (double v : sig.power) out.put(v);
  return out.take();
}

SignatureFile decode_fsig(ByteView bytes) {
  ByteReader in(bytes, ErrorCode::MalformedFile);
  in.expect_tag("FSIG");
  if (in.get<std::uint16_t>() != 1) in.fail("unsupported FSIG version");
  const int shells = in.get<std::uint16_t>();
  const int freqs = in.get<std::uint16_t>();
  SignatureFile file;
  file.part_id = in.get<std::uint32_t>();
  if (shells == 0 || freqs == 0) in.fail("FSIG with zero dimension");
  const std::size_t n = static_cast<std::size_t>(shells) * freqs;
  if (in.remaining() != n * sizeof(double)) in.fail("FSIG payload length does not match its dimensions");
  file.signature = SphSignature(shells, freqs);
  for (std::size_t i = 0; i < n; ++i) file.signature.power[i] = in.get<double>();
  return file;
}

}  // namespace fabsearch
