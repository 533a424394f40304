#include "fabsearch/simulate.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <limits>
#include <numbers>

#include "fabsearch/error.hpp"

namespace fabsearch {

// ---- random numbers ----

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do x = rng();
  while (x >= limit);
  return x % n;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) { return splitmix64(seed ^ splitmix64(stream)); }

// ---- shape families ----

std::string_view to_string(ShapeFamily f) {
  switch (f) {
    case ShapeFamily::Washer: return "Washer";
    case ShapeFamily::Bracket: return "Bracket";
    case ShapeFamily::Block: return "Block";
    case ShapeFamily::GearLike: return "GearLike";
    case ShapeFamily::Freeform: return "Freeform";
  }
  return "Block";
}

std::optional<ShapeFamily> parse_shape_family(std::string_view text) {
  for (ShapeFamily f : kAllFamilies) {
    const std::string_view name = to_string(f);
    if (name.size() == text.size() &&
        std::equal(name.begin(), name.end(), text.begin(), [](char a, char b) { return std::tolower(a) == std::tolower(b); }))
      return f;
  }
  return std::nullopt;
}

const ParamRanges& default_param_ranges(ShapeFamily family) {
  static const std::map<ShapeFamily, ParamRanges> defaults = {
      {ShapeFamily::Washer, {{"outer_radius", {8, 12}}, {"inner_radius", {3, 6}}, {"thickness", {0.5, 1.5}}}},
      {ShapeFamily::Bracket,
       {{"length", {20, 30}}, {"width", {8, 14}}, {"height", {12, 22}}, {"thickness", {1.5, 3}}}},
      {ShapeFamily::Block,
       {{"size_x", {20, 30}}, {"size_y", {15, 25}}, {"size_z", {8, 14}}, {"pockets", {1, 3}}, {"pocket_depth", {0.3, 0.7}}}},
      {ShapeFamily::GearLike,
       {{"outer_radius", {10, 12}}, {"tooth_depth", {2, 3}}, {"bore_radius", {2, 3}}, {"thickness", {6, 9}}, {"teeth", {10, 10}}}},
      {ShapeFamily::Freeform, {{"radius", {8, 12}}, {"bump_amplitude", {0.1, 0.3}}, {"bumps", {3, 8}}}},
  };
  return defaults.at(family);
}

ShapeParams sample_params(const ParamRanges& ranges, Rng& rng) {
  ShapeParams out;
  for (const auto& [name, r] : ranges) out[name] = uniform(rng, r.lo, r.hi);
  return out;
}

namespace {

[[noreturn]] void bad_params(ShapeFamily f, const std::string& what) {
  throw Error(ErrorCode::InvalidParams, std::string(to_string(f)) + ": " + what);
}

double need(ShapeFamily f, const ShapeParams& p, const char* name) {
  auto it = p.find(name);
  if (it == p.end()) bad_params(f, std::string("missing parameter ") + name);
  if (!std::isfinite(it->second)) bad_params(f, std::string(name) + " is not finite");
  return it->second;
}

std::uint32_t add_vertex(TriangleMesh& m, const Vec3& v) {
  m.vertices.push_back(v);
  return static_cast<std::uint32_t>(m.vertices.size() - 1);
}

void add_quad(TriangleMesh& m, std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d) {
  push_triangle(m, {a, b, c});
  push_triangle(m, {a, c, d});
}

void add_box(TriangleMesh& m, const Vec3& lo, const Vec3& hi) {
  std::uint32_t v[8];
  for (int i = 0; i < 8; ++i)
    v[i] = add_vertex(m, {(i & 1) ? hi[0] : lo[0], (i & 2) ? hi[1] : lo[1], (i & 4) ? hi[2] : lo[2]});
  add_quad(m, v[0], v[2], v[3], v[1]);
  add_quad(m, v[4], v[5], v[7], v[6]);
  add_quad(m, v[0], v[1], v[5], v[4]);
  add_quad(m, v[2], v[6], v[7], v[3]);
  add_quad(m, v[0], v[4], v[6], v[2]);
  add_quad(m, v[1], v[3], v[7], v[5]);
}

// Closed ring extruded along z: outer and inner radius per angular sample.
void add_ring(TriangleMesh& m, const std::vector<double>& outer, const std::vector<double>& inner, double thickness) {
  const std::size_t n = outer.size();
  std::vector<std::array<std::uint32_t, 4>> ring(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    const double c = std::cos(a), s = std::sin(a);
    ring[i] = {add_vertex(m, {outer[i] * c, outer[i] * s, 0}), add_vertex(m, {outer[i] * c, outer[i] * s, thickness}),
               add_vertex(m, {inner[i] * c, inner[i] * s, 0}), add_vertex(m, {inner[i] * c, inner[i] * s, thickness})};
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = ring[i];
    const auto& q = ring[(i + 1) % n];
    add_quad(m, p[1], q[1], q[3], p[3]);  // top
    add_quad(m, p[0], p[2], q[2], q[0]);  // bottom
    add_quad(m, p[0], q[0], q[1], p[1]);  // outer wall
    add_quad(m, p[2], p[3], q[3], q[2]);  // inner wall
  }
}

TriangleMesh washer(const ShapeParams& p) {
  const auto f = ShapeFamily::Washer;
  const double ro = need(f, p, "outer_radius"), ri = need(f, p, "inner_radius"), t = need(f, p, "thickness");
  if (!(ri > 0 && ro > ri && t > 0)) bad_params(f, "need 0 < inner_radius < outer_radius and thickness > 0");
  TriangleMesh m;
  add_ring(m, std::vector<double>(64, ro), std::vector<double>(64, ri), t);
  return m;
}

TriangleMesh bracket(const ShapeParams& p) {
  const auto f = ShapeFamily::Bracket;
  const double l = need(f, p, "length"), w = need(f, p, "width"), h = need(f, p, "height"), t = need(f, p, "thickness");
  if (!(w > 0 && t > 0 && l > t && h > t)) bad_params(f, "need width, thickness > 0 and length, height > thickness");
  TriangleMesh m;
  add_box(m, {0, 0, 0}, {l, w, t});
  add_box(m, {0, 0, t}, {t, w, h});
  return m;
}

TriangleMesh block(const ShapeParams& p) {
  const auto f = ShapeFamily::Block;
  const double x = need(f, p, "size_x"), y = need(f, p, "size_y"), z = need(f, p, "size_z");
  const double depth = need(f, p, "pocket_depth");
  const long pockets = std::lround(need(f, p, "pockets"));
  if (!(x > 0 && y > 0 && z > 0)) bad_params(f, "sizes must be positive");
  if (pockets < 0 || pockets > 64) bad_params(f, "pockets must be in [0, 64]");
  if (!(depth > 0 && depth < 1)) bad_params(f, "pocket_depth must be in (0, 1)");
  TriangleMesh m;
  add_box(m, {0, 0, 0}, {x, y, z});
  const double slot = x / static_cast<double>(std::max(1L, pockets));
  const double floor_z = z * (1 - depth);
  for (long i = 0; i < pockets; ++i) {
    const double x0 = slot * (static_cast<double>(i) + 0.2), x1 = slot * (static_cast<double>(i) + 0.8);
    const double y0 = 0.2 * y, y1 = 0.8 * y;
    std::uint32_t b[4], t[4];
    const double xs[4] = {x0, x1, x1, x0}, ys[4] = {y0, y0, y1, y1};
    for (int c = 0; c < 4; ++c) {
      b[c] = add_vertex(m, {xs[c], ys[c], floor_z});
      t[c] = add_vertex(m, {xs[c], ys[c], z});
    }
    add_quad(m, b[0], b[1], b[2], b[3]);
    for (int c = 0; c < 4; ++c) add_quad(m, b[c], t[c], t[(c + 1) % 4], b[(c + 1) % 4]);
  }
  return m;
}

TriangleMesh gear_like(const ShapeParams& p) {
  const auto f = ShapeFamily::GearLike;
  const double ro = need(f, p, "outer_radius"), depth = need(f, p, "tooth_depth"), bore = need(f, p, "bore_radius");
  const double t = need(f, p, "thickness");
  const long teeth = std::lround(need(f, p, "teeth"));
  if (!(depth > 0 && bore > 0 && ro - depth > bore && t > 0)) bad_params(f, "need 0 < bore_radius < outer_radius - tooth_depth");
  if (teeth < 3 || teeth > 256) bad_params(f, "teeth must be in [3, 256]");
  // Four samples per tooth: root, tip, tip, root.
  const std::size_t n = static_cast<std::size_t>(teeth) * 4;
  std::vector<double> outer(n), inner(n, bore);
  for (std::size_t i = 0; i < n; ++i) outer[i] = (i % 4 == 1 || i % 4 == 2) ? ro : ro - depth;
  TriangleMesh m;
  add_ring(m, outer, inner, t);
  return m;
}

TriangleMesh freeform(const ShapeParams& p, Rng& rng) {
  const auto f = ShapeFamily::Freeform;
  const double radius = need(f, p, "radius"), amp = need(f, p, "bump_amplitude");
  const long bumps = std::lround(need(f, p, "bumps"));
  if (!(radius > 0 && amp >= 0)) bad_params(f, "need radius > 0 and bump_amplitude >= 0");
  if (bumps < 0 || bumps > 256) bad_params(f, "bumps must be in [0, 256]");
  std::vector<Vec3> centers;
  for (long b = 0; b < bumps; ++b) {
    const double z = uniform(rng, -1, 1), phi = uniform(rng, 0, 2 * std::numbers::pi);
    const double s = std::sqrt(std::max(0.0, 1 - z * z));
    centers.push_back({s * std::cos(phi), s * std::sin(phi), z});
  }
  auto point = [&](const Vec3& d) {
    double r = 1;
    for (const Vec3& c : centers) r += amp * std::exp(-(1 - dot(d, c)) / 0.08);
    return d * (radius * r);
  };
  const int lat = 24, lon = 48;
  TriangleMesh m;
  const std::uint32_t north = add_vertex(m, point({0, 0, 1}));
  const std::uint32_t south = add_vertex(m, point({0, 0, -1}));
  std::vector<std::vector<std::uint32_t>> rows;
  for (int i = 1; i < lat; ++i) {
    const double th = std::numbers::pi * i / lat;
    std::vector<std::uint32_t> row;
    for (int j = 0; j < lon; ++j) {
      const double ph = 2 * std::numbers::pi * j / lon;
      row.push_back(add_vertex(m, point({std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)})));
    }
    rows.push_back(std::move(row));
  }
  for (int j = 0; j < lon; ++j) {
    const int k = (j + 1) % lon;
    push_triangle(m, {north, rows.front()[static_cast<std::size_t>(j)], rows.front()[static_cast<std::size_t>(k)]});
    push_triangle(m, {south, rows.back()[static_cast<std::size_t>(k)], rows.back()[static_cast<std::size_t>(j)]});
    for (std::size_t i = 0; i + 1 < rows.size(); ++i)
      add_quad(m, rows[i][static_cast<std::size_t>(j)], rows[i + 1][static_cast<std::size_t>(j)],
               rows[i + 1][static_cast<std::size_t>(k)], rows[i][static_cast<std::size_t>(k)]);
  }
  return m;
}

}  // namespace

TriangleMesh generate_part(ShapeFamily family, const ShapeParams& params, Rng& rng) {
  TriangleMesh m;
  switch (family) {
    case ShapeFamily::Washer: m = washer(params); break;
    case ShapeFamily::Bracket: m = bracket(params); break;
    case ShapeFamily::Block: m = block(params); break;
    case ShapeFamily::GearLike: m = gear_like(params); break;
    case ShapeFamily::Freeform: m = freeform(params, rng); break;
  }
  m.dropped_degenerate = 0;
  return m;
}

// ---- configuration ----

SimulationConfig default_desk_config() {
  SimulationConfig c;
  c.rng_seed = 20240601;
  const std::pair<ShapeFamily, Process> families[] = {{ShapeFamily::Washer, Process::Forming},
                                                      {ShapeFamily::Bracket, Process::Machining},
                                                      {ShapeFamily::Block, Process::Casting},
                                                      {ShapeFamily::GearLike, Process::Molding}};
  for (const auto& [shape, process] : families) {
    FamilySpec f;
    f.name = std::string(to_string(shape));
    f.shape = shape;
    f.process = process;
    f.count = 60;
    f.params = default_param_ranges(shape);
    c.families.push_back(f);
  }
  int n = 0;
  for (Process p : kAllProcesses)
    for (int i = 0; i < 2; ++i) c.manufacturers.push_back({"M" + std::to_string(++n), {p}});
  c.tolerance_ranges = {{Process::Machining, {0.005, 0.015}},
                        {Process::Casting, {0.04, 0.07}},
                        {Process::Molding, {0.05, 0.08}},
                        {Process::Forming, {0.15, 0.25}}};
  return c;
}

void validate(const SimulationConfig& c) {
  for (const auto& [process, r] : c.tolerance_ranges)
    if (!(r.lo > 0 && r.lo < r.hi && std::isfinite(r.hi)))
      throw Error(ErrorCode::InvalidParams, "tolerance range for " + std::string(to_string(process)) + " needs 0 < low < high");
  for (const FamilySpec& f : c.families) {
    if (!c.tolerance_ranges.count(f.process))
      throw Error(ErrorCode::InvalidParams, "no tolerance range for process " + std::string(to_string(f.process)));
    const bool served = std::any_of(c.manufacturers.begin(), c.manufacturers.end(), [&](const ManufacturerSpec& m) {
      return std::find(m.specialties.begin(), m.specialties.end(), f.process) != m.specialties.end();
    });
    if (!served)
      throw Error(ErrorCode::UnservableProcess, "no manufacturer specializes in " + std::string(to_string(f.process)));
    for (const auto& [name, r] : f.params)
      if (!(r.lo <= r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi))
        throw Error(ErrorCode::InvalidParams, "family " + f.name + ": bad range for " + name);
  }
  for (std::size_t i = 0; i < c.manufacturers.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (c.manufacturers[i].id == c.manufacturers[j].id)
        throw Error(ErrorCode::InvalidParams, "duplicate manufacturer id " + c.manufacturers[i].id);
}

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::SchemaError, "config: " + what); }

template <class T, class Parse>
T parse_enum(const json& v, const char* what, Parse parse) {
  if (!v.is_string()) config_error(std::string(what) + " must be a string");
  auto out = parse(v.get<std::string>());
  if (!out) config_error("unknown " + std::string(what) + " '" + v.get<std::string>() + "'");
  return *out;
}

Range parse_range(const json& v, const std::string& what) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    config_error(what + " must be a [low, high] pair");
  return {v[0].get<double>(), v[1].get<double>()};
}

json range_json(const Range& r) { return json::array({r.lo, r.hi}); }

}  // namespace

SimulationConfig load_simulation_config(std::string_view text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) config_error("not a JSON object");
  SimulationConfig c;
  try {
    if (doc.contains("rng_seed")) c.rng_seed = doc.at("rng_seed").get<std::uint64_t>();
    if (doc.contains("signature")) {
      const json& s = doc.at("signature");
      c.signature.resolution = s.value("resolution", c.signature.resolution);
      c.signature.n_shells = s.value("shells", c.signature.n_shells);
      c.signature.n_freq = s.value("freq", c.signature.n_freq);
      c.signature.normalize_amplitude = s.value("normalize_amplitude", c.signature.normalize_amplitude);
    }
    for (const auto& [name, r] : doc.at("tolerance_ranges").items())
      c.tolerance_ranges[parse_enum<Process>(json(name), "process", parse_process)] = parse_range(r, "tolerance range " + name);
    for (const json& m : doc.at("manufacturers")) {
      ManufacturerSpec spec;
      spec.id = m.at("id").get<std::string>();
      for (const json& p : m.at("specialties")) spec.specialties.push_back(parse_enum<Process>(p, "process", parse_process));
      c.manufacturers.push_back(spec);
    }
    for (const json& f : doc.at("families")) {
      FamilySpec spec;
      spec.shape = parse_enum<ShapeFamily>(f.at("shape"), "shape", parse_shape_family);
      spec.name = f.value("name", std::string(to_string(spec.shape)));
      spec.process = parse_enum<Process>(f.at("process"), "process", parse_process);
      if (f.contains("material")) spec.material = parse_enum<MaterialClass>(f.at("material"), "material", parse_material_class);
      spec.count = f.at("count").get<std::size_t>();
      spec.params = default_param_ranges(spec.shape);
      if (f.contains("params"))
        for (const auto& [name, r] : f.at("params").items()) spec.params[name] = parse_range(r, "parameter " + name);
      c.families.push_back(spec);
    }
  } catch (const json::exception& e) {
    config_error(e.what());
  }
  validate(c);
  return c;
}

std::string dump_simulation_config(const SimulationConfig& c) {
  json doc;
  doc["rng_seed"] = c.rng_seed;
  doc["signature"] = {{"resolution", c.signature.resolution},
                      {"shells", c.signature.n_shells},
                      {"freq", c.signature.n_freq},
                      {"normalize_amplitude", c.signature.normalize_amplitude}};
  json ranges = json::object();
  for (const auto& [p, r] : c.tolerance_ranges) ranges[std::string(to_string(p))] = range_json(r);
  doc["tolerance_ranges"] = ranges;
  doc["manufacturers"] = json::array();
  for (const auto& m : c.manufacturers) {
    json spec = {{"id", m.id}, {"specialties", json::array()}};
    for (Process p : m.specialties) spec["specialties"].push_back(std::string(to_string(p)));
    doc["manufacturers"].push_back(spec);
  }
  doc["families"] = json::array();
  for (const auto& f : c.families) {
    json params = json::object();
    for (const auto& [name, r] : f.params) params[name] = range_json(r);
    doc["families"].push_back({{"name", f.name},
                               {"shape", std::string(to_string(f.shape))},
                               {"process", std::string(to_string(f.process))},
                               {"material", std::string(to_string(f.material))},
                               {"count", f.count},
                               {"params", params}});
  }
  return doc.dump(2);
}

// ---- tolerances ----

std::vector<double> sample_tolerances(const std::vector<Process>& processes, const std::map<Process, Range>& ranges,
                                      Rng& rng) {
  std::vector<double> out;
  out.reserve(processes.size());
  for (Process p : processes) {
    auto it = ranges.find(p);
    if (it == ranges.end()) throw Error(ErrorCode::InvalidParams, "no tolerance range for " + std::string(to_string(p)));
    out.push_back(uniform(rng, it->second.lo, it->second.hi));
  }
  return out;
}

std::size_t ToleranceClassing::cluster_of(double value) const {
  std::size_t c = 0;
  while (c < thresholds.size() && value > thresholds[c]) ++c;
  return c;
}

ToleranceClass ToleranceClassing::classify(double value) const {
  if (centroids.size() != 3) throw Error(ErrorCode::InvalidParams, "tolerance classing needs exactly 3 clusters");
  static constexpr ToleranceClass order[] = {ToleranceClass::High, ToleranceClass::Medium, ToleranceClass::Standard};
  return order[cluster_of(value)];
}

ToleranceClassing kmeans_1d(const std::vector<double>& values, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::InvalidParams, "k must be positive");
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> u;
  std::vector<long double> w;
  for (double v : sorted) {
    if (!std::isfinite(v)) throw Error(ErrorCode::DegenerateData, "non-finite value");
    if (u.empty() || v != u.back()) {
      u.push_back(v);
      w.push_back(1);
    } else {
      w.back() += 1;
    }
  }
  const std::size_t m = u.size();
  if (m < k)
    throw Error(ErrorCode::DegenerateData, "need at least " + std::to_string(k) + " distinct values, got " + std::to_string(m));

  // Prefix sums of weight, weighted value and weighted square.
  std::vector<long double> sw(m + 1, 0), s1(m + 1, 0), s2(m + 1, 0);
  for (std::size_t i = 0; i < m; ++i) {
    const long double x = u[i];
    sw[i + 1] = sw[i] + w[i];
    s1[i + 1] = s1[i] + w[i] * x;
    s2[i + 1] = s2[i] + w[i] * x * x;
  }
  auto cost = [&](std::size_t a, std::size_t b) {  // values [a, b)
    const long double n = sw[b] - sw[a], s = s1[b] - s1[a];
    return std::max<long double>(0, (s2[b] - s2[a]) - s * s / n);
  };

  const long double inf = std::numeric_limits<long double>::infinity();
  // best[c][j]: optimal cost of splitting the first j values into c + 1 clusters.
  std::vector<std::vector<long double>> best(k, std::vector<long double>(m + 1, inf));
  std::vector<std::vector<std::size_t>> cut(k, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t j = 1; j <= m; ++j) best[0][j] = cost(0, j);
  for (std::size_t c = 1; c < k; ++c)
    for (std::size_t j = c + 1; j <= m; ++j)
      for (std::size_t i = c; i < j; ++i) {
        const long double v = best[c - 1][i] + cost(i, j);
        if (v < best[c][j]) {
          best[c][j] = v;
          cut[c][j] = i;
        }
      }

  std::vector<std::size_t> bounds(k + 1);
  bounds[k] = m;
  for (std::size_t c = k - 1; c > 0; --c) bounds[c] = cut[c][bounds[c + 1]];
  bounds[0] = 0;

  ToleranceClassing out;
  for (std::size_t c = 0; c < k; ++c) {
    const long double n = sw[bounds[c + 1]] - sw[bounds[c]];
    out.centroids.push_back(static_cast<double>((s1[bounds[c + 1]] - s1[bounds[c]]) / n));
    if (c + 1 < k) out.thresholds.push_back(0.5 * (u[bounds[c + 1] - 1] + u[bounds[c + 1]]));
  }
  return out;
}

// ---- manufacturers ----

std::vector<std::string> assign_manufacturers(const std::vector<Process>& processes,
                                              const std::vector<ManufacturerSpec>& manufacturers, Rng& rng) {
  std::vector<std::string> out(processes.size());
  for (Process p : kAllProcesses) {
    std::vector<std::size_t> parts;
    for (std::size_t i = 0; i < processes.size(); ++i)
      if (processes[i] == p) parts.push_back(i);
    if (parts.empty()) continue;
    std::vector<const std::string*> specialists;
    for (const ManufacturerSpec& m : manufacturers)
      if (std::find(m.specialties.begin(), m.specialties.end(), p) != m.specialties.end()) specialists.push_back(&m.id);
    if (specialists.empty())
      throw Error(ErrorCode::UnservableProcess, "no manufacturer specializes in " + std::string(to_string(p)));
    shuffle(parts, rng);
    for (std::size_t i = 0; i < parts.size(); ++i) out[parts[i]] = *specialists[i % specialists.size()];
  }
  return out;
}

// ---- ground truth ----

static constexpr std::string_view kTruthHeader = "part_id,process,manufacturer_id,tolerance_value,tolerance_class,material_class";

std::string dump_ground_truth(const GroundTruth& truth) {
  std::string out(kTruthHeader);
  out += '\n';
  char num[40];
  for (const auto& r : truth) {
    std::snprintf(num, sizeof num, "%.17g", r.tolerance_value);
    out += format_part_id(r.part_id) + ',' + std::string(to_string(r.process)) + ',' + r.manufacturer_id + ',' + num +
           ',' + std::string(to_string(r.tolerance_class)) + ',' + std::string(to_string(r.material_class)) + '\n';
  }
  return out;
}

[[noreturn]] static void truth_error(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::SchemaError, "ground truth line " + std::to_string(line) + ": " + what);
}

GroundTruth load_ground_truth(std::string_view csv) {
  const auto fail = truth_error;
  GroundTruth out;
  std::size_t line_no = 0;
  bool header = true;
  while (!csv.empty()) {
    const std::size_t nl = csv.find('\n');
    std::string_view line = csv.substr(0, nl);
    csv = nl == std::string_view::npos ? std::string_view{} : csv.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (header) {
      if (line != kTruthHeader) fail(line_no, "unexpected header");
      header = false;
      continue;
    }
    std::vector<std::string_view> cells;
    for (std::size_t start = 0;;) {
      const std::size_t comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (cells.size() != 6) fail(line_no, "expected 6 columns");
    GroundTruthRow r;
    auto id = parse_part_id(cells[0]);
    auto process = parse_process(cells[1]);
    auto tol_class = parse_tolerance_class(cells[4]);
    auto material = parse_material_class(cells[5]);
    if (!id || !process || !tol_class || !material || cells[2].empty()) fail(line_no, "bad field");
    const auto [ptr, ec] = std::from_chars(cells[3].data(), cells[3].data() + cells[3].size(), r.tolerance_value);
    if (ec != std::errc{} || ptr != cells[3].data() + cells[3].size()) fail(line_no, "bad tolerance_value");
    r.part_id = *id;
    r.process = *process;
    r.manufacturer_id = std::string(cells[2]);
    r.tolerance_class = *tol_class;
    r.material_class = *material;
    out.push_back(std::move(r));
  }
  if (header) fail(line_no, "missing header");
  return out;
}

// ---- full pipeline ----

SimulationResult build_simulated_repository(const SimulationConfig& config) {
  validate(config);
  struct Slot {
    const FamilySpec* family;
    std::size_t first;
  };
  std::vector<Slot> slots;
  std::size_t total = 0;
  for (const FamilySpec& f : config.families) {
    slots.push_back({&f, total});
    total += f.count;
  }

  SimulationResult out;
  out.meshes.resize(total);
  std::vector<Process> processes(total);
  std::vector<MaterialClass> materials(total);
  const auto n_families = static_cast<std::ptrdiff_t>(slots.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t fi = 0; fi < n_families; ++fi) {
    const Slot& s = slots[static_cast<std::size_t>(fi)];
    Rng rng(derive_seed(config.rng_seed, static_cast<std::uint64_t>(fi)));
    for (std::size_t j = 0; j < s.family->count; ++j) {
      const ShapeParams params = sample_params(s.family->params, rng);
      out.meshes[s.first + j] = generate_part(s.family->shape, params, rng);
      processes[s.first + j] = s.family->process;
      materials[s.first + j] = s.family->material;
    }
  }

  std::vector<SphSignature> signatures(total);
  const auto n_parts = static_cast<std::ptrdiff_t>(total);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n_parts; ++i) {
    signatures[static_cast<std::size_t>(i)] = mesh_signature(out.meshes[static_cast<std::size_t>(i)], config.signature);
  }

  Rng tol_rng(derive_seed(config.rng_seed, 1000));
  const std::vector<double> tolerances = sample_tolerances(processes, config.tolerance_ranges, tol_rng);
  if (total > 0) out.classing = kmeans_1d(tolerances, 3);
  Rng assign_rng(derive_seed(config.rng_seed, 1001));
  const std::vector<std::string> makers = assign_manufacturers(processes, config.manufacturers, assign_rng);

  for (std::size_t i = 0; i < total; ++i) {
    PartRecord r;
    r.meta.part_id = static_cast<PartId>(i + 1);
    r.meta.material_class = materials[i];
    r.meta.tolerance_value = tolerances[i];
    r.meta.tolerance_class = out.classing.classify(tolerances[i]);
    r.meta.process = processes[i];
    r.meta.manufacturer_id = makers[i];
    r.meta.units = "mm";
    r.signature = std::move(signatures[i]);
    out.truth.push_back({r.meta.part_id, processes[i], makers[i], tolerances[i], *r.meta.tolerance_class, materials[i]});
    out.repository.add(std::move(r));
  }
  return out;
}

}  // namespace fabsearch
