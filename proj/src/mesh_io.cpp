#include "fabsearch/mesh_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string_view>

#include "fabsearch/error.hpp"

namespace fabsearch {

namespace {

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::MalformedFile, what); }

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::string_view to_view(ByteView bytes) {
  return {reinterpret_cast<const char*>(bytes.data()), bytes.size()};
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

double parse_double(std::string_view token) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size())
    malformed("non-numeric token '" + std::string(token.substr(0, 32)) + "'");
  if (!std::isfinite(value)) malformed("non-finite coordinate");
  return value;
}

long long parse_integer(std::string_view token) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size())
    malformed("non-integer token '" + std::string(token.substr(0, 32)) + "'");
  return value;
}

class Tokenizer {
 public:
  explicit Tokenizer(std::string_view text) : text_(text) {}

  bool done() {
    skip();
    return pos_ >= text_.size();
  }
  std::string_view next() {
    skip();
    if (pos_ >= text_.size()) malformed("unexpected end of ASCII STL");
    std::size_t start = pos_;
    while (pos_ < text_.size() && !is_space(text_[pos_])) ++pos_;
    return text_.substr(start, pos_ - start);
  }
  void expect(std::string_view keyword) {
    auto tok = next();
    if (lower(tok) != keyword)
      malformed("expected '" + std::string(keyword) + "' but found '" + std::string(tok.substr(0, 32)) + "'");
  }
  void skip_line() {
    while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
  }

 private:
  void skip() {
    while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
  }
  std::string_view text_;
  std::size_t pos_ = 0;
};

std::uint32_t add_vertex(TriangleMesh& mesh, const Vec3& v) {
  mesh.vertices.push_back(v);
  return static_cast<std::uint32_t>(mesh.vertices.size() - 1);
}

TriangleMesh parse_stl_binary(ByteView bytes) {
  ByteReader in(bytes, ErrorCode::MalformedFile);
  in.take(80);
  const auto count = in.get<std::uint32_t>();
  const std::uint64_t expected = 84ull + 50ull * count;
  if (expected != bytes.size())
    malformed("binary STL declares " + std::to_string(count) + " triangles (" + std::to_string(expected) +
              " bytes) but has " + std::to_string(bytes.size()) + " bytes");

  TriangleMesh mesh;
  mesh.vertices.reserve(3ull * count);
  mesh.triangles.reserve(count);
  for (std::uint32_t t = 0; t < count; ++t) {
    in.take(12);  // stored normal is recomputed on demand
    Triangle tri;
    for (int c = 0; c < 3; ++c) {
      Vec3 v;
      for (int k = 0; k < 3; ++k) {
        const float f = in.get<float>();
        if (!std::isfinite(f)) malformed("non-finite coordinate in facet " + std::to_string(t));
        v[k] = f;
      }
      tri[c] = add_vertex(mesh, v);
    }
    in.get<std::uint16_t>();
    push_triangle(mesh, tri);
  }
  return mesh;
}

TriangleMesh parse_stl_ascii(std::string_view text) {
  Tokenizer tok(text);
  tok.expect("solid");
  tok.skip_line();  // solid name is free text

  TriangleMesh mesh;
  for (;;) {
    if (tok.done()) malformed("missing 'endsolid'");
    const std::string word = lower(tok.next());
    if (word == "endsolid") break;
    if (word != "facet") malformed("expected 'facet' but found '" + word.substr(0, 32) + "'");
    tok.expect("normal");
    for (int k = 0; k < 3; ++k) parse_double(tok.next());
    tok.expect("outer");
    tok.expect("loop");

    std::vector<std::uint32_t> loop;
    for (;;) {
      const std::string w = lower(tok.next());
      if (w == "endloop") break;
      if (w != "vertex") malformed("expected 'vertex' but found '" + w.substr(0, 32) + "'");
      Vec3 v;
      for (int k = 0; k < 3; ++k) v[k] = parse_double(tok.next());
      loop.push_back(add_vertex(mesh, v));
    }
    tok.expect("endfacet");
    if (loop.size() < 3) malformed("facet with fewer than 3 vertices");
    for (std::size_t i = 1; i + 1 < loop.size(); ++i) push_triangle(mesh, {loop[0], loop[i], loop[i + 1]});
  }
  return mesh;
}

// Splits into non-empty lines with '#' comments removed.
std::vector<std::string_view> content_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (std::any_of(line.begin(), line.end(), [](char c) { return !is_space(c); })) lines.push_back(line);
    pos = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

TriangleMesh parse_off(std::string_view text) {
  const auto lines = content_lines(text);
  if (lines.empty()) malformed("empty OFF file");
  auto header = split_tokens(lines[0]);
  if (header.empty() || header[0] != "OFF") malformed("missing OFF header");

  std::size_t cursor = 1;
  std::vector<std::string_view> counts(header.begin() + 1, header.end());
  if (counts.empty()) {
    if (cursor >= lines.size()) malformed("missing OFF counts line");
    counts = split_tokens(lines[cursor++]);
  }
  if (counts.size() < 2) malformed("OFF counts line needs vertex and face counts");
  const long long nv = parse_integer(counts[0]);
  const long long nf = parse_integer(counts[1]);
  if (nv < 0 || nf < 0) malformed("negative OFF counts");
  if (static_cast<std::size_t>(nv) > lines.size() || static_cast<std::size_t>(nf) > lines.size())
    malformed("OFF counts exceed file length");
  if (cursor + static_cast<std::size_t>(nv + nf) > lines.size()) malformed("truncated OFF file");

  TriangleMesh mesh;
  mesh.vertices.reserve(static_cast<std::size_t>(nv));
  for (long long i = 0; i < nv; ++i) {
    auto t = split_tokens(lines[cursor++]);
    if (t.size() < 3) malformed("OFF vertex line needs 3 coordinates");
    mesh.vertices.push_back({parse_double(t[0]), parse_double(t[1]), parse_double(t[2])});
  }
  for (long long f = 0; f < nf; ++f) {
    auto t = split_tokens(lines[cursor++]);
    if (t.empty()) malformed("empty OFF face line");
    const long long n = parse_integer(t[0]);
    if (n < 3 || static_cast<std::size_t>(n) + 1 > t.size()) malformed("bad OFF face arity");
    std::vector<std::uint32_t> poly;
    for (long long i = 1; i <= n; ++i) {
      const long long idx = parse_integer(t[static_cast<std::size_t>(i)]);
      if (idx < 0 || idx >= nv) malformed("OFF face index out of range");
      poly.push_back(static_cast<std::uint32_t>(idx));
    }
    for (std::size_t i = 1; i + 1 < poly.size(); ++i) push_triangle(mesh, {poly[0], poly[i], poly[i + 1]});
  }
  return mesh;
}

bool starts_with_keyword(std::string_view text, std::string_view keyword) {
  std::size_t i = 0;
  while (i < text.size() && is_space(text[i])) ++i;
  return text.substr(i, keyword.size()) == keyword;
}

}  // namespace

std::optional<MeshFormat> parse_mesh_format(std::string_view text) {
  const std::string t = lower(text);
  if (t == "auto") return MeshFormat::Auto;
  if (t == "stl" || t == "stl-binary" || t == "stlbinary" || t == "binary") return MeshFormat::StlBinary;
  if (t == "stl-ascii" || t == "stlascii" || t == "ascii") return MeshFormat::StlAscii;
  if (t == "off") return MeshFormat::Off;
  return std::nullopt;
}

bool is_degenerate(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double c2 = norm2_sym(cross(b - a, c - a));
  return !(c2 >= kDegenerateCross2);
}

void push_triangle(TriangleMesh& mesh, const Triangle& tri) {
  if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] ||
      is_degenerate(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]])) {
    ++mesh.dropped_degenerate;
    return;
  }
  mesh.triangles.push_back(tri);
}

TriangleMesh load_mesh(ByteView bytes, MeshFormat format) {
  const std::string_view text = to_view(bytes);
  TriangleMesh mesh;
  switch (format) {
    case MeshFormat::StlBinary: mesh = parse_stl_binary(bytes); break;
    case MeshFormat::StlAscii: mesh = parse_stl_ascii(text); break;
    case MeshFormat::Off: mesh = parse_off(text); break;
    case MeshFormat::Auto:
      if (starts_with_keyword(text, "solid")) {
        try {
          mesh = parse_stl_ascii(text);
        } catch (const Error&) {
          // Plenty of binary STL headers begin with "solid" too.
          if (bytes.size() < 84) throw;
          std::uint32_t count;
          std::memcpy(&count, bytes.data() + 80, 4);
          if (84ull + 50ull * count != bytes.size()) throw;
          mesh = parse_stl_binary(bytes);
        }
      } else if (starts_with_keyword(text, "OFF")) {
        mesh = parse_off(text);
      } else {
        mesh = parse_stl_binary(bytes);
      }
      break;
  }
  if (mesh.triangles.empty()) throw Error(ErrorCode::EmptyMesh, "mesh has no non-degenerate triangles");
  return mesh;
}

TriangleMesh load_mesh_file(const std::string& path, MeshFormat format) {
  const Bytes bytes = read_file(path);
  return load_mesh(bytes, format);
}

namespace {

std::array<float, 3> unit_normal(const Vec3& a, const Vec3& b, const Vec3& c) {
  Vec3 n = cross(b - a, c - a);
  const double len = norm_sym(n);
  if (len > 0) n = n * (1.0 / len);
  return {static_cast<float>(n[0]), static_cast<float>(n[1]), static_cast<float>(n[2])};
}

}  // namespace

Bytes write_stl_binary(const TriangleMesh& mesh, std::string_view header) {
  ByteWriter out;
  char head[80] = {};
  std::memcpy(head, header.data(), std::min<std::size_t>(header.size(), 80));
  out.raw(head, 80);
  out.put(static_cast<std::uint32_t>(mesh.triangles.size()));
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto n = unit_normal(mesh.corner(t, 0), mesh.corner(t, 1), mesh.corner(t, 2));
    out.raw(n.data(), 12);
    for (int c = 0; c < 3; ++c) {
      const Vec3& v = mesh.corner(t, c);
      for (int k = 0; k < 3; ++k) out.put(static_cast<float>(v[k]));
    }
    out.put(std::uint16_t{0});
  }
  return out.take();
}

std::string write_stl_ascii(const TriangleMesh& mesh, std::string_view name) {
  std::ostringstream os;
  os.precision(std::numeric_limits<double>::max_digits10);
  os << "solid " << name << '\n';
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto n = unit_normal(mesh.corner(t, 0), mesh.corner(t, 1), mesh.corner(t, 2));
    os << "  facet normal " << n[0] << ' ' << n[1] << ' ' << n[2] << "\n    outer loop\n";
    for (int c = 0; c < 3; ++c) {
      const Vec3& v = mesh.corner(t, c);
      os << "      vertex " << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
    }
    os << "    endloop\n  endfacet\n";
  }
  os << "endsolid " << name << '\n';
  return os.str();
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) { return 0.5 * norm_sym(cross(b - a, c - a)); }

MeshDiagnostics mesh_diagnostics(const TriangleMesh& mesh) {
  MeshDiagnostics d;
  d.triangle_count = mesh.triangles.size();
  d.dropped_degenerate = mesh.dropped_degenerate;
  if (!mesh.vertices.empty()) {
    d.bbox_min = d.bbox_max = mesh.vertices.front();
    for (const Vec3& v : mesh.vertices)
      for (int k = 0; k < 3; ++k) {
        d.bbox_min[k] = std::min(d.bbox_min[k], v[k]);
        d.bbox_max[k] = std::max(d.bbox_max[k], v[k]);
      }
  }
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
    d.surface_area += triangle_area(mesh.corner(t, 0), mesh.corner(t, 1), mesh.corner(t, 2));
  return d;
}

Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return data;
}

void write_file(const std::string& path, ByteView data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(ErrorCode::IoError, "short write to '" + path + "'");
}

}  // namespace fabsearch
