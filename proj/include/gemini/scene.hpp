#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gemini/core_components.hpp"
#include "gemini/geometry.hpp"

namespace gemini {

using Triangle = std::array<std::uint64_t, 3>;
using LineIndex = std::array<std::uint64_t, 2>;

// ---------------------------------------------------------------------------
// Components
// ---------------------------------------------------------------------------

struct PointCloud : Component {
  std::vector<Vec3> points;
  /// Empty when the cloud carries no intensity channel.
  std::vector<double> intensity;

  std::string_view type_name() const override { return "PointCloud"; }

  std::vector<Attribute> attributes() const override {
    return {{"points", to_array(points)}, {"intensity", to_array(intensity)}};
  }

  void assign(std::string_view name, const Value& v) override {
    if (name == "points") points = as_points(v, name);
    else if (name == "intensity") intensity = as_vector(v, name);
    else unknown_attribute(name);
  }

  void validate() const override {
    if (!intensity.empty() && intensity.size() != points.size())
      fail(Errc::InvalidDimension, "PointCloud intensity length differs from point count");
    for (double i : intensity)
      if (!(i >= 0.0)) fail(Errc::InvalidArgument, "PointCloud intensities must be >= 0");
  }
};

struct LineSet : Component {
  std::vector<Vec3> points;
  std::vector<LineIndex> lines;

  std::string_view type_name() const override { return "LineSet"; }

  std::vector<Attribute> attributes() const override { return {{"points", to_array(points)}, {"lines", to_array(lines)}}; }

  void assign(std::string_view name, const Value& v) override {
    if (name == "points") points = as_points(v, name);
    else if (name == "lines") lines = as_index_rows<2>(v, name);
    else unknown_attribute(name);
  }

  void validate() const override {
    for (const auto& l : lines) {
      if (l[0] >= points.size() || l[1] >= points.size()) fail(Errc::IndexOutOfRange, "LineSet index out of range");
      if (l[0] == l[1]) fail(Errc::InvalidMesh, "LineSet contains a degenerate line");
    }
  }
};

inline void validate_mesh(const std::vector<Vec3>& vertices, const std::vector<Triangle>& triangles) {
  for (const auto& v : vertices)
    if (!v.allFinite()) fail(Errc::InvalidMesh, "mesh has a non-finite vertex");
  for (std::size_t f = 0; f < triangles.size(); ++f) {
    const auto& t = triangles[f];
    for (auto i : t)
      if (i >= vertices.size())
        fail(Errc::IndexOutOfRange, "face " + std::to_string(f) + " references vertex " + std::to_string(i));
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
      fail(Errc::InvalidMesh, "face " + std::to_string(f) + " repeats a vertex");
  }
}

struct Mesh : Component {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;

  Mesh() = default;
  Mesh(std::vector<Vec3> v, std::vector<Triangle> t) : vertices(std::move(v)), triangles(std::move(t)) {}

  std::string_view type_name() const override { return "Mesh"; }

  std::vector<Attribute> attributes() const override {
    return {{"vertices", to_array(vertices)}, {"triangles", to_array(triangles)}};
  }

  /// `tensor` takes a mapping with both `vertices` and `triangles`, which is
  /// what the mesh initializers return.
  void assign(std::string_view name, const Value& v) override {
    if (name == "vertices") {
      vertices = as_points(v, name);
    } else if (name == "triangles") {
      triangles = as_index_rows<3>(v, name);
    } else if (name == "tensor") {
      if (!v.is_map()) type_mismatch(name, "mapping with vertices and triangles", v);
      const Value* verts = find(v.map(), "vertices");
      const Value* tris = find(v.map(), "triangles");
      if (!verts || !tris) fail(Errc::AttributeTypeMismatch, "'tensor' needs both vertices and triangles");
      vertices = as_points(*verts, "vertices");
      triangles = as_index_rows<3>(*tris, "triangles");
    } else {
      unknown_attribute(name);
    }
  }

  void validate() const override { validate_mesh(vertices, triangles); }
};

enum class BrdfModel { lambert, oren_nayar };

struct Material : Component {
  double reflectivity = 1.0;
  double roughness = 0.0;
  BrdfModel model = BrdfModel::lambert;

  Material() = default;
  Material(double rho, double sigma, BrdfModel m) : reflectivity(rho), roughness(sigma), model(m) {}

  std::string_view type_name() const override { return "Material"; }

  std::vector<Attribute> attributes() const override {
    return {{"reflectivity", reflectivity},
            {"roughness", roughness},
            {"model", std::string(model == BrdfModel::lambert ? "lambert" : "oren_nayar")}};
  }

  void assign(std::string_view name, const Value& v) override {
    if (name == "reflectivity") {
      reflectivity = as_double(v, name);
    } else if (name == "roughness") {
      roughness = as_double(v, name);
    } else if (name == "model") {
      const auto& s = as_string(v, name);
      if (s == "lambert") model = BrdfModel::lambert;
      else if (s == "oren_nayar") model = BrdfModel::oren_nayar;
      else fail(Errc::AttributeTypeMismatch, "Material.model must be 'lambert' or 'oren_nayar'");
    } else {
      unknown_attribute(name);
    }
  }

  void validate() const override {
    if (!(reflectivity >= 0.0 && reflectivity <= 1.0))
      fail(Errc::ReflectivityOutOfRange, "Material.reflectivity must lie in [0, 1]");
    if (!(roughness >= 0.0)) fail(Errc::InvalidArgument, "Material.roughness must be >= 0");
  }
};

// ---------------------------------------------------------------------------
// Mesh input
// ---------------------------------------------------------------------------

namespace detail {

inline std::istringstream tokens_of(const std::string& line) {
  auto hash = line.find('#');
  return std::istringstream(hash == std::string::npos ? line : line.substr(0, hash));
}

inline bool blank(const std::string& line) {
  auto hash = line.find('#');
  auto body = line.substr(0, hash);
  return body.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace detail

/// ASCII OFF, triangles only.
inline Mesh parse_off(std::istream& in) {
  std::string line;
  int line_no = 0;
  auto next = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!detail::blank(line)) return true;
    }
    return false;
  };
  if (!next()) throw Error(Errc::ParseError, "empty OFF file", 1);
  auto header = detail::tokens_of(line);
  std::string magic;
  header >> magic;
  if (magic != "OFF") throw Error(Errc::ParseError, "missing OFF header", line_no);
  std::int64_t nv = -1, nf = -1, ne = 0;
  if (!(header >> nv)) {
    if (!next()) throw Error(Errc::ParseError, "missing counts", line_no);
    header = detail::tokens_of(line);
    header >> nv;
  }
  if (!(header >> nf >> ne) || nv < 0 || nf < 0) throw Error(Errc::ParseError, "invalid counts line", line_no);

  Mesh mesh;
  for (std::int64_t i = 0; i < nv; ++i) {
    if (!next()) throw Error(Errc::ParseError, "unexpected end of vertex list", line_no);
    auto ss = detail::tokens_of(line);
    double x, y, z;
    if (!(ss >> x >> y >> z)) throw Error(Errc::ParseError, "invalid vertex", line_no);
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
      throw Error(Errc::ParseError, "non-finite vertex", line_no);
    mesh.vertices.emplace_back(x, y, z);
  }
  for (std::int64_t f = 0; f < nf; ++f) {
    if (!next()) throw Error(Errc::ParseError, "unexpected end of face list", line_no);
    auto ss = detail::tokens_of(line);
    std::int64_t n;
    if (!(ss >> n)) throw Error(Errc::ParseError, "invalid face", line_no);
    if (n != 3) throw Error(Errc::NonTriangleFace, "face with " + std::to_string(n) + " vertices", line_no);
    Triangle t{};
    for (auto& idx : t) {
      std::int64_t v;
      if (!(ss >> v)) throw Error(Errc::ParseError, "invalid face index", line_no);
      if (v < 0 || v >= nv) throw Error(Errc::IndexOutOfRange, "vertex index " + std::to_string(v), line_no);
      idx = static_cast<std::uint64_t>(v);
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) throw Error(Errc::InvalidMesh, "degenerate face", line_no);
    mesh.triangles.push_back(t);
  }
  return mesh;
}

/// OBJ subset: `v x y z` and `f a b c` records with 1-based indices. Texture
/// and normal references (`a/b/c`) are accepted and ignored.
inline Mesh parse_obj(std::istream& in) {
  Mesh mesh;
  std::vector<std::pair<Triangle, int>> faces;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::blank(line)) continue;
    auto ss = detail::tokens_of(line);
    std::string tag;
    ss >> tag;
    if (tag == "v") {
      double x, y, z;
      if (!(ss >> x >> y >> z)) throw Error(Errc::ParseError, "invalid vertex", line_no);
      if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
        throw Error(Errc::ParseError, "non-finite vertex", line_no);
      mesh.vertices.emplace_back(x, y, z);
    } else if (tag == "f") {
      std::vector<std::int64_t> idx;
      std::string tok;
      while (ss >> tok) {
        auto slash = tok.find('/');
        try {
          std::size_t used = 0;
          std::string head = tok.substr(0, slash);
          std::int64_t v = std::stoll(head, &used);
          if (used != head.size()) throw std::invalid_argument("trailing");
          idx.push_back(v);
        } catch (const std::exception&) {
          throw Error(Errc::ParseError, "invalid face index '" + tok + "'", line_no);
        }
      }
      if (idx.size() != 3) throw Error(Errc::NonTriangleFace, "face with " + std::to_string(idx.size()) + " vertices", line_no);
      Triangle t{};
      for (int k = 0; k < 3; ++k) {
        if (idx[k] < 1) throw Error(Errc::IndexOutOfRange, "OBJ indices are 1-based, got " + std::to_string(idx[k]), line_no);
        t[k] = static_cast<std::uint64_t>(idx[k] - 1);
      }
      faces.emplace_back(t, line_no);
    } else if (tag == "vn" || tag == "vt" || tag == "o" || tag == "g" || tag == "s" || tag == "usemtl" ||
               tag == "mtllib") {
      continue;
    } else {
      throw Error(Errc::ParseError, "unsupported record '" + tag + "'", line_no);
    }
  }
  for (const auto& [t, at] : faces) {
    for (auto i : t)
      if (i >= mesh.vertices.size()) throw Error(Errc::IndexOutOfRange, "vertex index " + std::to_string(i + 1), at);
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) throw Error(Errc::InvalidMesh, "degenerate face", at);
    mesh.triangles.push_back(t);
  }
  return mesh;
}

/// Loads `.off` or `.obj` by extension.
inline Mesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::Io, "cannot open mesh '" + path.string() + "'");
  auto ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  Mesh mesh;
  if (ext == ".off") mesh = parse_off(in);
  else if (ext == ".obj") mesh = parse_obj(in);
  else fail(Errc::ParseError, "unsupported mesh format '" + ext + "'");
  mesh.validate();
  return mesh;
}

// ---------------------------------------------------------------------------
// Procedural geometry
// ---------------------------------------------------------------------------

/// Two counter-clockwise triangles in z = 0, centered at the origin.
inline Mesh make_plane(double width, double depth) {
  if (!(width > 0.0) || !(depth > 0.0)) fail(Errc::InvalidDimension, "plane dimensions must be positive");
  const double hx = width / 2, hy = depth / 2;
  return Mesh({{-hx, -hy, 0}, {hx, -hy, 0}, {hx, hy, 0}, {-hx, hy, 0}}, {{{0, 1, 2}}, {{0, 2, 3}}});
}

/// Icosahedron refined by midpoint subdivision; 10 * 4^s + 2 vertices.
inline Mesh make_icosphere(double radius, int subdivisions) {
  if (!(radius > 0.0)) fail(Errc::InvalidDimension, "icosphere radius must be positive");
  if (subdivisions < 0 || subdivisions > 6) fail(Errc::InvalidDimension, "icosphere subdivisions must be in [0, 6]");
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                         {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<Triangle> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                             {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                             {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<std::uint64_t, std::uint64_t>, std::uint64_t> midpoints;
    auto midpoint = [&](std::uint64_t a, std::uint64_t b) {
      auto key = std::minmax(a, b);
      auto it = midpoints.find(key);
      if (it != midpoints.end()) return it->second;
      v.push_back(((v[a] + v[b]) / 2.0).normalized());
      std::uint64_t id = v.size() - 1;
      midpoints.emplace(key, id);
      return id;
    };
    std::vector<Triangle> next;
    next.reserve(f.size() * 4);
    for (const auto& tri : f) {
      auto a = midpoint(tri[0], tri[1]), b = midpoint(tri[1], tri[2]), c = midpoint(tri[2], tri[0]);
      next.push_back({tri[0], a, c});
      next.push_back({tri[1], b, a});
      next.push_back({tri[2], c, b});
      next.push_back({a, b, c});
    }
    f = std::move(next);
  }
  for (auto& p : v) p *= radius;
  return Mesh(std::move(v), std::move(f));
}

inline Vec3 triangle_normal(const Vec3& a, const Vec3& b, const Vec3& c) {
  Vec3 n = (b - a).cross(c - a);
  const double len = n.norm();
  if (!(len > 0.0) || !std::isfinite(len)) fail(Errc::DegenerateFace, "zero-area triangle");
  return n / len;
}

/// Unit normal of a face with counter-clockwise winding as the front.
inline Vec3 face_normal(const Mesh& mesh, std::size_t face) {
  if (face >= mesh.triangles.size()) fail(Errc::IndexOutOfRange, "face index " + std::to_string(face));
  const auto& t = mesh.triangles[face];
  return triangle_normal(mesh.vertices.at(t[0]), mesh.vertices.at(t[1]), mesh.vertices.at(t[2]));
}

// ---------------------------------------------------------------------------
// Point cloud output
// ---------------------------------------------------------------------------

/// ASCII PLY with `x y z intensity` vertex properties. Missing intensities
/// are written as 0.
inline void write_ply(const PointCloud& cloud, std::ostream& out) {
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.points.size()
      << "\nproperty double x\nproperty double y\nproperty double z\nproperty double intensity\nend_header\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const auto& p = cloud.points[i];
    out << p.x() << ' ' << p.y() << ' ' << p.z() << ' ' << (cloud.intensity.empty() ? 0.0 : cloud.intensity[i])
        << '\n';
  }
}

// ---------------------------------------------------------------------------
// Processors
// ---------------------------------------------------------------------------

/// Spins every Transform about z: world = Rz(omega * t) * local.
class RotateFrame : public Processor {
 public:
  explicit RotateFrame(double omega = 1.0) : omega_(omega) {}

  std::string_view name() const override { return "RotateFrame"; }
  std::vector<std::string> reads() const override { return {"Time", "Transform"}; }
  std::vector<std::string> writes() const override { return {"Transform"}; }

  void step(World& world) override {
    const double t = world_time(world).current_time;
    const Mat4 spin = make_transform(rotation_z(omega_ * t), Vec3::Zero());
    for (EntityId e : world.query<Transform>()) {
      if (!applies_to(e)) continue;
      auto& tf = world.get<Transform>(e);
      tf.world = spin * tf.local;
    }
  }

  double omega() const { return omega_; }

 private:
  double omega_;
};

}  // namespace gemini
