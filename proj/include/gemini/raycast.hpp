#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "gemini/ecs.hpp"
#include "gemini/scene.hpp"

namespace gemini {

struct RayHit {
  double range = 0.0;
  Vec3 point = Vec3::Zero();
  /// Unit normal facing the ray origin.
  Vec3 normal = Vec3::UnitZ();
  double theta = 0.0;
  EntityId entity;
  std::uint64_t face = 0;
};

/// A triangle already placed in the world frame.
struct SceneTriangle {
  Vec3 a, b, c;
  EntityId entity;
  std::uint64_t face = 0;
};

/// Flattens a mesh into world-frame triangles.
inline void append_mesh(std::vector<SceneTriangle>& out, const Mesh& mesh, const Mat4& world, EntityId entity) {
  const auto verts = transform_points(world, mesh.vertices);
  for (std::size_t f = 0; f < mesh.triangles.size(); ++f) {
    const auto& t = mesh.triangles[f];
    out.push_back({verts.at(t[0]), verts.at(t[1]), verts.at(t[2]), entity, f});
  }
}

/// Every Mesh with a Transform, except `exclude`.
inline std::vector<SceneTriangle> collect_scene(const World& world, std::optional<EntityId> exclude = std::nullopt) {
  std::vector<SceneTriangle> tris;
  for (EntityId e : world.query<Mesh, Transform>()) {
    if (exclude && e == *exclude) continue;
    append_mesh(tris, world.get<Mesh>(e), world.get<Transform>(e).world, e);
  }
  return tris;
}

namespace detail {

/// Moller-Trumbore. Returns the ray parameter of a front- or back-face hit.
inline std::optional<double> intersect(const SceneTriangle& tri, const Vec3& origin, const Vec3& dir) {
  const Vec3 e1 = tri.b - tri.a;
  const Vec3 e2 = tri.c - tri.a;
  const Vec3 p = dir.cross(e2);
  const double det = e1.dot(p);
  if (det == 0.0 || !std::isfinite(det)) return std::nullopt;
  const double inv = 1.0 / det;
  const Vec3 s = origin - tri.a;
  const double u = s.dot(p) * inv;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vec3 q = s.cross(e1);
  const double v = dir.dot(q) * inv;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  const double t = e2.dot(q) * inv;
  if (!(t > 0.0)) return std::nullopt;
  return t;
}

struct Candidate {
  double t = std::numeric_limits<double>::infinity();
  const SceneTriangle* tri = nullptr;

  bool better(double t2, const SceneTriangle& other) const {
    if (!tri) return true;
    if (t2 != t) return t2 < t;
    if (other.entity != tri->entity) return other.entity < tri->entity;
    return other.face < tri->face;
  }
};

/// Tests one triangle and keeps it when it is the new nearest valid hit.
/// Grazing or degenerate faces never produce a hit.
inline void consider(Candidate& best, const SceneTriangle& tri, const Vec3& origin, const Vec3& dir,
                     double max_range) {
  auto t = intersect(tri, origin, dir);
  if (!t || *t > max_range) return;
  if (!best.better(*t, tri)) return;
  const Vec3 n = (tri.b - tri.a).cross(tri.c - tri.a);
  if (!(n.norm() > 0.0) || n.dot(dir) == 0.0) return;
  best.t = *t;
  best.tri = &tri;
}

inline std::optional<RayHit> finish(const Candidate& best, const Vec3& origin, const Vec3& dir) {
  if (!best.tri) return std::nullopt;
  const auto& tri = *best.tri;
  Vec3 n = (tri.b - tri.a).cross(tri.c - tri.a).normalized();
  if (n.dot(dir) > 0.0) n = -n;
  const double cos_theta = std::clamp(-n.dot(dir), 0.0, 1.0);
  RayHit hit;
  hit.range = best.t;
  hit.point = origin + best.t * dir;
  hit.normal = n;
  hit.theta = std::acos(cos_theta);
  hit.entity = tri.entity;
  hit.face = tri.face;
  if (!(hit.theta < std::numbers::pi / 2)) return std::nullopt;
  return hit;
}

}  // namespace detail

/// Nearest hit by testing every triangle.
inline std::optional<RayHit> raycast_exhaustive(std::span<const SceneTriangle> tris, const Vec3& origin,
                                                const Vec3& dir, double max_range) {
  detail::Candidate best;
  for (const auto& tri : tris) detail::consider(best, tri, origin, dir, max_range);
  return detail::finish(best, origin, dir);
}

struct Aabb {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void grow(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void grow(const Aabb& b) {
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
  }

  /// Slab test, inclusive at the boundary. Returns the entry parameter.
  std::optional<double> enter(const Vec3& origin, const Vec3& dir, double t_max) const {
    double t0 = 0.0, t1 = t_max;
    for (int k = 0; k < 3; ++k) {
      if (dir[k] == 0.0) {
        if (origin[k] < lo[k] || origin[k] > hi[k]) return std::nullopt;
        continue;
      }
      const double inv = 1.0 / dir[k];
      double a = (lo[k] - origin[k]) * inv;
      double b = (hi[k] - origin[k]) * inv;
      if (a > b) std::swap(a, b);
      t0 = std::max(t0, a);
      t1 = std::min(t1, b);
      if (t0 > t1) return std::nullopt;
    }
    return t0;
  }
};

/// Bounding volume hierarchy with median splits along the widest centroid
/// axis. Construction depends only on the triangle order.
class Bvh {
 public:
  explicit Bvh(std::vector<SceneTriangle> tris) : tris_(std::move(tris)) {
    if (tris_.empty()) return;
    std::vector<std::uint32_t> order(tris_.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    nodes_.reserve(2 * tris_.size());
    build(order, 0, order.size());
    std::vector<SceneTriangle> sorted;
    sorted.reserve(tris_.size());
    for (auto i : order) sorted.push_back(tris_[i]);
    tris_ = std::move(sorted);
  }

  std::span<const SceneTriangle> triangles() const { return tris_; }
  std::size_t node_count() const { return nodes_.size(); }

  std::optional<RayHit> raycast(const Vec3& origin, const Vec3& dir, double max_range) const {
    detail::Candidate best;
    if (nodes_.empty()) return std::nullopt;
    std::vector<std::uint32_t> stack{0};
    while (!stack.empty()) {
      const Node& node = nodes_[stack.back()];
      stack.pop_back();
      auto entry = node.box.enter(origin, dir, std::min(max_range, best.t));
      if (!entry) continue;
      if (node.count > 0) {
        for (std::uint32_t i = node.first; i < node.first + node.count; ++i)
          detail::consider(best, tris_[i], origin, dir, max_range);
      } else {
        stack.push_back(node.right);
        stack.push_back(node.first);
      }
    }
    return detail::finish(best, origin, dir);
  }

 private:
  static constexpr std::size_t kLeafSize = 4;

  struct Node {
    Aabb box;
    std::uint32_t first = 0;  // first triangle for leaves, left child otherwise
    std::uint32_t right = 0;
    std::uint32_t count = 0;  // 0 for interior nodes
  };

  Vec3 centroid(std::uint32_t i) const { return (tris_[i].a + tris_[i].b + tris_[i].c) / 3.0; }

  std::uint32_t build(std::vector<std::uint32_t>& order, std::size_t begin, std::size_t end) {
    const auto index = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();
    Aabb box, centers;
    for (std::size_t i = begin; i < end; ++i) {
      const auto& t = tris_[order[i]];
      box.grow(t.a);
      box.grow(t.b);
      box.grow(t.c);
      centers.grow(centroid(order[i]));
    }
    // Pad so rounding in the slab test cannot cull a triangle lying on a face.
    const double pad = 1e-9 * std::max(1.0, (box.hi - box.lo).cwiseAbs().maxCoeff()) +
                       1e-12 * std::max(box.lo.cwiseAbs().maxCoeff(), box.hi.cwiseAbs().maxCoeff());
    box.lo.array() -= pad;
    box.hi.array() += pad;
    nodes_[index].box = box;

    if (end - begin <= kLeafSize) {
      nodes_[index].first = static_cast<std::uint32_t>(begin);
      nodes_[index].count = static_cast<std::uint32_t>(end - begin);
      return index;
    }
    int axis = 0;
    (centers.hi - centers.lo).maxCoeff(&axis);
    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                     [&](std::uint32_t l, std::uint32_t r) {
                       const double cl = centroid(l)[axis], cr = centroid(r)[axis];
                       return cl != cr ? cl < cr : l < r;
                     });
    const auto left = build(order, begin, mid);
    const auto right = build(order, mid, end);
    nodes_[index].first = left;
    nodes_[index].right = right;
    return index;
  }

  std::vector<SceneTriangle> tris_;
  std::vector<Node> nodes_;
};

}  // namespace gemini
