#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "orb/ray.hpp"
#include "orb/vec3.hpp"

namespace orb {

struct Aabb {
    Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
    Vec3 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity()};

    void grow(const Vec3& p) {
        for (int i = 0; i < 3; ++i) {
            lo[i] = std::min(lo[i], p[i]);
            hi[i] = std::max(hi[i], p[i]);
        }
    }
    void grow(const Aabb& b) {
        grow(b.lo);
        grow(b.hi);
    }
    Vec3 centroid() const { return (lo + hi) * 0.5; }
    int longest_axis() const {
        Vec3 d = hi - lo;
        if (d.x >= d.y && d.x >= d.z) return 0;
        return d.y >= d.z ? 1 : 2;
    }
    bool hit(const Ray& ray, const Vec3& inv_dir, double t_max) const {
        double t0 = ray.t_min, t1 = t_max;
        for (int i = 0; i < 3; ++i) {
            double a = (lo[i] - ray.origin[i]) * inv_dir[i];
            double b = (hi[i] - ray.origin[i]) * inv_dir[i];
            if (a > b) std::swap(a, b);
            t0 = std::max(t0, a);
            t1 = std::min(t1, b);
            if (t0 > t1) return false;
        }
        return true;
    }
};

struct TriangleHit {
    double t = 0.0;
    double u = 0.0, v = 0.0;  // barycentric weights of vertices 1 and 2
    int triangle = -1;
};

// Moller-Trumbore with a deterministic edge rule: hits exactly on a shared
// edge resolve to the triangle with the lowest index via the >=/<= bounds.
inline std::optional<TriangleHit> intersect_triangle(const Ray& ray, const Point3& p0,
                                                     const Point3& p1, const Point3& p2) {
    Vec3 e1 = p1 - p0;
    Vec3 e2 = p2 - p0;
    Vec3 pvec = cross(ray.dir, e2);
    double det = dot(e1, pvec);
    if (std::abs(det) < 1e-14) return std::nullopt;  // parallel / coplanar grazing
    double inv_det = 1.0 / det;
    Vec3 tvec = ray.origin - p0;
    double u = dot(tvec, pvec) * inv_det;
    if (u < 0.0 || u > 1.0) return std::nullopt;
    Vec3 qvec = cross(tvec, e1);
    double v = dot(ray.dir, qvec) * inv_det;
    if (v < 0.0 || u + v > 1.0) return std::nullopt;
    double t = dot(e2, qvec) * inv_det;
    if (t < ray.t_min || t > ray.t_max) return std::nullopt;
    return TriangleHit{t, u, v, -1};
}

class MeshPrimitive {
public:
    std::vector<Point3> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<Vec2> uvs;  // per-vertex; may be empty

    void validate() const {
        int n = static_cast<int>(vertices.size());
        for (const auto& tri : triangles) {
            for (int idx : tri)
                if (idx < 0 || idx >= n) throw std::runtime_error("mesh: vertex index out of range");
            Vec3 a = vertices[tri[1]] - vertices[tri[0]];
            Vec3 b = vertices[tri[2]] - vertices[tri[0]];
            if (length(cross(a, b)) * 0.5 <= 1e-12)
                throw std::runtime_error("mesh: degenerate triangle");
        }
        if (!uvs.empty() && uvs.size() != vertices.size())
            throw std::runtime_error("mesh: uv count mismatch");
    }

    void build_bvh() {
        size_t n = triangles.size();
        order_.resize(n);
        std::vector<Aabb> boxes(n);
        std::vector<Vec3> cents(n);
        for (size_t i = 0; i < n; ++i) {
            order_[i] = static_cast<int>(i);
            Aabb b;
            for (int idx : triangles[i]) b.grow(vertices[idx]);
            boxes[i] = b;
            cents[i] = b.centroid();
        }
        nodes_.clear();
        nodes_.reserve(2 * n);
        if (n > 0) build_node(0, n, boxes, cents);
    }

    // Nearest hit via BVH. Ties on shared edges break toward the lowest
    // triangle index, matching the exhaustive scan.
    std::optional<SurfaceHit> intersect(const Ray& ray) const {
        if (nodes_.empty()) return std::nullopt;
        Vec3 inv_dir{1.0 / ray.dir.x, 1.0 / ray.dir.y, 1.0 / ray.dir.z};
        TriangleHit best;
        best.t = ray.t_max;
        bool found = false;
        int stack[64];
        int sp = 0;
        stack[sp++] = 0;
        while (sp > 0) {
            const Node& node = nodes_[stack[--sp]];
            if (!node.box.hit(ray, inv_dir, best.t)) continue;
            if (node.count > 0) {
                for (int i = node.first; i < node.first + node.count; ++i) {
                    int tri = order_[i];
                    const auto& idx = triangles[tri];
                    Ray clipped = ray;
                    clipped.t_max = best.t;
                    auto h = intersect_triangle(clipped, vertices[idx[0]], vertices[idx[1]],
                                                vertices[idx[2]]);
                    if (h && (h->t < best.t || (h->t == best.t && tri < best.triangle))) {
                        best = *h;
                        best.triangle = tri;
                        found = true;
                    }
                }
            } else {
                stack[sp++] = node.right;
                stack[sp++] = node.first;  // left child index stored in `first` for interior nodes
            }
        }
        if (!found) return std::nullopt;
        return make_hit(ray, best);
    }

    // Exhaustive reference path; the BVH must agree with this exactly.
    std::optional<SurfaceHit> intersect_exhaustive(const Ray& ray) const {
        TriangleHit best;
        best.t = ray.t_max;
        bool found = false;
        for (size_t tri = 0; tri < triangles.size(); ++tri) {
            const auto& idx = triangles[tri];
            auto h = intersect_triangle(ray, vertices[idx[0]], vertices[idx[1]], vertices[idx[2]]);
            if (h && (h->t < best.t ||
                      (h->t == best.t && static_cast<int>(tri) < best.triangle))) {
                best = *h;
                best.triangle = static_cast<int>(tri);
                found = true;
            }
        }
        if (!found) return std::nullopt;
        return make_hit(ray, best);
    }

private:
    struct Node {
        Aabb box;
        int first = 0;  // leaf: offset into order_; interior: left child
        int right = 0;
        int count = 0;  // 0 for interior nodes
    };

    std::vector<Node> nodes_;
    std::vector<int> order_;

    int build_node(size_t begin, size_t end, const std::vector<Aabb>& boxes,
                   const std::vector<Vec3>& cents) {
        int node_index = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        Aabb box;
        for (size_t i = begin; i < end; ++i) box.grow(boxes[order_[i]]);
        nodes_[node_index].box = box;
        size_t count = end - begin;
        if (count <= 4) {
            nodes_[node_index].first = static_cast<int>(begin);
            nodes_[node_index].count = static_cast<int>(count);
            return node_index;
        }
        int axis = box.longest_axis();
        size_t mid = begin + count / 2;
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](int a, int b) {
                             if (cents[a][axis] != cents[b][axis])
                                 return cents[a][axis] < cents[b][axis];
                             return a < b;
                         });
        int left = build_node(begin, mid, boxes, cents);
        int right = build_node(mid, end, boxes, cents);
        nodes_[node_index].first = left;
        nodes_[node_index].right = right;
        nodes_[node_index].count = 0;
        return node_index;
    }

    SurfaceHit make_hit(const Ray& ray, const TriangleHit& best) const {
        const auto& idx = triangles[best.triangle];
        SurfaceHit hit;
        hit.t = best.t;
        hit.point = ray.at(best.t);
        Vec3 n = cross(vertices[idx[1]] - vertices[idx[0]], vertices[idx[2]] - vertices[idx[0]]);
        hit.normal = normalize(n);
        hit.entering = dot(hit.normal, ray.dir) < 0.0;
        hit.primitive_id = best.triangle;
        double w0 = 1.0 - best.u - best.v;
        if (!uvs.empty()) {
            Vec2 uv = uvs[idx[0]] * w0 + uvs[idx[1]] * best.u + uvs[idx[2]] * best.v;
            hit.u = uv.x;
            hit.v = uv.y;
        } else {
            hit.u = best.u;
            hit.v = best.v;
        }
        return hit;
    }
};

}  // namespace orb
