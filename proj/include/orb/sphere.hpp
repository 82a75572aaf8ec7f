#pragma once

#include <optional>

#include "orb/ray.hpp"
#include "orb/vec3.hpp"

namespace orb {

namespace detail {

// Numerically stable quadratic for |o + t d - c| = r. The naive form loses
// half the mantissa when the two roots have very different magnitudes, which
// happens for the near-tangent rays this scene is full of (inner and outer
// radii differ by as little as 2%).
struct SphereRoots {
    bool hit = false;
    double t0 = 0.0, t1 = 0.0;  // t0 <= t1
};

inline SphereRoots sphere_roots(const Ray& ray, const Point3& center, double radius) {
    Vec3 oc = ray.origin - center;
    double b = dot(oc, ray.dir);
    double c = length_squared(oc) - radius * radius;
    double disc = b * b - c;
    if (disc < 0.0) return {};
    double sqrt_disc = std::sqrt(disc);
    // q has the sign of -b, so the subtraction below never cancels.
    double q = (b > 0.0) ? -(b + sqrt_disc) : -(b - sqrt_disc);
    double t0 = q;
    double t1 = (q != 0.0) ? c / q : -b + sqrt_disc;
    if (t0 > t1) std::swap(t0, t1);
    return {true, t0, t1};
}

}  // namespace detail

inline std::optional<SurfaceHit> intersect_sphere(const Ray& ray, const Point3& center,
                                                  double radius) {
    assert(radius > 0.0);
    auto roots = detail::sphere_roots(ray, center, radius);
    if (!roots.hit) return std::nullopt;
    double t = roots.t0;
    if (t < ray.t_min || t > ray.t_max) {
        t = roots.t1;
        if (t < ray.t_min || t > ray.t_max) return std::nullopt;
    }
    SurfaceHit hit;
    hit.t = t;
    hit.point = ray.at(t);
    hit.normal = normalize(hit.point - center);
    hit.entering = dot(hit.normal, ray.dir) < 0.0;
    return hit;
}

}  // namespace orb
