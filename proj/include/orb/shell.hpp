#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "orb/sphere.hpp"

namespace orb {

struct InvalidPrimitiveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Concentric glass shell. thickness == outer_radius degenerates to a solid
// ball (no inner interface); thickness <= 0 is an error.
struct ShellPrimitive {
    Point3 center;
    double outer_radius = 0.0;
    double thickness = 0.0;

    double inner_radius() const { return outer_radius - thickness; }
    bool solid() const { return thickness >= outer_radius; }

    void validate() const {
        if (outer_radius <= 0.0)
            throw InvalidPrimitiveError("shell: outer_radius must be positive");
        if (thickness <= 0.0)
            throw InvalidPrimitiveError("shell: thickness must be positive (degenerate shell)");
        if (thickness > outer_radius)
            throw InvalidPrimitiveError("shell: thickness exceeds outer_radius");
    }
};

// All intersections with both interfaces, sorted by t. Each hit is labeled
// Outer/Inner and entering/exiting with respect to its own sphere.
inline std::vector<SurfaceHit> intersect_shell(const Ray& ray, const ShellPrimitive& shell) {
    shell.validate();
    std::vector<SurfaceHit> hits;
    hits.reserve(4);
    auto collect = [&](double radius, Interface which) {
        auto roots = detail::sphere_roots(ray, shell.center, radius);
        if (!roots.hit) return;
        for (double t : {roots.t0, roots.t1}) {
            if (t < ray.t_min || t > ray.t_max) continue;
            SurfaceHit h;
            h.t = t;
            h.point = ray.at(t);
            // renormalize: at grazing incidence ray.at(t) can land off the
            // sphere by more than the unit-vector tolerance
            h.normal = normalize(h.point - shell.center);
            h.entering = dot(h.normal, ray.dir) < 0.0;
            h.interface_kind = which;
            hits.push_back(h);
        }
    };
    collect(shell.outer_radius, Interface::Outer);
    if (!shell.solid()) collect(shell.inner_radius(), Interface::Inner);
    std::sort(hits.begin(), hits.end(),
              [](const SurfaceHit& a, const SurfaceHit& b) { return a.t < b.t; });
    return hits;
}

}  // namespace orb
