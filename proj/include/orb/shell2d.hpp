#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "orb/optics.hpp"
#include "orb/vec3.hpp"

namespace orb {

// 2D analytic chief-ray tracer. Follows transmission deterministically at
// every interface (TIR reflects); no Fresnel branching. This is a geometric
// distortion oracle, not a radiometric one.

struct ShellPrimitive2D {
    Point2 center;
    double outer_radius = 0.0;
    double thickness = 0.0;
    double ior = kGlassIor;

    double inner_radius() const { return outer_radius - thickness; }
    bool solid() const { return thickness >= outer_radius; }
};

struct PolylinePath {
    std::vector<Point2> points;  // eye, each interface point, in order
    Point2 exit_origin;
    Vec2 exit_dir;
    bool deviated = false;  // false: ray missed the orb, straight line returned
    bool tir_occurred = false;
};

namespace detail2d {

struct Roots2D {
    bool hit = false;
    double t0 = 0.0, t1 = 0.0;
};

inline Roots2D circle_roots(const Point2& o, const Vec2& d, const Point2& c, double r) {
    Vec2 oc = o - c;
    double b = dot(oc, d);
    double cc = dot(oc, oc) - r * r;
    double disc = b * b - cc;
    if (disc < 0.0) return {};
    double s = std::sqrt(disc);
    double q = (b > 0.0) ? -(b + s) : -(b - s);
    double t0 = q;
    double t1 = (q != 0.0) ? cc / q : -b + s;
    if (t0 > t1) std::swap(t0, t1);
    return {true, t0, t1};
}

inline std::optional<Vec2> refract2d(const Vec2& incident, const Vec2& normal, double eta) {
    double cos_i = -dot(incident, normal);
    double sin2_t = eta * eta * (1.0 - cos_i * cos_i);
    if (sin2_t >= 1.0) return std::nullopt;
    double cos_t = std::sqrt(1.0 - sin2_t);
    Vec2 t = incident * eta + normal * (eta * cos_i - cos_t);
    return normalize(t);
}

}  // namespace detail2d

// Traces the chief ray from `eye` aimed at `target` through the shell.
// The interface count is 4 for a transmitted hollow path (2 for solid);
// TIR bounces may add more, capped defensively.
inline PolylinePath trace_shell_2d(const Point2& eye, const ShellPrimitive2D& orb,
                                   const Point2& target, int max_events = 64) {
    PolylinePath path;
    path.points.push_back(eye);
    Point2 pos = eye;
    Vec2 dir = normalize(target - eye);

    const double eps = 1e-12;
    double n_glass = orb.ior;
    // medium: 0 ambient air, 1 glass, 2 interior air
    int medium = 0;
    for (int event = 0; event < max_events; ++event) {
        // nearest interface ahead
        double best_t = std::numeric_limits<double>::infinity();
        int best_iface = -1;  // 0 outer, 1 inner
        auto consider = [&](double radius, int iface) {
            if (radius <= 0.0) return;
            auto roots = detail2d::circle_roots(pos, dir, orb.center, radius);
            if (!roots.hit) return;
            for (double t : {roots.t0, roots.t1})
                if (t > eps && t < best_t) {
                    best_t = t;
                    best_iface = iface;
                }
        };
        consider(orb.outer_radius, 0);
        if (!orb.solid()) consider(orb.inner_radius(), 1);
        if (best_iface < 0) break;  // no more interfaces; ray leaves

        Point2 p = pos + dir * best_t;
        path.points.push_back(p);
        path.deviated = true;
        Vec2 outward = normalize(p - orb.center);
        Vec2 n = (dot(outward, dir) < 0.0) ? outward : -outward;

        double n_from, n_to;
        int next_medium;
        bool entering = dot(outward, dir) < 0.0;
        if (best_iface == 0) {
            // outer interface: ambient air <-> glass
            n_from = entering ? 1.0 : n_glass;
            n_to = entering ? n_glass : 1.0;
            next_medium = entering ? 1 : 0;
        } else {
            // inner interface: glass <-> interior air
            n_from = entering ? n_glass : 1.0;
            n_to = entering ? 1.0 : n_glass;
            next_medium = entering ? 2 : 1;
        }
        auto refr = detail2d::refract2d(dir, n, n_from / n_to);
        if (refr) {
            dir = *refr;
            medium = next_medium;
        } else {
            dir = dir - n * (2.0 * dot(dir, n));
            path.tir_occurred = true;
        }
        pos = p + dir * (10.0 * eps);
        (void)medium;
    }

    path.exit_origin = path.points.back();
    path.exit_dir = dir;
    return path;
}

// Angular deviation between the entry aim direction and the exit direction.
inline double exit_deviation(const Point2& eye, const ShellPrimitive2D& orb,
                             const Point2& target) {
    PolylinePath p = trace_shell_2d(eye, orb, target);
    Vec2 d0 = normalize(target - eye);
    // atan2 keeps full precision for tiny angles where acos floors at ~1e-8
    return std::atan2(std::abs(cross(d0, p.exit_dir)), dot(d0, p.exit_dir));
}

}  // namespace orb
