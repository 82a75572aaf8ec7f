#pragma once

// Brute-force numeric oracles used as independent ground truth. Interfaces
// are discovered by signed-distance marching with bisection refinement, not
// by solving the sphere quadratics, so agreement with the analytic tracers
// is a real cross-check rather than a tautology.

#include <algorithm>
#include <cmath>
#include <vector>

#include "orb/shell.hpp"
#include "orb/shell2d.hpp"

namespace oracle {

// All t values where the ray crosses either sphere of the shell, sorted.
inline std::vector<double> march_shell_hits(const orb::Ray& ray, const orb::ShellPrimitive& shell,
                                            double max_t = 400.0) {
    auto dist_outer = [&](double t) {
        return orb::length(ray.at(t) - shell.center) - shell.outer_radius;
    };
    auto dist_inner = [&](double t) {
        return orb::length(ray.at(t) - shell.center) - shell.inner_radius();
    };
    bool solid = shell.solid();

    std::vector<double> hits;
    auto bisect = [&](auto&& f, double lo, double hi) {
        double flo = f(lo);
        for (int i = 0; i < 200; ++i) {
            double mid = 0.5 * (lo + hi);
            if ((f(mid) > 0.0) == (flo > 0.0)) {
                lo = mid;
                flo = f(lo);
            } else {
                hi = mid;
            }
        }
        return 0.5 * (lo + hi);
    };

    double t = ray.t_min;
    double go = dist_outer(t);
    double gi = solid ? 1.0 : dist_inner(t);
    while (t < max_t) {
        double guard = std::abs(go);
        if (!solid) guard = std::min(guard, std::abs(gi));
        double t2 = t + std::max(0.45 * guard, 1e-7);
        double go2 = dist_outer(t2);
        double gi2 = solid ? 1.0 : dist_inner(t2);
        if ((go2 > 0.0) != (go > 0.0)) hits.push_back(bisect(dist_outer, t, t2));
        if (!solid && (gi2 > 0.0) != (gi > 0.0)) hits.push_back(bisect(dist_inner, t, t2));
        t = t2;
        go = go2;
        gi = gi2;
    }
    std::sort(hits.begin(), hits.end());
    return hits;
}

// 2D chief-ray path found by marching; mirrors trace_shell_2d's contract
// (deterministic transmission, TIR reflects) without its quadratic solver.
struct MarchPath2D {
    orb::Point2 exit_origin;
    orb::Vec2 exit_dir;
    bool deviated = false;
};

inline MarchPath2D march_shell_2d(const orb::Point2& eye, const orb::ShellPrimitive2D& shell,
                                  const orb::Point2& target) {
    MarchPath2D path;
    orb::Point2 pos = eye;
    orb::Vec2 dir = normalize(target - eye);

    auto refr = [](const orb::Vec2& d, const orb::Vec2& n, double eta,
                   orb::Vec2& out) {
        double cos_i = -dot(d, n);
        double sin2_t = eta * eta * (1.0 - cos_i * cos_i);
        if (sin2_t >= 1.0) return false;
        double cos_t = std::sqrt(1.0 - sin2_t);
        out = normalize(d * eta + n * (eta * cos_i - cos_t));
        return true;
    };

    bool solid = shell.solid();
    for (int event = 0; event < 64; ++event) {
        auto g_out = [&](double t) {
            return length(pos + dir * t - shell.center) - shell.outer_radius;
        };
        auto g_in = [&](double t) {
            return length(pos + dir * t - shell.center) - shell.inner_radius();
        };
        double t = 1e-9;
        double go = g_out(t);
        double gi = solid ? 1.0 : g_in(t);
        double t_hit = -1.0;
        int which = -1;
        while (t < 400.0) {
            double guard = std::abs(go);
            if (!solid) guard = std::min(guard, std::abs(gi));
            double t2 = t + std::max(0.45 * guard, 1e-7);
            double go2 = g_out(t2);
            double gi2 = solid ? 1.0 : g_in(t2);
            bool cross_out = (go2 > 0.0) != (go > 0.0);
            bool cross_in = !solid && (gi2 > 0.0) != (gi > 0.0);
            if (cross_out || cross_in) {
                auto bisect = [&](auto&& f, double lo, double hi) {
                    double flo = f(lo);
                    for (int i = 0; i < 200; ++i) {
                        double mid = 0.5 * (lo + hi);
                        if ((f(mid) > 0.0) == (flo > 0.0)) {
                            lo = mid;
                            flo = f(lo);
                        } else {
                            hi = mid;
                        }
                    }
                    return 0.5 * (lo + hi);
                };
                double to = cross_out ? bisect(g_out, t, t2) : 1e30;
                double ti = cross_in ? bisect(g_in, t, t2) : 1e30;
                t_hit = std::min(to, ti);
                which = (to <= ti) ? 0 : 1;
                break;
            }
            t = t2;
            go = go2;
            gi = gi2;
        }
        if (which < 0) break;

        orb::Point2 p = pos + dir * t_hit;
        path.deviated = true;
        orb::Vec2 outward = normalize(p - shell.center);
        bool entering = dot(outward, dir) < 0.0;
        orb::Vec2 n = entering ? outward : -outward;
        double n_from, n_to;
        if (which == 0) {
            n_from = entering ? 1.0 : shell.ior;
            n_to = entering ? shell.ior : 1.0;
        } else {
            n_from = entering ? shell.ior : 1.0;
            n_to = entering ? 1.0 : shell.ior;
        }
        orb::Vec2 out;
        if (refr(dir, n, n_from / n_to, out))
            dir = out;
        else
            dir = dir - n * (2.0 * dot(dir, n));
        pos = p + dir * 1e-8;
    }
    path.exit_origin = pos;
    path.exit_dir = dir;
    return path;
}

}  // namespace oracle
