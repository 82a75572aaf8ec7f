#pragma once

#include <cstdint>
#include <limits>

#include "orb/vec3.hpp"

namespace orb {

// Hit-point offset along the normal to avoid self-intersection. Three orders
// of magnitude below the smallest scene feature (the 0.13 cm shell wall).
inline constexpr double kRayEpsilon = 1e-4;

struct Ray {
    Point3 origin;
    UnitDir dir;
    double t_min = kRayEpsilon;
    double t_max = std::numeric_limits<double>::infinity();

    Point3 at(double t) const { return origin + dir * t; }
};

enum class Interface : uint8_t {
    None,   // not a shell surface (mesh, plane, solid sphere surface)
    Outer,  // outer sphere of a shell
    Inner,  // inner sphere of a shell
};

struct SurfaceHit {
    double t = 0.0;
    Point3 point;
    UnitDir normal;              // geometric, oriented outward from the primitive
    int primitive_id = -1;
    int material_id = -1;
    bool entering = true;        // ray origin on the outward-normal side
    Interface interface_kind = Interface::None;
    double u = 0.0, v = 0.0;     // surface parameterization (mesh UV / plane coords)
};

}  // namespace orb
