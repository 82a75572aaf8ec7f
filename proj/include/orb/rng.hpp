#pragma once

#include <cstdint>

#include "orb/vec3.hpp"

namespace orb {

namespace detail {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace detail

// Counter-based RNG keyed by (seed, pixel, sample). Every draw hashes the
// key with a strictly increasing draw index, so results are independent of
// thread scheduling; rendering the same pixel twice yields the same stream.
class PathRng {
public:
    PathRng(uint64_t seed, uint32_t px, uint32_t py, uint32_t sample) {
        uint64_t k = seed;
        k = detail::splitmix64(k ^ (static_cast<uint64_t>(px) << 32 | py));
        k = detail::splitmix64(k ^ sample);
        key_ = k;
    }

    // uniform in [0, 1)
    double next() {
        uint64_t bits = detail::splitmix64(key_ ^ draw_++);
        return static_cast<double>(bits >> 11) * 0x1.0p-53;
    }

    Vec2 next2() {
        double a = next();
        double b = next();
        return {a, b};
    }

private:
    uint64_t key_ = 0;
    uint64_t draw_ = 0;
};

// Cosine-weighted hemisphere sample around +z, mapped to `normal`.
inline UnitDir cosine_sample_hemisphere(const UnitDir& normal, double u1, double u2) {
    double r = std::sqrt(u1);
    double phi = 2.0 * kPi * u2;
    double x = r * std::cos(phi);
    double y = r * std::sin(phi);
    double z = std::sqrt(std::max(0.0, 1.0 - u1));
    // build orthonormal basis around normal
    Vec3 a = (std::abs(normal.x) > 0.9) ? Vec3{0, 1, 0} : Vec3{1, 0, 0};
    Vec3 t = normalize(cross(a, normal));
    Vec3 b = cross(normal, t);
    return normalize(t * x + b * y + normal * z);
}

}  // namespace orb
