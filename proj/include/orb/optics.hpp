#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "orb/vec3.hpp"

namespace orb {

// Crown glass, the paper's value for a blown orb.
inline constexpr double kGlassIor = 1.51714;

struct RGB {
    double r = 0.0, g = 0.0, b = 0.0;
    constexpr RGB() = default;
    constexpr RGB(double r_, double g_, double b_) : r(r_), g(g_), b(b_) {}
    explicit constexpr RGB(double v) : r(v), g(v), b(v) {}
    constexpr RGB operator+(const RGB& o) const { return {r + o.r, g + o.g, b + o.b}; }
    constexpr RGB operator-(const RGB& o) const { return {r - o.r, g - o.g, b - o.b}; }
    constexpr RGB operator*(const RGB& o) const { return {r * o.r, g * o.g, b * o.b}; }
    constexpr RGB operator*(double s) const { return {r * s, g * s, b * s}; }
    constexpr RGB operator/(double s) const { return {r / s, g / s, b / s}; }
    RGB& operator+=(const RGB& o) { r += o.r; g += o.g; b += o.b; return *this; }
    RGB& operator*=(const RGB& o) { r *= o.r; g *= o.g; b *= o.b; return *this; }
    constexpr bool operator==(const RGB& o) const { return r == o.r && g == o.g && b == o.b; }
    double max_component() const { return std::max(r, std::max(g, b)); }
};
inline constexpr RGB operator*(double s, const RGB& c) { return c * s; }

// Rec. 709 luma weights on linear RGB.
inline double luminance(const RGB& c) { return 0.2126 * c.r + 0.7152 * c.g + 0.0722 * c.b; }

struct DielectricSpec {
    double ior = kGlassIor;          // in (1, 3]
    RGB tint{1.0, 1.0, 1.0};         // transmittance per boundary crossing
};

// Calcite, modeled by the paper as two isotropic renders averaged.
struct CalciteSpec {
    double ior_ordinary = 1.658;
    double ior_extraordinary = 1.486;
};

// --- Snell refraction ------------------------------------------------------

// incident and normal are unit; normal opposes incident (incident.normal < 0);
// eta_ratio = n_from / n_to. Empty result signals total internal reflection.
inline std::optional<UnitDir> refract(const UnitDir& incident, const UnitDir& normal,
                                      double eta_ratio) {
    assert(is_unit(incident) && is_unit(normal));
    double cos_i = -dot(incident, normal);
    assert(cos_i > 0.0);
    double sin2_t = eta_ratio * eta_ratio * (1.0 - cos_i * cos_i);
    if (sin2_t >= 1.0) return std::nullopt;  // TIR
    double cos_t = std::sqrt(1.0 - sin2_t);
    Vec3 t = eta_ratio * incident + (eta_ratio * cos_i - cos_t) * normal;
    return normalize(t);
}

inline UnitDir reflect(const UnitDir& incident, const UnitDir& normal) {
    return incident - 2.0 * dot(incident, normal) * normal;
}

// --- Fresnel ---------------------------------------------------------------

// Exact unpolarized dielectric reflectance (not Schlick; its error near the
// critical angle matters here). cos_incident in (0, 1].
inline double fresnel_reflectance(double cos_incident, double eta_from, double eta_to) {
    assert(cos_incident > 0.0 && cos_incident <= 1.0 + 1e-12);
    assert(eta_from > 0.0 && eta_to > 0.0);
    double cos_i = std::min(cos_incident, 1.0);
    double sin2_t = (eta_from / eta_to) * (eta_from / eta_to) * (1.0 - cos_i * cos_i);
    if (sin2_t >= 1.0) return 1.0;  // beyond critical angle
    double cos_t = std::sqrt(1.0 - sin2_t);
    double r_s = (eta_from * cos_i - eta_to * cos_t) / (eta_from * cos_i + eta_to * cos_t);
    double r_p = (eta_from * cos_t - eta_to * cos_i) / (eta_from * cos_t + eta_to * cos_i);
    return 0.5 * (r_s * r_s + r_p * r_p);
}

// Transmittance through the amplitude transmission coefficients, including
// the (n_t cos_t)/(n_i cos_i) power normalization. Algebraically 1 - R;
// kept as a second route so energy conservation is checkable, not assumed.
inline double fresnel_transmittance(double cos_incident, double eta_from, double eta_to) {
    double cos_i = std::min(cos_incident, 1.0);
    double sin2_t = (eta_from / eta_to) * (eta_from / eta_to) * (1.0 - cos_i * cos_i);
    if (sin2_t >= 1.0) return 0.0;
    double cos_t = std::sqrt(1.0 - sin2_t);
    double t_s = 2.0 * eta_from * cos_i / (eta_from * cos_i + eta_to * cos_t);
    double t_p = 2.0 * eta_from * cos_i / (eta_from * cos_t + eta_to * cos_i);
    double scale = (eta_to * cos_t) / (eta_from * cos_i);
    return 0.5 * scale * (t_s * t_s + t_p * t_p);
}

// --- Medium stack ----------------------------------------------------------

struct GeometryInconsistencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr int kAmbientMedium = 0;

// Nested-media record. Bottom element is always ambient air; the top element
// is the medium containing the current ray origin. The scene nests strictly
// (air > glass > air), so a stack is sufficient.
class MediumStack {
public:
    MediumStack() { entries_.push_back({kAmbientMedium, 1.0}); }

    struct Entry {
        int medium_id;
        double ior;
    };

    const Entry& top() const { return entries_.back(); }
    const Entry& below_top() const {
        assert(entries_.size() >= 2);
        return entries_[entries_.size() - 2];
    }
    size_t depth() const { return entries_.size(); }

    void push(int medium_id, double ior) { entries_.push_back({medium_id, ior}); }

    void pop(int expected_medium_id) {
        if (entries_.size() <= 1)
            throw GeometryInconsistencyError(
                "medium stack underflow: exiting ambient medium (primitive id " +
                std::to_string(expected_medium_id) + ")");
        if (entries_.back().medium_id != expected_medium_id)
            throw GeometryInconsistencyError(
                "medium stack mismatch: exiting medium " + std::to_string(expected_medium_id) +
                " but inside medium " + std::to_string(entries_.back().medium_id));
        entries_.pop_back();
    }

private:
    std::vector<Entry> entries_;
};

}  // namespace orb
