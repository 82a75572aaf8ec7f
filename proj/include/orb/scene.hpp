#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "orb/mesh.hpp"
#include "orb/optics.hpp"
#include "orb/shell.hpp"

namespace orb {

// ---------------------------------------------------------------------------
// Declarative scene description. Everything here is plain data: it is what
// the scene text format parses into and serializes from. Units: centimeters,
// degrees at this boundary only.
// ---------------------------------------------------------------------------

struct OrbSpec {
    Point3 center{0.0, 0.0, 0.0};
    double radius = 6.8;             // cm
    bool solid = false;
    double thickness = 0.13;         // cm (1.3 mm); ignored when solid
    std::string material = "glass";  // "glass" | "calcite"
    double ior = kGlassIor;
    RGB tint{1.0, 1.0, 1.0};         // per boundary crossing
    RGB absorption_per_cm{0.0, 0.0, 0.0};  // optional Beer-Lambert mode
    double lateral_shift = 0.0;      // cm along +x
    bool enabled = true;             // false renders the no-orb reference

    double effective_thickness() const { return solid ? radius : thickness; }
    Point3 effective_center() const { return center + Vec3{lateral_shift, 0.0, 0.0}; }
};

struct CameraSpec {
    Point3 position{0.0, 0.0, 90.0};
    Point3 look_at{0.0, 0.0, 0.0};
    double vertical_fov_deg = 25.0;
    int width = 1024;
    int height = 1024;
    std::string projection = "perspective";  // | "orthographic"
    double ortho_width = 27.2;               // cm across the image, orthographic only
};

struct LightRig {
    UnitDir main_direction{-0.18, -0.798, -0.575};  // direction light travels
    int cone_count = 5;
    double cone_half_angle_deg = 5.0;
    RGB main_radiance{3.5, 3.5, 3.5};      // total across the cone
    RGB ambient_radiance{0.14, 0.14, 0.14};
};

// Procedural radial-folds relief: a mid-tone robe with dark fold bands
// converging to a point and a small bright convergence dot.
// The values below are the calibrated defaults of the stand-in composition.
struct ReliefSpec {
    double distance = 25.0;       // cm behind the orb center, along the view axis
    double half_size = 40.0;      // cm, square relief
    int mesh_resolution = 192;    // heightfield grid (resolution is a config knob)
    Point2 convergence{0.0, 0.0};  // on the relief plane; projected orb center by default

    std::vector<double> fold_azimuths_deg{20.0, 40.0, 60.0, 80.0, 100.0};
    // Folds are constant-angle wedges: their image is invariant under the
    // purely radial remapping of a centered shell, so any non-inverting orb
    // leaves them untouched. The width floor only kicks in near the dot.
    double fold_half_angle_deg = 2.0;    // wedge half-width
    double fold_min_half_width = 0.05;   // cm, floor near the convergence point
    // Ridge relief is off by default: the slope of a raised fold varies with
    // distance from the convergence point, so its shading would not share the
    // albedo wedges' radial-remap invariance.
    double fold_height = 0.0;            // cm, ridge height
    // The straight/curved split is what makes fold displacement thickness
    // sensitive: a 1.3 mm shell magnifies the background too weakly for the
    // near-silhouette annulus to reach the curved region, a 2.6 mm shell
    // pulls the bend into view and the fold tracks stop extrapolating.
    double straight_radius = 11.0;       // cm; folds are straight lines out to here
    double curve_radius = 15.0;          // cm; curvature radius beyond straight_radius

    // the leftmost fold: exempt from convergence, with a wider soft shadow
    double exempt_azimuth_deg = 115.0;
    double exempt_offset = 0.6;          // cm, lateral miss of the convergence point
    double exempt_shadow_scale = 3.0;

    // The base tone is chosen so the robe's diffuse luminance sits near the
    // environment average; a thin neutral shell then barely changes the
    // picture (transmission loss and reflected environment glow cancel),
    // which is the effect the solid-vs-hollow comparison measures.
    double base_albedo = 0.17;
    // Angular square-wave striping of the base tone (base_albedo +/- the
    // contrast). Like the fold wedges it is a pure function of azimuth, so a
    // centered shell leaves it untouched; with 180 deg an odd multiple of the
    // half period, a point-reflected view lands exactly in anti-phase.
    double stripe_contrast = 0.10;
    double stripe_period_deg = 24.0;
    double stripe_phase_deg = 2.0;
    double fold_albedo = 0.03;
    // Beyond far_radius the striping gives way to a brighter uniform zone.
    // The cut sits outside every plane point that the interior of a thin
    // centered shell can show, but well inside the reach of a solid ball's
    // strong remapping, so the bright zone separates the two sharply.
    double far_albedo = 0.60;
    double far_radius = 7.4;             // cm
    double dot_albedo = 0.05;
    double dot_radius = 0.35;            // cm

    std::string texture;                 // optional image file; overrides the pattern
};

// Three-lines stage: parallel dark lines on a light plane.
struct LinesSpec {
    double spacing = 3.4;      // cm between adjacent lines
    double line_width = 0.5;   // cm
    double line_albedo = 0.05;
    double plane_albedo = 0.70;
    double bend_deg = 0.0;     // kink angle of the middle line
    double bend_start = 7.0;   // cm from the middle-line/convergence crossing
};

struct MeshInstanceSpec {
    std::string path;          // OBJ file
    Vec3 offset{0.0, 0.0, 0.0};
    double scale = 1.0;
    double albedo = 0.5;
};

struct RenderSettings {
    int samples_per_pixel = 64;
    int max_depth = 16;  // a hollow-orb chief path alone needs 4 interface events
    uint64_t seed = 7;
    double gamma = 2.2;
    int threads = 0;     // 0: hardware concurrency
    bool strict = false; // fail fast on non-finite radiance
};

struct SceneConfig {
    OrbSpec orb;
    CameraSpec camera;
    LightRig lights;
    std::string background = "folds";  // "folds" | "lines" | "none"
    ReliefSpec relief;
    LinesSpec lines;
    std::vector<MeshInstanceSpec> meshes;
    RenderSettings render;

    bool operator==(const SceneConfig&) const = default;
};

inline bool operator==(const OrbSpec& a, const OrbSpec& b) {
    return a.center == b.center && a.radius == b.radius && a.solid == b.solid &&
           a.thickness == b.thickness && a.material == b.material && a.ior == b.ior &&
           a.tint == b.tint && a.absorption_per_cm == b.absorption_per_cm &&
           a.lateral_shift == b.lateral_shift && a.enabled == b.enabled;
}
inline bool operator==(const CameraSpec& a, const CameraSpec& b) {
    return a.position == b.position && a.look_at == b.look_at &&
           a.vertical_fov_deg == b.vertical_fov_deg && a.width == b.width &&
           a.height == b.height && a.projection == b.projection && a.ortho_width == b.ortho_width;
}
inline bool operator==(const LightRig& a, const LightRig& b) {
    return a.main_direction == b.main_direction && a.cone_count == b.cone_count &&
           a.cone_half_angle_deg == b.cone_half_angle_deg && a.main_radiance == b.main_radiance &&
           a.ambient_radiance == b.ambient_radiance;
}
inline bool operator==(const ReliefSpec& a, const ReliefSpec& b) {
    return a.distance == b.distance && a.half_size == b.half_size &&
           a.mesh_resolution == b.mesh_resolution && a.convergence == b.convergence &&
           a.fold_azimuths_deg == b.fold_azimuths_deg &&
           a.fold_half_angle_deg == b.fold_half_angle_deg &&
           a.fold_min_half_width == b.fold_min_half_width && a.fold_height == b.fold_height &&
           a.straight_radius == b.straight_radius && a.curve_radius == b.curve_radius &&
           a.exempt_azimuth_deg == b.exempt_azimuth_deg && a.exempt_offset == b.exempt_offset &&
           a.exempt_shadow_scale == b.exempt_shadow_scale && a.base_albedo == b.base_albedo &&
           a.stripe_contrast == b.stripe_contrast &&
           a.stripe_period_deg == b.stripe_period_deg &&
           a.stripe_phase_deg == b.stripe_phase_deg &&
           a.fold_albedo == b.fold_albedo && a.far_albedo == b.far_albedo &&
           a.far_radius == b.far_radius && a.dot_albedo == b.dot_albedo &&
           a.dot_radius == b.dot_radius && a.texture == b.texture;
}
inline bool operator==(const LinesSpec& a, const LinesSpec& b) {
    return a.spacing == b.spacing && a.line_width == b.line_width &&
           a.line_albedo == b.line_albedo && a.plane_albedo == b.plane_albedo &&
           a.bend_deg == b.bend_deg && a.bend_start == b.bend_start;
}
inline bool operator==(const MeshInstanceSpec& a, const MeshInstanceSpec& b) {
    return a.path == b.path && a.offset == b.offset && a.scale == b.scale && a.albedo == b.albedo;
}
inline bool operator==(const RenderSettings& a, const RenderSettings& b) {
    return a.samples_per_pixel == b.samples_per_pixel && a.max_depth == b.max_depth &&
           a.seed == b.seed && a.gamma == b.gamma && a.threads == b.threads &&
           a.strict == b.strict;
}

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void validate(const SceneConfig& cfg) {
    const auto& o = cfg.orb;
    if (o.radius <= 0.0) throw ConfigError("orb.radius_cm must be positive");
    if (!o.solid) {
        if (o.thickness <= 0.0) throw ConfigError("orb.thickness_cm must be positive");
        if (o.thickness > o.radius)
            throw ConfigError("unit violation: orb thickness exceeds radius");
    }
    if (o.ior <= 1.0 || o.ior > 3.0) throw ConfigError("orb.ior must be in (1, 3]");
    for (double c : {o.tint.r, o.tint.g, o.tint.b})
        if (c < 0.0 || c > 1.0) throw ConfigError("orb.tint channels must be in [0, 1]");
    if (o.material != "glass" && o.material != "calcite")
        throw ConfigError("orb.material must be glass or calcite");
    if (cfg.camera.vertical_fov_deg <= 1.0 || cfg.camera.vertical_fov_deg >= 120.0)
        throw ConfigError("camera.vertical_fov_deg must be in (1, 120)");
    if (cfg.camera.width <= 0 || cfg.camera.height <= 0)
        throw ConfigError("camera image size must be positive");
    if (cfg.camera.projection != "perspective" && cfg.camera.projection != "orthographic")
        throw ConfigError("camera.projection must be perspective or orthographic");
    if (cfg.lights.cone_count < 1) throw ConfigError("lights.cone_count must be >= 1");
    if (luminance(cfg.lights.ambient_radiance) >= luminance(cfg.lights.main_radiance))
        throw ConfigError("ambient radiance must stay below main radiance");
    if (cfg.background != "folds" && cfg.background != "lines" && cfg.background != "none")
        throw ConfigError("background must be folds, lines or none");
    if (cfg.render.samples_per_pixel < 1) throw ConfigError("render.spp must be >= 1");
    if (cfg.render.max_depth < 5)
        throw ConfigError("render.max_depth must be >= 5 (hollow chief path needs 4 interfaces)");
    if (cfg.relief.mesh_resolution < 1) throw ConfigError("relief.mesh_resolution must be >= 1");
    if (cfg.relief.stripe_contrast < 0.0 || cfg.relief.stripe_contrast > cfg.relief.base_albedo)
        throw ConfigError("relief.stripe_contrast must be in [0, base_albedo]");
    if (cfg.relief.stripe_period_deg <= 0.0)
        throw ConfigError("relief.stripe_period_deg must be positive");
}

}  // namespace orb
