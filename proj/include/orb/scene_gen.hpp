#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <vector>

#include "orb/image_io.hpp"
#include "orb/obj.hpp"
#include "orb/scene.hpp"
#include "orb/texture.hpp"

namespace orb {

// ---------------------------------------------------------------------------
// Camera: pixel <-> ray mapping. Continuous pixel coordinates; the center of
// pixel (i, j) is (i + 0.5, j + 0.5). project() is the exact inverse of
// generate_ray() for points in front of the camera.
// ---------------------------------------------------------------------------

struct Camera {
    Point3 position;
    UnitDir forward, right, up;
    int width = 0, height = 0;
    bool orthographic = false;
    double tan_half_fov = 0.0;    // perspective
    double ortho_half_width = 0.0;  // orthographic
    double aspect = 1.0;            // width / height

    Ray generate_ray(double sx, double sy) const {
        double ndc_x = 2.0 * sx / width - 1.0;
        double ndc_y = 1.0 - 2.0 * sy / height;
        if (orthographic) {
            Point3 o = position + right * (ndc_x * ortho_half_width) +
                       up * (ndc_y * ortho_half_width / aspect);
            return Ray{o, forward};
        }
        Vec3 d = forward + right * (ndc_x * tan_half_fov * aspect) + up * (ndc_y * tan_half_fov);
        return Ray{position, normalize(d)};
    }

    // World point to continuous pixel coordinates.
    Point2 project(const Point3& p) const {
        Vec3 v = p - position;
        double cx, cy;
        if (orthographic) {
            cx = dot(v, right) / ortho_half_width;
            cy = dot(v, up) / (ortho_half_width / aspect);
        } else {
            double z = dot(v, forward);
            cx = dot(v, right) / z / (tan_half_fov * aspect);
            cy = dot(v, up) / z / tan_half_fov;
        }
        return {(cx + 1.0) * 0.5 * width, (1.0 - cy) * 0.5 * height};
    }
};

inline Camera make_camera(const CameraSpec& spec) {
    Camera cam;
    cam.position = spec.position;
    cam.forward = normalize(spec.look_at - spec.position);
    Vec3 world_up{0.0, 1.0, 0.0};
    if (std::abs(dot(cam.forward, world_up)) > 0.999) world_up = Vec3{0.0, 0.0, 1.0};
    cam.right = normalize(cross(cam.forward, world_up));
    cam.up = cross(cam.right, cam.forward);
    cam.width = spec.width;
    cam.height = spec.height;
    cam.aspect = static_cast<double>(spec.width) / spec.height;
    cam.orthographic = (spec.projection == "orthographic");
    cam.tan_half_fov = std::tan(0.5 * deg_to_rad(spec.vertical_fov_deg));
    cam.ortho_half_width = 0.5 * spec.ortho_width;
    return cam;
}

// ---------------------------------------------------------------------------
// Lights: the main directional light split over a small cone of directions,
// plus a constant ambient environment returned by escaping rays.
// ---------------------------------------------------------------------------

struct DirectionalLight {
    UnitDir direction;  // direction the light travels
    RGB radiance;
};

inline std::vector<DirectionalLight> build_light_cone(const LightRig& rig) {
    std::vector<DirectionalLight> out;
    UnitDir main = normalize(rig.main_direction);
    RGB each = rig.main_radiance / static_cast<double>(rig.cone_count);
    out.push_back({main, each});
    if (rig.cone_count > 1) {
        Vec3 a = (std::abs(main.x) > 0.9) ? Vec3{0, 1, 0} : Vec3{1, 0, 0};
        UnitDir t = normalize(cross(a, main));
        UnitDir b = cross(main, t);
        double half = deg_to_rad(rig.cone_half_angle_deg);
        double ch = std::cos(half), sh = std::sin(half);
        for (int k = 1; k < rig.cone_count; ++k) {
            double phi = 2.0 * kPi * k / (rig.cone_count - 1);
            UnitDir d = normalize(main * ch + (t * std::cos(phi) + b * std::sin(phi)) * sh);
            out.push_back({d, each});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// View alignment: move the camera minimally onto the line through the orb
// center and the fold convergence point, so eye, center and convergence are
// collinear and the center projects exactly onto the convergence point.
// Idempotent: an already-aligned camera is the closest point to itself.
// ---------------------------------------------------------------------------

struct AlignmentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void align_view(SceneConfig& cfg) {
    Point3 center = cfg.orb.effective_center();
    double plane_z = cfg.orb.center.z - cfg.relief.distance;
    Point3 conv{cfg.relief.convergence.x, cfg.relief.convergence.y, plane_z};
    Vec3 axis = center - conv;
    if (!std::isfinite(length(axis)) || length(axis) < 1e-9)
        throw AlignmentError("align_view: degenerate convergence point");
    UnitDir u = normalize(axis);
    double t = dot(cfg.camera.position - center, u);
    if (t <= cfg.orb.radius)
        throw AlignmentError("align_view: camera would land inside the orb");
    cfg.camera.position = center + t * u;
    cfg.camera.look_at = center;
}

// ---------------------------------------------------------------------------
// Scene generators for the two stock stages.
// ---------------------------------------------------------------------------

// Draped-relief composition behind a hollow orb; all defaults are the
// calibrated stand-in values in ReliefSpec.
inline SceneConfig default_scene() {
    SceneConfig cfg;
    align_view(cfg);
    return cfg;
}

// Orthogonal-view stage: three parallel lines behind the orb, the middle one
// passing behind the orb center. bend_deg kinks the middle line above the orb.
inline SceneConfig three_lines_scene(double bend_deg = 0.0) {
    SceneConfig cfg;
    cfg.background = "lines";
    cfg.lines.bend_deg = bend_deg;
    cfg.camera.projection = "orthographic";
    align_view(cfg);
    return cfg;
}

// ---------------------------------------------------------------------------
// Heightfield relief mesh: regular grid over the relief square, displaced
// toward the camera by the pattern's ridge height.
// ---------------------------------------------------------------------------

template <typename HeightFn>
inline MeshPrimitive build_heightfield(double half_size, int resolution, double plane_z,
                                       Point2 center, HeightFn&& height) {
    MeshPrimitive mesh;
    int n = resolution + 1;
    mesh.vertices.reserve(static_cast<size_t>(n) * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            double x = center.x + (2.0 * i / resolution - 1.0) * half_size;
            double y = center.y + (2.0 * j / resolution - 1.0) * half_size;
            mesh.vertices.push_back({x, y, plane_z + height(x, y)});
        }
    mesh.triangles.reserve(static_cast<size_t>(resolution) * resolution * 2);
    for (int j = 0; j < resolution; ++j)
        for (int i = 0; i < resolution; ++i) {
            int a = j * n + i, b = a + 1, c = a + n, d = c + 1;
            mesh.triangles.push_back({a, b, c});
            mesh.triangles.push_back({b, d, c});
        }
    mesh.validate();
    mesh.build_bvh();
    return mesh;
}

// ---------------------------------------------------------------------------
// Traceable scene assembled from a SceneConfig.
// ---------------------------------------------------------------------------

struct SceneMaterial {
    enum class Kind { Lambert, Dielectric };
    Kind kind = Kind::Lambert;
    AlbedoFn albedo;        // Lambert: evaluated at world (x, y)
    DielectricSpec diel;    // Dielectric
    RGB absorption_per_cm{0.0, 0.0, 0.0};
};

struct ScenePrimitive {
    enum class Kind { Shell, Mesh };
    Kind kind = Kind::Mesh;
    ShellPrimitive shell{};
    std::shared_ptr<MeshPrimitive> mesh;
    int material_id = 0;
};

struct TraceScene {
    Camera camera;
    std::vector<ScenePrimitive> primitives;
    std::vector<SceneMaterial> materials;
    std::vector<DirectionalLight> lights;
    RGB ambient{0.0, 0.0, 0.0};
    RenderSettings settings;
    double interior_ior = 1.0;  // medium inside a hollow shell

    // Nearest hit. skip_dielectric drops shell primitives (shadow rays).
    std::optional<SurfaceHit> intersect(const Ray& ray, bool skip_dielectric = false) const {
        std::optional<SurfaceHit> best;
        double closest = ray.t_max;
        for (size_t pid = 0; pid < primitives.size(); ++pid) {
            const ScenePrimitive& prim = primitives[pid];
            bool dielectric =
                materials[prim.material_id].kind == SceneMaterial::Kind::Dielectric;
            if (skip_dielectric && dielectric) continue;
            Ray r = ray;
            r.t_max = closest;
            std::optional<SurfaceHit> hit;
            if (prim.kind == ScenePrimitive::Kind::Shell) {
                auto hits = intersect_shell(r, prim.shell);
                if (!hits.empty()) hit = hits.front();
            } else {
                hit = prim.mesh->intersect(r);
            }
            if (hit && hit->t < closest) {
                hit->primitive_id = static_cast<int>(pid);
                hit->material_id = prim.material_id;
                closest = hit->t;
                best = hit;
            }
        }
        return best;
    }

    bool occluded(const Ray& ray) const {
        // Shadow rays ignore dielectric media: refraction would displace the
        // transmitted light, and sampling it properly needs caustic machinery
        // the experiments do not depend on.
        return intersect(ray, true).has_value();
    }
};

inline AlbedoFn make_background_albedo(const SceneConfig& cfg) {
    if (cfg.background == "lines") {
        LinePattern pat(cfg.lines, cfg.relief.convergence);
        return [pat](double x, double y) { return RGB(pat.albedo(x, y)); };
    }
    if (!cfg.relief.texture.empty()) {
        ImagePattern pat(read_image_file(cfg.relief.texture), cfg.relief.half_size);
        return [pat](double x, double y) { return pat.albedo(x, y); };
    }
    FoldPattern pat(cfg.relief);
    return [pat](double x, double y) { return RGB(pat.albedo(x, y)); };
}

inline TraceScene build_scene(const SceneConfig& cfg,
                              std::optional<double> ior_override = std::nullopt) {
    validate(cfg);
    TraceScene scene;
    scene.camera = make_camera(cfg.camera);
    scene.lights = build_light_cone(cfg.lights);
    scene.ambient = cfg.lights.ambient_radiance;
    scene.settings = cfg.render;

    if (cfg.orb.enabled) {
        SceneMaterial glass;
        glass.kind = SceneMaterial::Kind::Dielectric;
        glass.diel.ior = ior_override.value_or(cfg.orb.ior);
        glass.diel.tint = cfg.orb.tint;
        glass.absorption_per_cm = cfg.orb.absorption_per_cm;
        scene.materials.push_back(glass);

        ScenePrimitive prim;
        prim.kind = ScenePrimitive::Kind::Shell;
        prim.shell = ShellPrimitive{cfg.orb.effective_center(), cfg.orb.radius,
                                    cfg.orb.effective_thickness()};
        prim.shell.validate();
        prim.material_id = 0;
        scene.primitives.push_back(prim);
    }

    if (cfg.background != "none") {
        SceneMaterial backdrop;
        backdrop.kind = SceneMaterial::Kind::Lambert;
        backdrop.albedo = make_background_albedo(cfg);
        scene.materials.push_back(backdrop);

        double plane_z = cfg.orb.center.z - cfg.relief.distance;
        ScenePrimitive prim;
        prim.kind = ScenePrimitive::Kind::Mesh;
        if (cfg.background == "folds") {
            FoldPattern pat(cfg.relief);
            prim.mesh = std::make_shared<MeshPrimitive>(build_heightfield(
                cfg.relief.half_size, cfg.relief.mesh_resolution, plane_z,
                cfg.relief.convergence, [&](double x, double y) { return pat.height(x, y); }));
        } else {
            prim.mesh = std::make_shared<MeshPrimitive>(
                build_heightfield(cfg.relief.half_size, 1, plane_z, cfg.relief.convergence,
                                  [](double, double) { return 0.0; }));
        }
        prim.material_id = static_cast<int>(scene.materials.size()) - 1;
        scene.primitives.push_back(prim);
    }

    for (const auto& inst : cfg.meshes) {
        auto mesh = std::make_shared<MeshPrimitive>(load_obj(inst.path));
        for (auto& v : mesh->vertices) v = v * inst.scale + inst.offset;
        mesh->build_bvh();
        SceneMaterial mat;
        mat.kind = SceneMaterial::Kind::Lambert;
        double a = inst.albedo;
        mat.albedo = [a](double, double) { return RGB(a); };
        scene.materials.push_back(mat);
        ScenePrimitive prim;
        prim.kind = ScenePrimitive::Kind::Mesh;
        prim.mesh = mesh;
        prim.material_id = static_cast<int>(scene.materials.size()) - 1;
        scene.primitives.push_back(prim);
    }

    return scene;
}

}  // namespace orb
