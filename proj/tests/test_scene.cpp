#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "orb/experiments.hpp"
#include "orb/scene_format.hpp"
#include "orb/scene_gen.hpp"

using namespace orb;

namespace {

// A randomized valid config. Only the active background's spec is varied:
// the canonical serialization covers the selected stage, so the inactive
// stage's fields are not part of the round-trip contract.
SceneConfig random_config(std::mt19937_64& rng) {
    auto u = [&](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };
    auto ui = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

    SceneConfig cfg;
    cfg.orb.center = {u(-5, 5), u(-5, 5), u(-5, 5)};
    cfg.orb.radius = u(2.0, 10.0);
    cfg.orb.solid = ui(0, 1) == 1;
    cfg.orb.thickness = u(0.01, 1.0) * cfg.orb.radius;
    cfg.orb.material = ui(0, 1) ? "glass" : "calcite";
    cfg.orb.ior = u(1.1, 2.9);
    cfg.orb.tint = RGB{u(0, 1), u(0, 1), u(0, 1)};
    cfg.orb.absorption_per_cm = RGB{u(0, 0.5), u(0, 0.5), u(0, 0.5)};
    cfg.orb.lateral_shift = u(-2, 2);
    cfg.orb.enabled = ui(0, 1) == 1;

    cfg.camera.position = {u(-10, 10), u(-10, 10), u(60, 120)};
    cfg.camera.look_at = {u(-3, 3), u(-3, 3), u(-3, 3)};
    cfg.camera.vertical_fov_deg = u(5, 80);
    cfg.camera.width = ui(16, 2048);
    cfg.camera.height = ui(16, 2048);
    cfg.camera.projection = ui(0, 1) ? "perspective" : "orthographic";
    cfg.camera.ortho_width = u(10, 50);

    cfg.lights.main_direction = normalize(Vec3{u(-1, 1), u(-1, 1), -1.0});
    cfg.lights.cone_count = ui(1, 9);
    cfg.lights.cone_half_angle_deg = u(1, 15);
    cfg.lights.main_radiance = RGB{u(1, 5), u(1, 5), u(1, 5)};
    cfg.lights.ambient_radiance = cfg.lights.main_radiance * u(0.01, 0.2);

    int stage = ui(0, 2);
    if (stage == 0) {
        cfg.background = "folds";
        auto& r = cfg.relief;
        r.distance = u(15, 40);
        r.half_size = u(20, 60);
        r.mesh_resolution = ui(1, 256);
        r.convergence = {u(-2, 2), u(-2, 2)};
        r.fold_azimuths_deg.clear();
        int folds = ui(2, 6);
        for (int i = 0; i < folds; ++i) r.fold_azimuths_deg.push_back(u(0, 180));
        r.fold_half_angle_deg = u(1, 4);
        r.fold_height = u(0, 0.3);
        r.straight_radius = u(8, 14);
        r.curve_radius = u(10, 30);
        r.base_albedo = u(0.1, 0.5);
        r.stripe_contrast = u(0.0, 1.0) * r.base_albedo;
        r.stripe_period_deg = u(10, 40);
        r.stripe_phase_deg = u(0, 10);
        r.far_albedo = u(0.3, 0.9);
        r.far_radius = u(6, 12);
        r.dot_radius = u(0.1, 0.8);
    } else if (stage == 1) {
        cfg.background = "lines";
        auto& l = cfg.lines;
        l.spacing = u(1, 6);
        l.line_width = u(0.2, 1.0);
        l.line_albedo = u(0.01, 0.2);
        l.plane_albedo = u(0.4, 0.9);
        l.bend_deg = u(-15, 15);
        l.bend_start = u(3, 10);
    } else {
        cfg.background = "none";
    }

    if (ui(0, 3) == 0) {
        MeshInstanceSpec m;
        m.path = "meshes/hand.obj";
        m.offset = {u(-3, 3), u(-3, 3), u(-3, 3)};
        m.scale = u(0.5, 2.0);
        m.albedo = u(0.1, 0.9);
        cfg.meshes.push_back(m);
    }

    cfg.render.samples_per_pixel = ui(1, 512);
    cfg.render.max_depth = ui(5, 64);
    cfg.render.seed = rng();
    cfg.render.gamma = u(1.8, 2.6);
    cfg.render.threads = ui(0, 8);
    cfg.render.strict = ui(0, 1) == 1;
    return cfg;
}

}  // namespace

TEST_CASE("parse: minimal orb block with millimeter conversion") {
    SceneConfig cfg = parse_scene("orb { radius_cm = 6.8 thickness_mm = 1.3 }");
    CHECK(cfg.orb.radius == 6.8);
    CHECK(cfg.orb.thickness == Catch::Approx(0.13).margin(1e-15));
    CHECK(cfg.orb.material == "glass");
    CHECK(cfg.orb.ior == kGlassIor);
    CHECK_FALSE(cfg.orb.solid);
}

TEST_CASE("parse: empty file yields the all-defaults scene") {
    CHECK(parse_scene("") == SceneConfig{});
}

TEST_CASE("parse: unit violation thickness > radius") {
    CHECK_THROWS_AS(parse_scene("orb { radius_cm = 6.8 thickness_mm = 70 }"), ParseError);
}

TEST_CASE("parse: diagnostics carry line and column") {
    try {
        parse_scene("orb {\n  bogus_key = 1\n}");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
        CHECK(e.column == 3);
        CHECK(std::string(e.what()).find("bogus_key") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_scene("warp { }"), ParseError);          // unknown block
    CHECK_THROWS_AS(parse_scene("orb { radius_cm = }"), ParseError);  // syntax
    CHECK_THROWS_AS(parse_scene("orb { radius_cm = 1..2 }"), ParseError);
    CHECK_THROWS_AS(parse_scene("relief { texture = \"unterminated }"), ParseError);
}

TEST_CASE("parse/serialize: round trip is the identity on 100 random configs") {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 100; ++i) {
        SceneConfig cfg = random_config(rng);
        std::string text = serialize_scene(cfg);
        SceneConfig back = parse_scene(text);
        INFO("config " << i << "\n" << text);
        REQUIRE(back.orb == cfg.orb);
        REQUIRE(back.camera == cfg.camera);
        REQUIRE(back.lights == cfg.lights);
        REQUIRE(back.background == cfg.background);
        REQUIRE(back.relief == cfg.relief);
        REQUIRE(back.lines == cfg.lines);
        REQUIRE(back.meshes == cfg.meshes);
        REQUIRE(back.render == cfg.render);
        REQUIRE(back == cfg);
        REQUIRE(serialize_scene(back) == text);
    }
}

TEST_CASE("overrides: dotted path mirrors the block nesting") {
    SceneConfig cfg;
    apply_scene_override(cfg, "orb.thickness_mm", "2.6");
    CHECK(cfg.orb.thickness == Catch::Approx(0.26).margin(1e-15));
    apply_scene_override(cfg, "orb.solid", "true");
    CHECK(cfg.orb.solid);
    apply_scene_override(cfg, "render.spp", "32");
    CHECK(cfg.render.samples_per_pixel == 32);
    CHECK_THROWS_AS(apply_scene_override(cfg, "thickness_mm", "1"), ConfigError);
    CHECK_THROWS(apply_scene_override(cfg, "orb.no_such_key", "1"));
}

TEST_CASE("validate: rejects out-of-range physics and settings") {
    SceneConfig cfg;
    cfg.orb.ior = 3.5;
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    cfg = SceneConfig{};
    cfg.lights.ambient_radiance = cfg.lights.main_radiance;
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    cfg = SceneConfig{};
    cfg.render.max_depth = 4;
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    cfg = SceneConfig{};
    cfg.orb.material = "amber";
    CHECK_THROWS_AS(validate(cfg), ConfigError);
    CHECK_NOTHROW(validate(SceneConfig{}));
}

TEST_CASE("generators: stock stages are valid and aligned") {
    SceneConfig folds = default_scene();
    CHECK_NOTHROW(validate(folds));
    CHECK(folds.background == "folds");

    SceneConfig lines = three_lines_scene(10.0);
    CHECK_NOTHROW(validate(lines));
    CHECK(lines.background == "lines");
    CHECK(lines.camera.projection == "orthographic");
    CHECK(lines.lines.bend_deg == 10.0);
}

TEST_CASE("fold geometry: non-exempt fold lines pass through the projected center") {
    SceneConfig cfg = default_scene();
    Point2 center = silhouette_center_px(cfg);
    auto specs = fold_line_specs(cfg);
    size_t nonexempt = cfg.relief.fold_azimuths_deg.size();
    REQUIRE(specs.size() == nonexempt + 1);
    for (size_t i = 0; i < nonexempt; ++i) {
        Vec2 u = normalize(specs[i].dir);
        Vec2 w{center.x - specs[i].point.x, center.y - specs[i].point.y};
        CHECK(std::abs(cross(u, w)) < 1e-6);  // point-to-line distance in px
    }
    // the exempt fold misses the center by its configured offset
    Vec2 u = normalize(specs[nonexempt].dir);
    Vec2 w{center.x - specs[nonexempt].point.x, center.y - specs[nonexempt].point.y};
    double expected = cfg.relief.exempt_offset * plane_px_per_cm(cfg);
    CHECK(std::abs(cross(u, w)) == Catch::Approx(expected).margin(1e-6));
}

TEST_CASE("align_view: idempotent and preserves orb-center projection") {
    SceneConfig cfg = default_scene();
    Point3 pos1 = cfg.camera.position;
    align_view(cfg);
    CHECK(length(cfg.camera.position - pos1) < 1e-12);

    // shifted orb: realignment restores collinearity and center projection
    SceneConfig shifted = default_scene();
    shifted.orb.lateral_shift = 1.0;
    align_view(shifted);
    Point3 center = shifted.orb.effective_center();
    double plane_z = shifted.orb.center.z - shifted.relief.distance;
    Point3 conv{shifted.relief.convergence.x, shifted.relief.convergence.y, plane_z};
    Vec3 a = shifted.camera.position - center;
    Vec3 b = center - conv;
    CHECK(length(cross(a, b)) / (length(a) * length(b)) < 1e-12);
    Point2 proj = project_point(shifted, center);
    Point2 proj_conv = project_point(shifted, conv);
    CHECK(std::abs(proj.x - proj_conv.x) < 1e-9);
    CHECK(std::abs(proj.y - proj_conv.y) < 1e-9);

    Point3 pos2 = shifted.camera.position;
    align_view(shifted);
    CHECK(length(shifted.camera.position - pos2) < 1e-12);
}

TEST_CASE("align_view: degenerate configurations raise alignment errors") {
    SceneConfig degenerate;
    degenerate.relief.distance = 0.0;  // convergence point coincides with center
    CHECK_THROWS_AS(align_view(degenerate), AlignmentError);

    SceneConfig inside;
    inside.camera.position = {0.0, 0.0, 3.0};  // closer than the orb radius
    CHECK_THROWS_AS(align_view(inside), AlignmentError);
}

TEST_CASE("camera: project inverts generate_ray") {
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const char* projection : {"perspective", "orthographic"}) {
        CameraSpec spec;
        spec.projection = projection;
        spec.width = 640;
        spec.height = 480;
        Camera cam = make_camera(spec);
        for (int i = 0; i < 1000; ++i) {
            double sx = u(rng) * spec.width, sy = u(rng) * spec.height;
            Ray ray = cam.generate_ray(sx, sy);
            Point2 back = cam.project(ray.at(35.0));
            REQUIRE(std::abs(back.x - sx) < 1e-9);
            REQUIRE(std::abs(back.y - sy) < 1e-9);
        }
    }
}

TEST_CASE("light rig: total power invariant under cone_count") {
    LightRig rig;
    RGB reference{0, 0, 0};
    for (int count : {1, 2, 5, 9}) {
        rig.cone_count = count;
        auto lights = build_light_cone(rig);
        REQUIRE(static_cast<int>(lights.size()) == count);
        RGB total{0, 0, 0};
        for (const auto& l : lights) {
            total += l.radiance;
            CHECK(is_unit(l.direction, 1e-9));
        }
        if (count == 1) reference = total;
        CHECK(total.r == Catch::Approx(reference.r).margin(1e-12));
        CHECK(total.g == Catch::Approx(reference.g).margin(1e-12));
        CHECK(total.b == Catch::Approx(reference.b).margin(1e-12));
    }
}

TEST_CASE("silhouette: projected radius matches a limb ray probe") {
    SceneConfig cfg = default_scene();
    Point2 center = silhouette_center_px(cfg);
    double radius = silhouette_radius_px(cfg);
    Camera cam = make_camera(cfg.camera);
    ShellPrimitive shell{cfg.orb.effective_center(), cfg.orb.radius, cfg.orb.thickness};
    // rays just inside the predicted silhouette hit, just outside miss
    for (double dy : {-1.0, 1.0}) {
        Ray inside = cam.generate_ray(center.x, center.y + dy * (radius - 0.01));
        Ray outside = cam.generate_ray(center.x, center.y + dy * (radius + 0.01));
        CHECK_FALSE(intersect_shell(inside, shell).empty());
        CHECK(intersect_shell(outside, shell).empty());
    }
}
