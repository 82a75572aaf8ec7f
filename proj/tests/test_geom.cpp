#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "orb/mesh.hpp"
#include "orb/obj.hpp"
#include "orb/scene_gen.hpp"
#include "orb/shell.hpp"
#include "orb/sphere.hpp"
#include "oracle.hpp"

using namespace orb;

namespace {

Ray make_ray(Point3 o, Vec3 d) { return Ray{o, normalize(d)}; }

// Uniform random unit vector.
UnitDir random_dir(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    while (true) {
        Vec3 v{u(rng), u(rng), u(rng)};
        double l2 = length_squared(v);
        if (l2 > 1e-4 && l2 <= 1.0) return normalize(v);
    }
}

double impact_parameter(const Ray& ray, const Point3& center) {
    Vec3 oc = center - ray.origin;
    return length(oc - ray.dir * dot(oc, ray.dir));
}

}  // namespace

TEST_CASE("sphere: axis-aligned hit") {
    Ray ray = make_ray({0, 0, -10}, {0, 0, 1});
    auto hit = intersect_sphere(ray, {0, 0, 0}, 1.0);
    REQUIRE(hit.has_value());
    CHECK(hit->t == Catch::Approx(9.0).margin(1e-12));
    CHECK(length(hit->point - Point3{0, 0, -1}) < 1e-12);
    CHECK(length(hit->normal - Vec3{0, 0, -1}) < 1e-12);
    CHECK(hit->entering);
}

TEST_CASE("sphere: miss") {
    Ray ray = make_ray({0, 2, -10}, {0, 0, 1});
    CHECK_FALSE(intersect_sphere(ray, {0, 0, 0}, 1.0).has_value());
}

TEST_CASE("sphere: origin at center") {
    Ray ray = make_ray({0, 0, 0}, {1, 0, 0});
    auto hit = intersect_sphere(ray, {0, 0, 0}, 6.8);
    REQUIRE(hit.has_value());
    CHECK(hit->t == Catch::Approx(6.8).margin(1e-12));
    CHECK_FALSE(hit->entering);
}

TEST_CASE("shell: central ray gives 4 hits at the closed-form distances") {
    ShellPrimitive shell{{0, 0, 0}, 6.8, 0.13};
    double d = 90.0;
    Ray ray = make_ray({0, 0, d}, {0, 0, -1});
    auto hits = intersect_shell(ray, shell);
    REQUIRE(hits.size() == 4);
    CHECK(hits[0].t == Catch::Approx(d - 6.8).margin(1e-9));
    CHECK(hits[1].t == Catch::Approx(d - 6.67).margin(1e-9));
    CHECK(hits[2].t == Catch::Approx(d + 6.67).margin(1e-9));
    CHECK(hits[3].t == Catch::Approx(d + 6.8).margin(1e-9));
    CHECK(hits[0].interface_kind == Interface::Outer);
    CHECK(hits[1].interface_kind == Interface::Inner);
    CHECK(hits[2].interface_kind == Interface::Inner);
    CHECK(hits[3].interface_kind == Interface::Outer);
    CHECK(hits[0].entering);
    CHECK(hits[1].entering);
    CHECK_FALSE(hits[2].entering);
    CHECK_FALSE(hits[3].entering);
}

TEST_CASE("shell: impact parameter between the radii clips the outer sphere only") {
    ShellPrimitive shell{{0, 0, 0}, 6.8, 0.13};
    Ray ray = make_ray({6.75, 0, -20}, {0, 0, 1});
    auto hits = intersect_shell(ray, shell);
    REQUIRE(hits.size() == 2);
    CHECK(hits[0].interface_kind == Interface::Outer);
    CHECK(hits[1].interface_kind == Interface::Outer);
}

TEST_CASE("shell: hit parameters agree with the marching oracle") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uth(0.05, 0.5);
    int tested = 0;
    while (tested < 200) {
        ShellPrimitive shell{{0, 0, 0}, 6.8, uth(rng)};
        Point3 origin = Point3{0, 0, 0} - random_dir(rng) * 30.0;
        Point3 aim = random_dir(rng) * 5.0;
        Ray ray = make_ray(origin, aim - origin);
        // near-tangent rays are excluded: the oracle's fixed marching floor
        // cannot resolve grazing crossings
        double b = impact_parameter(ray, shell.center);
        if (std::abs(b - shell.outer_radius) < 1e-3 ||
            std::abs(b - shell.inner_radius()) < 1e-3)
            continue;
        ++tested;
        auto analytic = intersect_shell(ray, shell);
        auto marched = oracle::march_shell_hits(ray, shell);
        REQUIRE(analytic.size() == marched.size());
        for (size_t i = 0; i < marched.size(); ++i)
            CHECK(analytic[i].t == Catch::Approx(marched[i]).margin(1e-9));
    }
}

TEST_CASE("shell: solid reduction matches intersect_sphere on 10k random rays") {
    std::mt19937_64 rng(12);
    ShellPrimitive solid{{0, 0, 0}, 6.8, 6.8};
    for (int i = 0; i < 10000; ++i) {
        Point3 origin = Point3{0, 0, 0} - random_dir(rng) * 30.0;
        Point3 aim = random_dir(rng) * 8.0;
        Ray ray = make_ray(origin, aim - origin);
        auto hits = intersect_shell(ray, solid);
        auto sphere = intersect_sphere(ray, solid.center, solid.outer_radius);
        if (hits.empty()) {
            CHECK_FALSE(sphere.has_value());
            continue;
        }
        REQUIRE(sphere.has_value());
        CHECK(hits.front().t == Catch::Approx(sphere->t).margin(1e-9));
        for (const auto& h : hits) CHECK(h.interface_kind == Interface::Outer);
    }
}

TEST_CASE("shell: t strictly increasing, entering/exiting alternate per sphere") {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 2000; ++i) {
        ShellPrimitive shell{{0, 0, 0}, 6.8, 0.5};
        Point3 origin = Point3{0, 0, 0} - random_dir(rng) * 25.0;
        Point3 aim = random_dir(rng) * 7.0;
        Ray ray = make_ray(origin, aim - origin);
        auto hits = intersect_shell(ray, shell);
        for (size_t k = 1; k < hits.size(); ++k) CHECK(hits[k].t > hits[k - 1].t);
        for (Interface which : {Interface::Outer, Interface::Inner}) {
            bool expect_entering = true;
            for (const auto& h : hits) {
                if (h.interface_kind != which) continue;
                CHECK(h.entering == expect_entering);
                expect_entering = !expect_entering;
            }
        }
    }
}

TEST_CASE("shell: watertight, crossings per sphere are always even from outside") {
    std::mt19937_64 rng(14);
    ShellPrimitive shell{{0, 0, 0}, 6.8, 0.13};
    for (int i = 0; i < 1000000; ++i) {
        Point3 origin = Point3{0, 0, 0} - random_dir(rng) * 40.0;
        Ray ray{origin, random_dir(rng)};
        auto hits = intersect_shell(ray, shell);
        int outer = 0, inner = 0;
        for (const auto& h : hits) (h.interface_kind == Interface::Outer ? outer : inner)++;
        REQUIRE(outer % 2 == 0);
        REQUIRE(inner % 2 == 0);
    }
}

TEST_CASE("shell: degenerate thickness rejected") {
    Ray ray = make_ray({0, 0, -20}, {0, 0, 1});
    CHECK_THROWS_AS(intersect_shell(ray, ShellPrimitive{{0, 0, 0}, 6.8, 0.0}),
                    InvalidPrimitiveError);
    CHECK_THROWS_AS(intersect_shell(ray, ShellPrimitive{{0, 0, 0}, 6.8, -1.0}),
                    InvalidPrimitiveError);
    CHECK_THROWS_AS(intersect_shell(ray, ShellPrimitive{{0, 0, 0}, 6.8, 7.0}),
                    InvalidPrimitiveError);
    CHECK_THROWS_AS(intersect_shell(ray, ShellPrimitive{{0, 0, 0}, -1.0, 0.1}),
                    InvalidPrimitiveError);
}

TEST_CASE("triangle: centroid hit has equal barycentrics") {
    Point3 p0{0, 0, 0}, p1{3, 0, 0}, p2{0, 3, 0};
    Point3 centroid = (p0 + p1 + p2) / 3.0;
    Ray ray = make_ray({centroid.x, centroid.y, -5}, {0, 0, 1});
    auto hit = intersect_triangle(ray, p0, p1, p2);
    REQUIRE(hit.has_value());
    CHECK(hit->u == Catch::Approx(1.0 / 3.0).margin(1e-12));
    CHECK(hit->v == Catch::Approx(1.0 / 3.0).margin(1e-12));
    CHECK(hit->t == Catch::Approx(5.0).margin(1e-12));
}

TEST_CASE("triangle: coplanar parallel ray misses") {
    Ray ray = make_ray({-5, 0.5, 0}, {1, 0, 0});
    CHECK_FALSE(intersect_triangle(ray, {0, 0, 0}, {3, 0, 0}, {0, 3, 0}).has_value());
}

TEST_CASE("mesh: BVH equals exhaustive scan on a relief heightfield") {
    // ~9.8k triangles with real height variation
    MeshPrimitive mesh = build_heightfield(20.0, 70, -25.0, {0.0, 0.0}, [](double x, double y) {
        return 0.4 * std::sin(0.7 * x) * std::cos(0.5 * y);
    });
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> u(-22.0, 22.0);
    for (int i = 0; i < 1000; ++i) {
        Point3 origin{u(rng), u(rng), 30.0};
        Point3 aim{u(rng), u(rng), -25.0};
        Ray ray = make_ray(origin, aim - origin);
        auto fast = mesh.intersect(ray);
        auto slow = mesh.intersect_exhaustive(ray);
        REQUIRE(fast.has_value() == slow.has_value());
        if (fast) {
            CHECK(fast->primitive_id == slow->primitive_id);
            CHECK(fast->t == Catch::Approx(slow->t).margin(1e-9));
        }
    }
}

TEST_CASE("mesh: validation rejects bad topology") {
    MeshPrimitive mesh;
    mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    mesh.triangles = {{0, 1, 3}};
    CHECK_THROWS(mesh.validate());
    mesh.triangles = {{0, 1, 1}};
    CHECK_THROWS(mesh.validate());  // zero area
    mesh.triangles = {{0, 1, 2}};
    CHECK_NOTHROW(mesh.validate());
}

TEST_CASE("obj: subset parses with fan triangulation and uvs") {
    std::istringstream src(
        "# quad\n"
        "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\n"
        "vt 0 0\nvt 1 0\nvt 1 1\nvt 0 1\n"
        "f 1/1 2/2 3/3 4/4\n");
    MeshPrimitive mesh = parse_obj(src);
    REQUIRE(mesh.vertices.size() == 4);
    REQUIRE(mesh.triangles.size() == 2);
    CHECK(mesh.triangles[0] == std::array<int, 3>{0, 1, 2});
    CHECK(mesh.triangles[1] == std::array<int, 3>{0, 2, 3});
    REQUIRE(mesh.uvs.size() == 4);
    CHECK(mesh.uvs[2] == Vec2{1.0, 1.0});

    Ray ray = make_ray({0.25, 0.25, 5}, {0, 0, -1});
    auto hit = mesh.intersect(ray);
    REQUIRE(hit.has_value());
    CHECK(hit->u == Catch::Approx(0.25).margin(1e-12));
    CHECK(hit->v == Catch::Approx(0.25).margin(1e-12));
}

TEST_CASE("obj: negative indices and errors") {
    std::istringstream neg("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n");
    MeshPrimitive mesh = parse_obj(neg);
    CHECK(mesh.triangles.size() == 1);

    std::istringstream bad_index("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 7\n");
    CHECK_THROWS_AS(parse_obj(bad_index), ObjError);
    std::istringstream short_face("v 0 0 0\nv 1 0 0\nf 1 2\n");
    CHECK_THROWS_AS(parse_obj(short_face), ObjError);
    CHECK_THROWS_AS(load_obj("/nonexistent/mesh.obj"), ObjError);
}
