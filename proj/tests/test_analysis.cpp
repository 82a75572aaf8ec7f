#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "orb/analysis.hpp"

using namespace orb;

namespace {

// Light plane with one dark vertical line whose center jumps from x_out
// (outside the circle) to x_in (inside), drawn with a smooth profile. The
// switch happens where the line crosses the circle (a function of y only)
// so every perpendicular slice shows a single clean line center.
Image line_jump_image(int size, Point2 center, double radius, double x_out, double x_in) {
    Image img(size, size);
    const double sigma = 1.2, depth = 0.8;
    double chord_dx = x_out - center.x;
    double y_half = std::sqrt(std::max(0.0, radius * radius - chord_dx * chord_dx));
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            double px = x + 0.5, py = y + 0.5;
            bool inside = std::abs(py - center.y) < y_half;
            double c = inside ? x_in : x_out;
            double d = px - c;
            double lum = 1.0 - depth * std::exp(-d * d / (2.0 * sigma * sigma));
            img.at(x, y) = RGB{lum, lum, lum};
        }
    return img;
}

double smooth_pattern(double x, double y) {
    return 0.5 + 0.25 * std::sin(0.11 * x) * std::cos(0.07 * y) +
           0.12 * std::sin(0.05 * (x + y));
}

LineSpecPx vertical_line(double x, double window = 10.0) {
    LineSpecPx spec;
    spec.point = {x, 0.0};
    spec.dir = {0.0, 1.0};
    spec.window_px = window;
    return spec;
}

}  // namespace

TEST_CASE("continuity: synthetic 3 px jump is measured as 3 px") {
    Point2 center{128.0, 128.0};
    double radius = 40.0;
    Image img = line_jump_image(256, center, radius, 100.0, 103.0);
    auto report = measure_line_continuity(img, center, radius, {vertical_line(100.0)});
    REQUIRE(report.lines.size() == 1);
    CHECK(report.lines[0].status == TrackStatus::Ok);
    CHECK(report.lines[0].displacement_px == Catch::Approx(3.0).margin(0.2));
    CHECK_FALSE(report.lines[0].connected);
}

TEST_CASE("continuity: no jump reads as connected, below 0.1 px") {
    Point2 center{128.0, 128.0};
    Image img = line_jump_image(256, center, 40.0, 100.0, 100.0);
    auto report = measure_line_continuity(img, center, 40.0, {vertical_line(100.0)});
    CHECK(report.lines[0].status == TrackStatus::Ok);
    CHECK(report.lines[0].displacement_px < 0.1);
    CHECK(report.lines[0].connected);
}

TEST_CASE("continuity: invariant under brightness scaling and gamma changes") {
    Point2 center{128.0, 128.0};
    Image img = line_jump_image(256, center, 40.0, 100.0, 103.0);
    Image scaled(256, 256), gammaed(256, 256);
    for (int y = 0; y < 256; ++y)
        for (int x = 0; x < 256; ++x) {
            scaled.at(x, y) = img.at(x, y) * 0.4;
            double l = luminance(img.at(x, y));
            double g = std::pow(l, 1.5);
            gammaed.at(x, y) = RGB{g, g, g};
        }
    auto base = measure_line_continuity(img, center, 40.0, {vertical_line(100.0)});
    auto s = measure_line_continuity(scaled, center, 40.0, {vertical_line(100.0)});
    auto g = measure_line_continuity(gammaed, center, 40.0, {vertical_line(100.0)});
    CHECK(s.lines[0].displacement_px ==
          Catch::Approx(base.lines[0].displacement_px).margin(1e-9));
    CHECK(g.lines[0].displacement_px ==
          Catch::Approx(base.lines[0].displacement_px).margin(0.1));
}

TEST_CASE("continuity: undetectable track reports a failure status, never zero") {
    Image flat(256, 256, RGB{0.6});
    Point2 center{128.0, 128.0};
    auto report = measure_line_continuity(flat, center, 40.0, {vertical_line(100.0)});
    CHECK(report.lines[0].status == TrackStatus::Lost);
    CHECK(report.lines[0].displacement_px == report.lines[0].displacement_px);
    CHECK(report.lines[0].displacement_px >= report.threshold_px);
    CHECK_FALSE(report.lines[0].connected);
}

TEST_CASE("convergence: noisy rays recover the source point within 1.5 px") {
    std::mt19937_64 rng(51);
    std::normal_distribution<double> noise(0.0, 0.5);
    Point2 p{300.0, 200.0};
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::vector<Point2>> folds;
        for (double deg : {20.0, 65.0, 110.0, 155.0}) {
            double a = deg_to_rad(deg);
            Vec2 dir{std::cos(a), std::sin(a)};
            std::vector<Point2> samples;
            for (int k = 0; k < 25; ++k) {
                double r = 50.0 + 4.0 * k;
                samples.push_back(
                    {p.x + dir.x * r + noise(rng), p.y + dir.y * r + noise(rng)});
            }
            folds.push_back(samples);
        }
        ConvergenceFit fit = fit_fold_convergence(folds);
        double err = length(Vec2{fit.point.x - p.x, fit.point.y - p.y});
        REQUIRE(err < 1.5);
    }
}

TEST_CASE("convergence: two exact lines intersect exactly") {
    Point2 p{47.0, -12.5};
    std::vector<std::vector<Point2>> folds;
    for (double deg : {30.0, 120.0}) {
        double a = deg_to_rad(deg);
        std::vector<Point2> samples;
        for (int k = 1; k <= 12; ++k)
            samples.push_back({p.x + std::cos(a) * 3.0 * k, p.y + std::sin(a) * 3.0 * k});
        folds.push_back(samples);
    }
    ConvergenceFit fit = fit_fold_convergence(folds);
    CHECK(fit.point.x == Catch::Approx(p.x).margin(1e-9));
    CHECK(fit.point.y == Catch::Approx(p.y).margin(1e-9));
    CHECK(fit.rms_residual_px < 1e-9);
    CHECK(fit.outliers.empty());
}

TEST_CASE("convergence: equivariant under translation") {
    std::mt19937_64 rng(52);
    std::normal_distribution<double> noise(0.0, 0.5);
    Point2 p{100.0, 100.0};
    std::vector<std::vector<Point2>> folds, shifted;
    Vec2 t{7.3, -4.1};
    for (double deg : {10.0, 70.0, 130.0}) {
        double a = deg_to_rad(deg);
        std::vector<Point2> samples;
        for (int k = 0; k < 20; ++k) {
            double r = 40.0 + 5.0 * k;
            samples.push_back({p.x + std::cos(a) * r + noise(rng),
                               p.y + std::sin(a) * r + noise(rng)});
        }
        folds.push_back(samples);
        std::vector<Point2> moved;
        for (const auto& s : samples) moved.push_back(s + t);
        shifted.push_back(moved);
    }
    ConvergenceFit a = fit_fold_convergence(folds);
    ConvergenceFit b = fit_fold_convergence(shifted);
    CHECK(b.point.x - a.point.x == Catch::Approx(t.x).margin(1e-9));
    CHECK(b.point.y - a.point.y == Catch::Approx(t.y).margin(1e-9));
}

TEST_CASE("convergence: a strongly offset line is flagged as an outlier") {
    Point2 p{200.0, 200.0};
    std::vector<std::vector<Point2>> folds;
    for (double deg : {15.0, 60.0, 105.0, 150.0}) {
        double a = deg_to_rad(deg);
        std::vector<Point2> samples;
        for (int k = 0; k < 20; ++k) {
            double r = 40.0 + 5.0 * k;
            samples.push_back({p.x + std::cos(a) * r, p.y + std::sin(a) * r});
        }
        folds.push_back(samples);
    }
    // the last line misses p laterally by 12 px
    double a = deg_to_rad(80.0);
    Vec2 perp{-std::sin(a), std::cos(a)};
    std::vector<Point2> off;
    for (int k = 0; k < 20; ++k) {
        double r = 40.0 + 5.0 * k;
        off.push_back({p.x + std::cos(a) * r + perp.x * 12.0,
                       p.y + std::sin(a) * r + perp.y * 12.0});
    }
    folds.push_back(off);
    ConvergenceFit fit = fit_fold_convergence(folds);
    REQUIRE(fit.outliers == std::vector<int>{4});
    CHECK(length(Vec2{fit.point.x - p.x, fit.point.y - p.y}) < 1e-6);
}

TEST_CASE("convergence: degenerate inputs raise errors") {
    std::vector<Point2> a, b;
    for (int k = 0; k < 10; ++k) {
        a.push_back({static_cast<double>(k), 0.0});
        b.push_back({static_cast<double>(k), 5.0});
    }
    CHECK_THROWS_AS(fit_fold_convergence({a, b}), AnalysisError);  // parallel
    CHECK_THROWS_AS(fit_fold_convergence({a}), AnalysisError);     // single line
    CHECK_THROWS_AS(fit_line_tls({{0.0, 0.0}}), AnalysisError);
}

TEST_CASE("inversion: upright content scores negative, reflected scores positive") {
    int size = 256;
    Point2 center{128.0, 128.0};
    double radius = 80.0;
    Image background(size, size), upright(size, size), reflected(size, size);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            double px = x + 0.5, py = y + 0.5;
            double l = smooth_pattern(px, py);
            background.at(x, y) = RGB{l, l, l};
            double dx = px - center.x, dy = py - center.y;
            bool inside = dx * dx + dy * dy < radius * radius;
            double lu = l;
            double lr = inside ? smooth_pattern(2.0 * center.x - px, 2.0 * center.y - py) : l;
            upright.at(x, y) = RGB{lu, lu, lu};
            reflected.at(x, y) = RGB{lr, lr, lr};
        }
    InversionResult up = detect_inversion(upright, background, center, radius);
    InversionResult inv = detect_inversion(reflected, background, center, radius);
    CHECK(up.score < 0.0);
    CHECK(inv.score > 0.5);
    CHECK_FALSE(up.indeterminate);
    // antisymmetry: point-reflecting the in-silhouette content flips the score
    CHECK(up.score + inv.score == Catch::Approx(0.0).margin(0.05));
}

TEST_CASE("inversion: textureless silhouette is indeterminate") {
    Image flat(128, 128, RGB{0.5});
    InversionResult res = detect_inversion(flat, flat, {64.0, 64.0}, 40.0);
    CHECK(res.indeterminate);
}

TEST_CASE("rmse: trivial values, masks and errors") {
    Image black(16, 16, RGB{0.0});
    Image white(16, 16, RGB{1.0});
    CHECK(image_rmse(black, black) == 0.0);
    CHECK(image_rmse(black, white) == Catch::Approx(1.0).margin(1e-12));

    std::vector<uint8_t> empty_mask(16 * 16, 0);
    CHECK_THROWS_AS(image_rmse(black, white, &empty_mask), AnalysisError);
    Image other(8, 8);
    CHECK_THROWS_AS(image_rmse(black, other), AnalysisError);

    // mask restricts the average: difference only outside the mask is invisible
    Image mixed = white;
    mixed.at(0, 0) = RGB{0.0, 0.0, 0.0};
    std::vector<uint8_t> mask(16 * 16, 1);
    mask[0] = 0;
    CHECK(image_rmse(mixed, white, &mask) == 0.0);
}

TEST_CASE("interior mask: cuts the boundary band, the rim and bright pixels") {
    int size = 128;
    Point2 center{64.0, 64.0};
    double radius = 50.0;
    Image img(size, size, RGB{0.3});
    img.at(64, 64) = RGB{2.0, 2.0, 2.0};  // specular-bright pixel
    auto mask = interior_mask(img, center, radius);
    CHECK(mask[64 * size + 64] == 0);  // bright pixel excluded
    // a pixel just inside 0.72R is in, one just outside is not
    int in_x = 64 + static_cast<int>(0.70 * radius);
    int out_x = 64 + static_cast<int>(0.74 * radius);
    CHECK(mask[64 * size + in_x] == 1);
    CHECK(mask[64 * size + out_x] == 0);
}

TEST_CASE("interior tracks: doubled contours doubles the count") {
    int size = 256;
    Point2 center{128.0, 128.0};
    double radius = 80.0;
    auto draw = [&](const std::vector<double>& xs) {
        Image img(size, size);
        const double sigma = 1.5, depth = 0.7;
        for (int y = 0; y < size; ++y)
            for (int x = 0; x < size; ++x) {
                double lum = 1.0;
                for (double c : xs) {
                    double d = x + 0.5 - c;
                    lum -= depth * std::exp(-d * d / (2.0 * sigma * sigma));
                }
                lum = std::max(lum, 0.0);
                img.at(x, y) = RGB{lum, lum, lum};
            }
        return img;
    };
    Image single = draw({98.0, 128.0, 158.0});
    Image doubled = draw({94.0, 102.0, 124.0, 132.0, 154.0, 162.0});
    CHECK(count_interior_tracks(single, center, radius) == 3);
    CHECK(count_interior_tracks(doubled, center, radius) == 6);
}
