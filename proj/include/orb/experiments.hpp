#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "orb/analysis.hpp"
#include "orb/render.hpp"
#include "orb/scene_format.hpp"

namespace orb {

struct InvalidExperimentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Image-space helpers tying the camera model to the analysis tools.
// ---------------------------------------------------------------------------

inline Point2 project_point(const SceneConfig& cfg, const Point3& p) {
    return make_camera(cfg.camera).project(p);
}

inline Point2 silhouette_center_px(const SceneConfig& cfg) {
    return project_point(cfg, cfg.orb.effective_center());
}

inline double silhouette_radius_px(const SceneConfig& cfg) {
    Camera cam = make_camera(cfg.camera);
    if (cam.orthographic) return cfg.orb.radius / cam.ortho_half_width * (0.5 * cfg.camera.width);
    double d = length(cfg.orb.effective_center() - cfg.camera.position);
    double tan_alpha = std::tan(std::asin(cfg.orb.radius / d));
    return tan_alpha / cam.tan_half_fov * (0.5 * cfg.camera.height);
}

// Pixels per centimeter on the relief plane (through-the-camera scale).
inline double plane_px_per_cm(const SceneConfig& cfg) {
    Camera cam = make_camera(cfg.camera);
    if (cam.orthographic) return 0.5 * cfg.camera.width / cam.ortho_half_width;
    double plane_z = cfg.orb.center.z - cfg.relief.distance;
    double dist = std::abs(cfg.camera.position.z - plane_z);
    return 0.5 * cfg.camera.height / (dist * cam.tan_half_fov);
}

// ---------------------------------------------------------------------------
// Canned measurements.
// ---------------------------------------------------------------------------

// Radial fold lines (non-exempt first, exempt last) as pixel-space line specs.
inline std::vector<LineSpecPx> fold_line_specs(const SceneConfig& cfg, double window_px = 15.0) {
    double plane_z = cfg.orb.center.z - cfg.relief.distance;
    Point2 conv = project_point(
        cfg, Point3{cfg.relief.convergence.x, cfg.relief.convergence.y, plane_z});
    std::vector<LineSpecPx> specs;
    auto add = [&](double az_deg, double offset_cm) {
        double phi = deg_to_rad(az_deg);
        Vec2 dir{std::cos(phi), -std::sin(phi)};  // image y runs downward
        // offset measured toward increasing azimuth, which in image
        // coordinates (y down) is the clockwise perpendicular
        Vec2 perp{dir.y, -dir.x};
        double off_px = offset_cm * plane_px_per_cm(cfg);
        LineSpecPx spec;
        spec.point = {conv.x + perp.x * off_px, conv.y + perp.y * off_px};
        spec.dir = dir;
        spec.bright = false;
        spec.window_px = window_px;
        spec.two_sided = false;
        specs.push_back(spec);
    };
    for (double az : cfg.relief.fold_azimuths_deg) add(az, 0.0);
    add(cfg.relief.exempt_azimuth_deg, cfg.relief.exempt_offset);
    return specs;
}

// Max displacement over the non-exempt folds of a rendered default scene.
inline ContinuityReport measure_folds(const Image& img, const SceneConfig& cfg) {
    return measure_line_continuity(img, silhouette_center_px(cfg), silhouette_radius_px(cfg),
                                   fold_line_specs(cfg));
}

inline double max_nonexempt_displacement(const ContinuityReport& report, size_t nonexempt) {
    double worst = 0.0;
    for (size_t i = 0; i < nonexempt && i < report.lines.size(); ++i)
        worst = std::max(worst, report.lines[i].displacement_px);
    return worst;
}

// Three-lines line specs: vertical dark lines at x = -s, 0, +s around the
// projected convergence point. Order: left, middle, right.
inline std::vector<LineSpecPx> three_line_specs(const SceneConfig& cfg, double window_px = 20.0) {
    double plane_z = cfg.orb.center.z - cfg.relief.distance;
    Point2 conv = project_point(
        cfg, Point3{cfg.relief.convergence.x, cfg.relief.convergence.y, plane_z});
    double s_px = cfg.lines.spacing * plane_px_per_cm(cfg);
    std::vector<LineSpecPx> specs;
    for (double off : {-s_px, 0.0, s_px}) {
        LineSpecPx spec;
        spec.point = {conv.x + off, conv.y};
        spec.dir = {0.0, 1.0};
        spec.bright = false;
        spec.window_px = window_px;
        spec.two_sided = true;
        specs.push_back(spec);
    }
    return specs;
}

// Fold edge samples from the image, from the straight region outside the
// silhouette only (the folds curve further out by design).
inline std::vector<std::vector<Point2>> sample_fold_edges(const Image& img,
                                                          const SceneConfig& cfg,
                                                          int stations = 24) {
    double radius = silhouette_radius_px(cfg);
    Point2 center = silhouette_center_px(cfg);
    double straight_px = cfg.relief.straight_radius * plane_px_per_cm(cfg);
    double r_lo = 1.02 * radius;
    double r_hi = 0.97 * straight_px;
    if (r_hi <= r_lo) throw AnalysisError("fold sampling: no straight region outside silhouette");
    std::vector<std::vector<Point2>> folds;
    for (const LineSpecPx& spec : fold_line_specs(cfg)) {
        Vec2 u = normalize(spec.dir);
        Vec2 perp{-u.y, u.x};
        std::vector<Point2> samples;
        for (int k = 0; k < stations; ++k) {
            double r = r_lo + (r_hi - r_lo) * k / (stations - 1);
            // station along the line at radius r from the silhouette center
            Vec2 w{spec.point.x - center.x, spec.point.y - center.y};
            double wu = dot(w, u);
            double disc = wu * wu - dot(w, w) + r * r;
            if (disc <= 0.0) continue;
            double t = -wu + std::sqrt(disc);
            Point2 pos{spec.point.x + u.x * t, spec.point.y + u.y * t};
            double c;
            bool at_edge;
            if (!detail_analysis::station_centroid(img, pos, perp, spec.window_px, spec.bright, c,
                                                   at_edge) ||
                at_edge)
                continue;
            samples.push_back({pos.x + perp.x * c, pos.y + perp.y * c});
        }
        if (samples.size() < 4)
            throw AnalysisError("fold sampling: fold track not detectable outside silhouette");
        folds.push_back(std::move(samples));
    }
    return folds;
}

// ---------------------------------------------------------------------------
// Dual-index rendering: the birefringent orb approximated by averaging two
// isotropic renders with identical seeds, in linear radiance.
// ---------------------------------------------------------------------------

inline Image birefringent_render_pair(const SceneConfig& cfg, const CalciteSpec& calcite,
                                      Image* ordinary_out = nullptr,
                                      Image* extraordinary_out = nullptr) {
    if (!cfg.orb.solid)
        throw InvalidExperimentError(
            "birefringent render requires a solid orb (the counter-theory is solid calcite)");
    Image a = render(build_scene(cfg, calcite.ior_ordinary));
    Image b = render(build_scene(cfg, calcite.ior_extraordinary));
    Image avg(a.width(), a.height());
    for (size_t i = 0; i < avg.pixels().size(); ++i)
        avg.pixels()[i] = (a.pixels()[i] + b.pixels()[i]) * 0.5;
    if (ordinary_out) *ordinary_out = std::move(a);
    if (extraordinary_out) *extraordinary_out = std::move(b);
    return avg;
}

// ---------------------------------------------------------------------------
// Canned experiments.
// ---------------------------------------------------------------------------

enum class ExperimentId {
    SolidVsHollow,
    ThreeLines,
    ThreeLinesBent,
    FoldConvergence,
    ThicknessSweep,
    Shift1cm,
    CalciteBirefringence,
};

inline std::optional<ExperimentId> parse_experiment_id(const std::string& name) {
    if (name == "solid_vs_hollow") return ExperimentId::SolidVsHollow;
    if (name == "three_lines") return ExperimentId::ThreeLines;
    if (name == "three_lines_bent") return ExperimentId::ThreeLinesBent;
    if (name == "fold_convergence") return ExperimentId::FoldConvergence;
    if (name == "thickness_sweep") return ExperimentId::ThicknessSweep;
    if (name == "shift_1cm") return ExperimentId::Shift1cm;
    if (name == "calcite_birefringence") return ExperimentId::CalciteBirefringence;
    return std::nullopt;
}

inline const char* experiment_name(ExperimentId id) {
    switch (id) {
        case ExperimentId::SolidVsHollow: return "solid_vs_hollow";
        case ExperimentId::ThreeLines: return "three_lines";
        case ExperimentId::ThreeLinesBent: return "three_lines_bent";
        case ExperimentId::FoldConvergence: return "fold_convergence";
        case ExperimentId::ThicknessSweep: return "thickness_sweep";
        case ExperimentId::Shift1cm: return "shift_1cm";
        case ExperimentId::CalciteBirefringence: return "calcite_birefringence";
    }
    return "unknown";
}

struct ExperimentOptions {
    std::string out_dir = ".";
    bool fast = false;    // 256 px / 16 spp preview instead of 1024 px / 64 spp
    int threads = 0;
    uint64_t seed = 7;
};

struct ExperimentResult {
    bool passed = false;
    std::string report;  // line-oriented text, also written to out_dir
};

namespace detail_exp {

inline void apply_options(SceneConfig& cfg, const ExperimentOptions& opt) {
    cfg.render.threads = opt.threads;
    cfg.render.seed = opt.seed;
    if (opt.fast) {
        cfg.camera.width = cfg.camera.height = 256;
        cfg.render.samples_per_pixel = 16;
    } else {
        cfg.camera.width = cfg.camera.height = 1024;
        cfg.render.samples_per_pixel = 64;
    }
}

inline void save(const Image& img, const ExperimentOptions& opt, const std::string& name) {
    std::filesystem::create_directories(opt.out_dir);
    write_image_file(img, (std::filesystem::path(opt.out_dir) / name).string());
}

inline void write_text(const ExperimentOptions& opt, const std::string& name,
                       const std::string& text) {
    std::filesystem::create_directories(opt.out_dir);
    std::ofstream out(std::filesystem::path(opt.out_dir) / name);
    out << text;
}

// Displacement thresholds are pinned at the 1024 px reference framing and
// scale with resolution, floored so preview noise cannot dominate.
inline double px_scale(const SceneConfig& cfg) {
    return std::max(cfg.camera.width / 1024.0, 0.25);
}

inline const char* status_name(TrackStatus s) {
    switch (s) {
        case TrackStatus::Ok: return "ok";
        case TrackStatus::Saturated: return "saturated";
        case TrackStatus::Lost: return "lost";
    }
    return "?";
}

}  // namespace detail_exp

inline ExperimentResult run_solid_vs_hollow(const ExperimentOptions& opt) {
    SceneConfig base = default_scene();
    detail_exp::apply_options(base, opt);

    SceneConfig no_orb = base;
    no_orb.orb.enabled = false;
    SceneConfig hollow = base;  // defaults: hollow, 1.3 mm
    SceneConfig solid = base;
    solid.orb.solid = true;

    Image img_none = render_config(no_orb);
    Image img_hollow = render_config(hollow);
    Image img_solid = render_config(solid);
    detail_exp::save(img_none, opt, "no_orb.ppm");
    detail_exp::save(img_hollow, opt, "hollow.ppm");
    detail_exp::save(img_solid, opt, "solid.ppm");

    Point2 c = silhouette_center_px(base);
    double r = silhouette_radius_px(base);
    auto inv_h = detect_inversion(img_hollow, img_none, c, r);
    auto inv_s = detect_inversion(img_solid, img_none, c, r);
    auto mask = interior_mask(img_hollow, c, r);
    double rmse_h = image_rmse(img_hollow, img_none, &mask);
    double rmse_s = image_rmse(img_solid, img_none, &mask);

    bool pass = inv_s.score > 0.5 && inv_h.score < 0.0 && rmse_s >= 10.0 * rmse_h;
    std::ostringstream rep;
    rep << "experiment solid_vs_hollow\n"
        << "inversion_score_solid " << inv_s.score << "\n"
        << "inversion_score_hollow " << inv_h.score << "\n"
        << "rmse_solid " << rmse_s << "\n"
        << "rmse_hollow " << rmse_h << "\n"
        << "rmse_ratio " << (rmse_h > 0 ? rmse_s / rmse_h : 0.0) << "\n"
        << "pass " << (pass ? "true" : "false") << "\n";
    detail_exp::write_text(opt, "report.txt", rep.str());
    return {pass, rep.str()};
}

inline void append_continuity(std::ostringstream& rep, const char* label,
                              const ContinuityReport& report) {
    static const char* names[] = {"left", "middle", "right"};
    for (size_t i = 0; i < report.lines.size(); ++i) {
        const auto& l = report.lines[i];
        std::string name =
            (report.lines.size() == 3 && i < 3) ? names[i] : std::to_string(i);
        rep << label << "_" << name << " displacement_px " << l.displacement_px << " status "
            << detail_exp::status_name(l.status) << " curved "
            << (l.curvature_flag ? "true" : "false") << "\n";
    }
}

inline ExperimentResult run_three_lines(const ExperimentOptions& opt) {
    SceneConfig hollow = three_lines_scene();
    detail_exp::apply_options(hollow, opt);
    SceneConfig solid = hollow;
    solid.orb.solid = true;

    Image img_h = render_config(hollow);
    Image img_s = render_config(solid);
    detail_exp::save(img_h, opt, "lines_hollow.ppm");
    detail_exp::save(img_s, opt, "lines_solid.ppm");

    Point2 c = silhouette_center_px(hollow);
    double r = silhouette_radius_px(hollow);
    auto specs = three_line_specs(hollow);
    auto rep_h = measure_line_continuity(img_h, c, r, specs);
    auto rep_s = measure_line_continuity(img_s, c, r, specs);

    double scale = detail_exp::px_scale(hollow);
    auto outer_ok = [&](const ContinuityReport& rep) {
        return rep.lines[0].displacement_px >= 2.0 * scale && rep.lines[0].curvature_flag &&
               rep.lines[2].displacement_px >= 2.0 * scale && rep.lines[2].curvature_flag;
    };
    bool pass = rep_h.lines[1].status == TrackStatus::Ok &&
                rep_h.lines[1].displacement_px < 1.0 * scale &&
                rep_s.lines[1].status == TrackStatus::Ok &&
                rep_s.lines[1].displacement_px < 1.0 * scale && outer_ok(rep_h) && outer_ok(rep_s);

    std::ostringstream rep;
    rep << "experiment three_lines\n";
    append_continuity(rep, "hollow", rep_h);
    append_continuity(rep, "solid", rep_s);
    rep << "pass " << (pass ? "true" : "false") << "\n";
    detail_exp::write_text(opt, "report.txt", rep.str());
    return {pass, rep.str()};
}

inline ExperimentResult run_three_lines_bent(const ExperimentOptions& opt) {
    // The kinked middle line no longer passes straight through the center, so
    // the shell's near-limb magnification breaks it at the boundary.
    SceneConfig cfg = three_lines_scene(10.0);
    detail_exp::apply_options(cfg, opt);

    Image img = render_config(cfg);
    detail_exp::save(img, opt, "lines_bent.ppm");

    Point2 c = silhouette_center_px(cfg);
    double r = silhouette_radius_px(cfg);
    auto report = measure_line_continuity(img, c, r, three_line_specs(cfg));
    bool pass = report.lines[1].displacement_px >= 2.0 * detail_exp::px_scale(cfg);

    std::ostringstream rep;
    rep << "experiment three_lines_bent\n";
    append_continuity(rep, "bent", report);
    rep << "pass " << (pass ? "true" : "false") << "\n";
    detail_exp::write_text(opt, "report.txt", rep.str());
    return {pass, rep.str()};
}

inline ExperimentResult run_fold_convergence(const ExperimentOptions& opt) {
    SceneConfig cfg = default_scene();
    detail_exp::apply_options(cfg, opt);
    Image img = render_config(cfg);
    detail_exp::save(img, opt, "folds.ppm");

    auto samples = sample_fold_edges(img, cfg);
    auto fit = fit_fold_convergence(samples);
    Point2 center = silhouette_center_px(cfg);
    double err = length(Vec2{fit.point.x - center.x, fit.point.y - center.y});
    int exempt_index = static_cast<int>(samples.size()) - 1;
    bool exempt_flagged = std::find(fit.outliers.begin(), fit.outliers.end(), exempt_index) !=
                          fit.outliers.end();
    double scale = (opt.fast ? 256.0 : 1024.0) / 1024.0;
    bool pass = err < 1.0 * std::max(scale, 0.25) && exempt_flagged;

    std::ostringstream rep;
    rep << "experiment fold_convergence\n"
        << "fitted_point_px " << fit.point.x << " " << fit.point.y << "\n"
        << "projected_center_px " << center.x << " " << center.y << "\n"
        << "error_px " << err << "\n"
        << "rms_residual_px " << fit.rms_residual_px << "\n"
        << "exempt_flagged " << (exempt_flagged ? "true" : "false") << "\n"
        << "pass " << (pass ? "true" : "false") << "\n";
    detail_exp::write_text(opt, "report.txt", rep.str());
    return {pass, rep.str()};
}

inline ExperimentResult run_thickness_sweep(const ExperimentOptions& opt) {
    const std::vector<double> thickness_mm{0.5, 1.3, 2.0, 2.6, 3.0};
    std::vector<double> disp;
    std::ostringstream csv;
    csv << "thickness_mm,max_displacement_px,status\n";
    for (double mm : thickness_mm) {
        SceneConfig cfg = default_scene();
        cfg.orb.thickness = mm / 10.0;
        detail_exp::apply_options(cfg, opt);
        // sub-pixel displacements near the 1 px threshold want extra samples
        cfg.render.samples_per_pixel *= 2;
        Image img = render_config(cfg);
        auto report = measure_folds(img, cfg);
        double d = max_nonexempt_displacement(report, cfg.relief.fold_azimuths_deg.size());
        disp.push_back(d);
        TrackStatus worst = TrackStatus::Ok;
        for (size_t i = 0; i < cfg.relief.fold_azimuths_deg.size(); ++i)
            if (report.lines[i].status != TrackStatus::Ok) worst = report.lines[i].status;
        csv << mm << "," << d << "," << detail_exp::status_name(worst) << "\n";
    }
    detail_exp::write_text(opt, "thickness_sweep.csv", csv.str());

    double scale = std::max((opt.fast ? 256.0 : 1024.0) / 1024.0, 0.25);
    // the centroid noise floor sits near 0.2 px; below it ordering is chance
    bool monotone = true;
    for (size_t i = 1; i < disp.size(); ++i)
        if (disp[i] + 0.25 * scale < disp[i - 1]) monotone = false;
    bool pass = monotone && disp[1] < 1.0 * scale && disp[3] >= 1.0 * scale;

    std::ostringstream rep;
    rep << "experiment thickness_sweep\n" << csv.str()
        << "monotone " << (monotone ? "true" : "false") << "\n"
        << "pass " << (pass ? "true" : "false") << "\n";
    detail_exp::write_text(opt, "report.txt", rep.str());
    return {pass, rep.str()};
}

inline ExperimentResult run_shift_1cm(const ExperimentOptions& opt) {
    SceneConfig centered = default_scene();
    detail_exp::apply_options(centered, opt);
    SceneConfig shifted = centered;
    shifted.orb.lateral_shift = -1.0;  // 1 cm to the left

    Image img_c = render_config(centered);
    Image img_s = render_config(shifted);
    detail_exp::save(img_c, opt, "centered.ppm");
    detail_exp::save(img_s, opt, "shifted.ppm");

    auto rep_c = measure_folds(img_c, centered);
    auto rep_s = measure_folds(img_s, shifted);
    size_t n = centered.relief.fold_azimuths_deg.size();
    double d_c = max_nonexempt_displacement(rep_c, n);
    double d_s = max_nonexempt_displacement(rep_s, n);
    double scale = detail_exp::px_scale(centered);
    bool pass = d_c < 1.0 * scale && d_s >= 2.0 * scale;

    std::ostringstream rep;
    rep << "experiment shift_1cm\n"
        << "max_displacement_centered_px " << d_c << "\n"
        << "max_displacement_shifted_px " << d_s << "\n"
        << "pass " << (pass ? "true" : "false") << "\n";
    detail_exp::write_text(opt, "report.txt", rep.str());
    return {pass, rep.str()};
}

inline ExperimentResult run_calcite(const ExperimentOptions& opt) {
    CalciteSpec calcite;

    // inversion on the draped-relief stage
    SceneConfig folds = default_scene();
    folds.orb.solid = true;
    folds.orb.material = "calcite";
    detail_exp::apply_options(folds, opt);
    SceneConfig no_orb = folds;
    no_orb.orb.enabled = false;

    Image img_none = render_config(no_orb);
    Image img_avg = birefringent_render_pair(folds, calcite);
    detail_exp::save(img_avg, opt, "calcite_folds.ppm");
    auto inv = detect_inversion(img_avg, img_none, silhouette_center_px(folds),
                                silhouette_radius_px(folds));

    // double contours on the three-lines stage
    SceneConfig lines = three_lines_scene();
    lines.orb.solid = true;
    lines.orb.material = "calcite";
    detail_exp::apply_options(lines, opt);
    Image ordinary;
    Image lines_avg = birefringent_render_pair(lines, calcite, &ordinary);
    detail_exp::save(lines_avg, opt, "calcite_lines.ppm");

    Point2 c = silhouette_center_px(lines);
    double r = silhouette_radius_px(lines);
    int tracks_avg = count_interior_tracks(lines_avg, c, r);
    int tracks_single = count_interior_tracks(ordinary, c, r);
    bool doubled = tracks_avg >= tracks_single + 2;
    bool pass = inv.score > 0.5 && doubled;

    std::ostringstream rep;
    rep << "experiment calcite_birefringence\n"
        << "inversion_score " << inv.score << "\n"
        << "interior_tracks_single " << tracks_single << "\n"
        << "interior_tracks_averaged " << tracks_avg << "\n"
        << "double_contour " << (doubled ? "true" : "false") << "\n"
        << "pass " << (pass ? "true" : "false") << "\n";
    detail_exp::write_text(opt, "report.txt", rep.str());
    return {pass, rep.str()};
}

inline ExperimentResult run_experiment(ExperimentId id, const ExperimentOptions& opt) {
    switch (id) {
        case ExperimentId::SolidVsHollow: return run_solid_vs_hollow(opt);
        case ExperimentId::ThreeLines: return run_three_lines(opt);
        case ExperimentId::ThreeLinesBent: return run_three_lines_bent(opt);
        case ExperimentId::FoldConvergence: return run_fold_convergence(opt);
        case ExperimentId::ThicknessSweep: return run_thickness_sweep(opt);
        case ExperimentId::Shift1cm: return run_shift_1cm(opt);
        case ExperimentId::CalciteBirefringence: return run_calcite(opt);
    }
    throw InvalidExperimentError("unknown experiment id");
}

}  // namespace orb
