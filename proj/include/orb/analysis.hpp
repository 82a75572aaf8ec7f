#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "orb/image.hpp"

namespace orb {

struct AnalysisError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Image differencing.
// ---------------------------------------------------------------------------

// RMSE over linear luminance; with a mask, only pixels with mask != 0 count.
inline double image_rmse(const Image& a, const Image& b,
                         const std::vector<uint8_t>* mask = nullptr) {
    if (a.width() != b.width() || a.height() != b.height())
        throw AnalysisError("image_rmse: dimension mismatch");
    if (mask && mask->size() != a.pixels().size())
        throw AnalysisError("image_rmse: mask size mismatch");
    double sum = 0.0;
    size_t n = 0;
    for (size_t i = 0; i < a.pixels().size(); ++i) {
        if (mask && !(*mask)[i]) continue;
        double d = luminance(a.pixels()[i]) - luminance(b.pixels()[i]);
        sum += d * d;
        ++n;
    }
    if (n == 0) throw AnalysisError("image_rmse: empty mask");
    return std::sqrt(sum / static_cast<double>(n));
}

// Pixels strictly inside the silhouette, excluding a boundary band, the
// specular-highlight rim, and any overly bright pixels in the orb image.
// Beyond 0.72 of the silhouette radius the chief ray's first-surface Fresnel
// reflectance (glass, unpolarized) passes ~5% and keeps climbing toward the
// grazing limit, so those pixels increasingly mirror the environment instead
// of showing the background through the orb.
inline constexpr double kHighlightRadiusFrac = 0.72;

inline std::vector<uint8_t> interior_mask(const Image& with_orb, Point2 center_px,
                                          double radius_px, double band_px = 3.0,
                                          double highlight_cap = 1.0) {
    std::vector<uint8_t> mask(with_orb.pixels().size(), 0);
    double r_lim = std::min(radius_px - band_px, kHighlightRadiusFrac * radius_px);
    for (int y = 0; y < with_orb.height(); ++y)
        for (int x = 0; x < with_orb.width(); ++x) {
            double dx = x + 0.5 - center_px.x;
            double dy = y + 0.5 - center_px.y;
            if (dx * dx + dy * dy >= r_lim * r_lim) continue;
            if (luminance(with_orb.at(x, y)) > highlight_cap) continue;
            mask[static_cast<size_t>(y) * with_orb.width() + x] = 1;
        }
    return mask;
}

// ---------------------------------------------------------------------------
// Line continuity across the silhouette.
//
// A line's track is located by subpixel centroiding in two annular bands
// (outside r/R in [1.02, 1.15], inside [0.85, 0.93]); both tracks are fitted
// linearly in r and extrapolated to the silhouette, and the displacement is
// the gap between the extrapolations. Centroid weights are min/max
// normalized per station, so the measurement is invariant under global
// brightness scaling and (to first order) gamma changes.
// ---------------------------------------------------------------------------

struct LineSpecPx {
    Point2 point;          // any point on the line, pixel coords
    Vec2 dir;              // line direction, pixel coords (normalized internally)
    bool bright = false;   // feature brighter than surround (default: dark line)
    double window_px = 20.0;  // half-width of the perpendicular search window
    bool two_sided = true;    // measure both silhouette crossings, keep the worse
};

enum class TrackStatus {
    Ok,         // both tracks fitted
    Saturated,  // inside track ran off the search window; displacement is a lower bound
    Lost,       // track not detectable; displacement is a lower bound
};

struct LineContinuity {
    TrackStatus status = TrackStatus::Lost;
    double displacement_px = 0.0;
    double outside_at_r = 0.0, inside_at_r = 0.0;  // fitted offsets at the silhouette
    bool curvature_flag = false;
    bool connected = false;
    int outside_stations = 0, inside_stations = 0;
};

struct ContinuityReport {
    Point2 center_px;
    double radius_px = 0.0;
    double threshold_px = 1.0;
    std::vector<LineContinuity> lines;
};

namespace detail_analysis {

constexpr double kOutsideLo = 1.02, kOutsideHi = 1.15;
// The inside band stops at 0.93: beyond that the first-surface Fresnel
// reflectance climbs steeply and the transmitted feature contrast washes out.
constexpr double kInsideLo = 0.85, kInsideHi = 0.93;
constexpr int kStations = 13;
constexpr double kScanStep = 0.25;
constexpr double kCurveTolPx = 0.25;

struct BandTrack {
    std::vector<Point2> samples;  // (r, perpendicular offset)
    int edge_hits = 0;
};

// Centroid of the feature in the perpendicular scan at one station.
// Returns false if the window shows no usable contrast.
inline bool station_centroid(const Image& img, Point2 pos, Vec2 perp, double window, bool bright,
                             double& centroid, bool& at_edge) {
    int n = static_cast<int>(2.0 * window / kScanStep) + 1;
    std::vector<double> lum(n);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int i = 0; i < n; ++i) {
        double s = -window + i * kScanStep;
        double l = img.sample_luminance(pos.x + perp.x * s, pos.y + perp.y * s);
        lum[i] = l;
        lo = std::min(lo, l);
        hi = std::max(hi, l);
    }
    double range = hi - lo;
    if (range < 0.05 * (hi + 1e-9)) return false;  // no feature in the window
    double wsum = 0.0, ssum = 0.0;
    for (int i = 0; i < n; ++i) {
        double norm = (lum[i] - lo) / range;
        if (!bright) norm = 1.0 - norm;
        double w = std::max(0.0, norm - 0.5);
        wsum += w;
        ssum += w * (-window + i * kScanStep);
    }
    if (wsum <= 0.0) return false;
    centroid = ssum / wsum;
    at_edge = std::abs(centroid) > 0.8 * window;
    return true;
}

inline BandTrack track_band(const Image& img, Point2 center, double radius, Point2 q, Vec2 u,
                            int branch, double lo_frac, double hi_frac, double window,
                            bool bright) {
    BandTrack track;
    Vec2 perp{-u.y, u.x};
    Vec2 w{q.x - center.x, q.y - center.y};
    double wu = dot(w, u);
    double w2 = dot(w, w);
    for (int k = 0; k < kStations; ++k) {
        double r = radius * (lo_frac + (hi_frac - lo_frac) * k / (kStations - 1));
        double disc = wu * wu - w2 + r * r;
        if (disc <= 0.0) continue;  // line does not reach this radius
        double t = -wu + branch * std::sqrt(disc);
        Point2 pos{q.x + u.x * t, q.y + u.y * t};
        double c;
        bool at_edge;
        if (!station_centroid(img, pos, perp, window, bright, c, at_edge)) continue;
        if (at_edge) {
            ++track.edge_hits;
            continue;
        }
        track.samples.push_back({r, c});
    }
    return track;
}

struct PolyFit {
    double value_at = 0.0;   // linear fit evaluated at the target radius
    double quad_term = 0.0;  // |quadratic coefficient| * (half band span)^2
    double max_residual = 0.0;
};

inline PolyFit fit_track(const std::vector<Point2>& samples, double at_r) {
    PolyFit out;
    double n = static_cast<double>(samples.size());
    double sr = 0, sc = 0, srr = 0, src = 0;
    for (const auto& s : samples) {
        sr += s.x;
        sc += s.y;
        srr += s.x * s.x;
        src += s.x * s.y;
    }
    double det = n * srr - sr * sr;
    double b = (n * src - sr * sc) / det;
    double a = (sc - b * sr) / n;
    out.value_at = a + b * at_r;
    for (const auto& s : samples)
        out.max_residual = std::max(out.max_residual, std::abs(a + b * s.x - s.y));
    // quadratic refinement on centered radii for the curvature measure
    double r0 = sr / n;
    double s2 = 0, s3 = 0, s4 = 0, s1c = 0, s2c = 0, s0c = 0;
    for (const auto& s : samples) {
        double x = s.x - r0;
        s2 += x * x;
        s3 += x * x * x;
        s4 += x * x * x * x;
        s0c += s.y;
        s1c += x * s.y;
        s2c += x * x * s.y;
    }
    // normal equations for y = p0 + p1 x + p2 x^2 (Sx = 0 by centering)
    double m[3][3] = {{n, 0, s2}, {0, s2, s3}, {s2, s3, s4}};
    double rhs[3] = {s0c, s1c, s2c};
    // 3x3 Gaussian elimination
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int row = col + 1; row < 3; ++row)
            if (std::abs(m[row][col]) > std::abs(m[piv][col])) piv = row;
        std::swap(m[col], m[piv]);
        std::swap(rhs[col], rhs[piv]);
        if (std::abs(m[col][col]) < 1e-12) return out;  // degenerate; keep linear fit
        for (int row = col + 1; row < 3; ++row) {
            double f = m[row][col] / m[col][col];
            for (int c2 = col; c2 < 3; ++c2) m[row][c2] -= f * m[col][c2];
            rhs[row] -= f * rhs[col];
        }
    }
    double p2 = rhs[2] / m[2][2];
    double half_span = 0.5 * (samples.back().x - samples.front().x);
    out.quad_term = std::abs(p2) * half_span * half_span;
    return out;
}

inline LineContinuity measure_branch(const Image& img, Point2 center, double radius,
                                     const LineSpecPx& line, int branch, double threshold) {
    Vec2 u = normalize(line.dir);
    LineContinuity res;
    BandTrack outside = track_band(img, center, radius, line.point, u, branch, kOutsideLo,
                                   kOutsideHi, line.window_px, line.bright);
    BandTrack inside = track_band(img, center, radius, line.point, u, branch, kInsideLo,
                                  kInsideHi, line.window_px, line.bright);
    res.outside_stations = static_cast<int>(outside.samples.size());
    res.inside_stations = static_cast<int>(inside.samples.size());

    if (res.outside_stations < 4) {
        res.status = TrackStatus::Lost;
        res.displacement_px = line.window_px;
        res.curvature_flag = true;
        return res;
    }
    PolyFit ofit = fit_track(outside.samples, radius);
    res.outside_at_r = ofit.value_at;

    bool inside_gone = res.inside_stations < 4 || inside.edge_hits >= 2;
    if (inside_gone) {
        res.status = inside.edge_hits >= 2 ? TrackStatus::Saturated : TrackStatus::Lost;
        res.displacement_px = line.window_px;  // lower bound: track left the window
        res.curvature_flag = true;
        return res;
    }
    PolyFit ifit = fit_track(inside.samples, radius);
    res.inside_at_r = ifit.value_at;
    res.status = TrackStatus::Ok;
    res.displacement_px = std::abs(res.inside_at_r - res.outside_at_r);
    res.curvature_flag = ifit.quad_term > kCurveTolPx || ifit.max_residual > 3.0 * kCurveTolPx;
    res.connected = res.displacement_px < threshold;
    return res;
}

}  // namespace detail_analysis

inline ContinuityReport measure_line_continuity(const Image& img, Point2 center_px,
                                                double radius_px,
                                                const std::vector<LineSpecPx>& lines,
                                                double threshold_px = 1.0) {
    ContinuityReport report;
    report.center_px = center_px;
    report.radius_px = radius_px;
    report.threshold_px = threshold_px;
    for (const auto& line : lines) {
        LineContinuity best =
            detail_analysis::measure_branch(img, center_px, radius_px, line, +1, threshold_px);
        if (line.two_sided) {
            LineContinuity other = detail_analysis::measure_branch(img, center_px, radius_px,
                                                                   line, -1, threshold_px);
            // keep the worse crossing: a line is continuous only if both are
            bool other_worse =
                (other.status != TrackStatus::Ok && best.status == TrackStatus::Ok) ||
                (other.status == best.status && other.displacement_px > best.displacement_px);
            if (other_worse) best = other;
            best.curvature_flag = best.curvature_flag || other.curvature_flag;
        }
        report.lines.push_back(best);
    }
    return report;
}

// ---------------------------------------------------------------------------
// Fold convergence: total-least-squares lines, then the point minimizing the
// sum of squared point-to-line distances. Lines that do not pass near the
// common point (the exempt-fold role) are flagged as outliers by trimming
// and excluded from the final fit.
// ---------------------------------------------------------------------------

struct FittedLine {
    Point2 point;  // centroid of the samples
    Vec2 dir;      // unit direction (principal axis)
};

inline FittedLine fit_line_tls(const std::vector<Point2>& pts) {
    if (pts.size() < 2) throw AnalysisError("fit_line_tls: need at least 2 points");
    double mx = 0, my = 0;
    for (const auto& p : pts) {
        mx += p.x;
        my += p.y;
    }
    mx /= pts.size();
    my /= pts.size();
    double sxx = 0, sxy = 0, syy = 0;
    for (const auto& p : pts) {
        double dx = p.x - mx, dy = p.y - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    // principal eigenvector of the 2x2 covariance
    double tr = sxx + syy;
    double d = std::sqrt(std::max(0.0, (sxx - syy) * (sxx - syy) + 4.0 * sxy * sxy));
    double lam = 0.5 * (tr + d);
    Vec2 dir;
    if (std::abs(sxy) > 1e-15)
        dir = normalize(Vec2{lam - syy, sxy});
    else
        dir = sxx >= syy ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0};
    return {{mx, my}, dir};
}

struct ConvergenceFit {
    Point2 point;
    double rms_residual_px = 0.0;     // over inlier lines
    std::vector<int> outliers;        // fold indices flagged by the 3x-median rule
    std::vector<FittedLine> lines;
};

namespace detail_analysis {

inline Point2 solve_convergence(const std::vector<FittedLine>& lines,
                                const std::vector<int>& use) {
    // minimize sum over lines of |(I - d d^T)(x - p)|^2
    double a00 = 0, a01 = 0, a11 = 0, b0 = 0, b1 = 0;
    for (int i : use) {
        const auto& ln = lines[i];
        double nx = -ln.dir.y, ny = ln.dir.x;  // unit normal
        a00 += nx * nx;
        a01 += nx * ny;
        a11 += ny * ny;
        double pn = ln.point.x * nx + ln.point.y * ny;
        b0 += nx * pn;
        b1 += ny * pn;
    }
    double det = a00 * a11 - a01 * a01;
    if (std::abs(det) < 1e-9 * (a00 + a11) * (a00 + a11))
        throw AnalysisError("fold convergence: lines are parallel, no convergence point");
    return {(a11 * b0 - a01 * b1) / det, (a00 * b1 - a01 * b0) / det};
}

inline double point_line_distance(const Point2& x, const FittedLine& ln) {
    double nx = -ln.dir.y, ny = ln.dir.x;
    return std::abs((x.x - ln.point.x) * nx + (x.y - ln.point.y) * ny);
}

}  // namespace detail_analysis

inline ConvergenceFit fit_fold_convergence(const std::vector<std::vector<Point2>>& fold_samples) {
    if (fold_samples.size() < 2)
        throw AnalysisError("fold convergence: need at least 2 fold edges");
    ConvergenceFit fit;
    for (const auto& samples : fold_samples) fit.lines.push_back(fit_line_tls(samples));

    // Trimmed fit by leave-one-out: a single badly offset line drags the
    // joint solution and inflates every residual, so distance-to-first-fit
    // cuts are unreliable. Instead drop the line whose removal collapses the
    // residual, as long as it does so decisively.
    auto rms_of = [&](const std::vector<int>& idx) {
        Point2 p = detail_analysis::solve_convergence(fit.lines, idx);
        double ss = 0.0;
        for (int i : idx) {
            double r = detail_analysis::point_line_distance(p, fit.lines[i]);
            ss += r * r;
        }
        return std::sqrt(ss / idx.size());
    };
    std::vector<int> inliers(fit.lines.size());
    for (size_t i = 0; i < inliers.size(); ++i) inliers[i] = static_cast<int>(i);
    while (inliers.size() > 3) {
        double rms_all = rms_of(inliers);
        if (rms_all <= 0.25) break;
        size_t drop = inliers.size();
        double best = rms_all;
        for (size_t i = 0; i < inliers.size(); ++i) {
            std::vector<int> rest = inliers;
            rest.erase(rest.begin() + i);
            double r = rms_of(rest);
            if (r < best) { best = r; drop = i; }
        }
        if (drop == inliers.size() || best > 0.3 * rms_all) break;
        fit.outliers.push_back(inliers[drop]);
        inliers.erase(inliers.begin() + drop);
    }
    std::sort(fit.outliers.begin(), fit.outliers.end());
    fit.point = detail_analysis::solve_convergence(fit.lines, inliers);
    double ss = 0.0;
    for (int i : inliers) {
        double r = detail_analysis::point_line_distance(fit.point, fit.lines[i]);
        ss += r * r;
    }
    fit.rms_residual_px = std::sqrt(ss / inliers.size());
    return fit;
}

// ---------------------------------------------------------------------------
// Inversion detection: does the in-silhouette content correlate better with
// the point-reflected background than with the upright background?
// ---------------------------------------------------------------------------

struct InversionResult {
    double score = 0.0;  // corr_inverted - corr_upright; positive => inverted
    double corr_upright = 0.0;
    double corr_inverted = 0.0;
    bool indeterminate = false;  // in-silhouette content has no texture
};

inline InversionResult detect_inversion(const Image& with_orb, const Image& without_orb,
                                        Point2 center_px, double radius_px) {
    if (with_orb.width() != without_orb.width() || with_orb.height() != without_orb.height())
        throw AnalysisError("detect_inversion: dimension mismatch");
    std::vector<double> a, u, v;
    // Inner annulus only: near the rim even a thin shell remaps content
    // strongly, which would dilute the upright-vs-inverted contrast.
    double r_lo = 0.15 * radius_px, r_hi = 0.54 * radius_px;
    for (int y = 0; y < with_orb.height(); ++y)
        for (int x = 0; x < with_orb.width(); ++x) {
            double dx = x + 0.5 - center_px.x;
            double dy = y + 0.5 - center_px.y;
            double r2 = dx * dx + dy * dy;
            if (r2 < r_lo * r_lo || r2 > r_hi * r_hi) continue;
            a.push_back(luminance(with_orb.at(x, y)));
            u.push_back(without_orb.sample_luminance(x + 0.5, y + 0.5));
            v.push_back(without_orb.sample_luminance(2.0 * center_px.x - (x + 0.5),
                                                     2.0 * center_px.y - (y + 0.5)));
        }
    if (a.size() < 16) throw AnalysisError("detect_inversion: annulus outside image");

    auto pearson = [](const std::vector<double>& p, const std::vector<double>& q,
                      bool& degenerate) {
        double mp = 0, mq = 0;
        for (size_t i = 0; i < p.size(); ++i) {
            mp += p[i];
            mq += q[i];
        }
        mp /= p.size();
        mq /= q.size();
        double spq = 0, spp = 0, sqq = 0;
        for (size_t i = 0; i < p.size(); ++i) {
            spq += (p[i] - mp) * (q[i] - mq);
            spp += (p[i] - mp) * (p[i] - mp);
            sqq += (q[i] - mq) * (q[i] - mq);
        }
        if (spp < 1e-12 || sqq < 1e-12) {
            degenerate = true;
            return 0.0;
        }
        return spq / std::sqrt(spp * sqq);
    };

    InversionResult res;
    bool deg_a = false, deg_b = false;
    res.corr_upright = pearson(a, u, deg_a);
    res.corr_inverted = pearson(a, v, deg_b);
    res.indeterminate = deg_a || deg_b;
    res.score = res.corr_inverted - res.corr_upright;
    return res;
}

// ---------------------------------------------------------------------------
// Interior track counting: how many distinct line tracks cross near-center
// scan rows inside the silhouette. Used to detect the double contours of the
// averaged dual-index render (each line splits into two tracks).
// ---------------------------------------------------------------------------

inline int count_interior_tracks(const Image& img, Point2 center_px, double radius_px,
                                 bool bright = false, int rows = 15) {
    std::vector<std::vector<double>> row_positions;
    double x_lim = 0.9 * radius_px;
    for (int k = 0; k < rows; ++k) {
        double y = center_px.y + (rows > 1 ? (k / (rows - 1.0) - 0.5) : 0.0) * 0.1 * radius_px;
        std::vector<double> lum;
        std::vector<double> xs;
        for (double x = center_px.x - x_lim; x <= center_px.x + x_lim; x += 0.5) {
            xs.push_back(x);
            lum.push_back(img.sample_luminance(x, y));
        }
        double lo = *std::min_element(lum.begin(), lum.end());
        double hi = *std::max_element(lum.begin(), lum.end());
        if (hi - lo < 0.05 * (hi + 1e-9)) {
            row_positions.push_back({});
            continue;
        }
        // connected runs below (above) the half-contrast level
        std::vector<double> centers;
        double wsum = 0.0, xsum = 0.0;
        bool in_run = false;
        for (size_t i = 0; i <= lum.size(); ++i) {
            bool on = false;
            if (i < lum.size()) {
                double norm = (lum[i] - lo) / (hi - lo);
                if (!bright) norm = 1.0 - norm;
                on = norm > 0.5;
                if (on) {
                    wsum += norm - 0.5;
                    xsum += (norm - 0.5) * xs[i];
                }
            }
            if (in_run && !on) {
                if (wsum > 0.0) centers.push_back(xsum / wsum);
                wsum = xsum = 0.0;
            }
            in_run = on;
        }
        row_positions.push_back(centers);
    }
    // cluster positions across rows; a track must appear in at least half the rows
    std::vector<std::pair<double, int>> clusters;  // (mean position, count)
    for (const auto& centers : row_positions)
        for (double c : centers) {
            bool merged = false;
            for (auto& cl : clusters)
                if (std::abs(cl.first - c) < 4.0) {
                    cl.first = (cl.first * cl.second + c) / (cl.second + 1);
                    ++cl.second;
                    merged = true;
                    break;
                }
            if (!merged) clusters.push_back({c, 1});
        }
    int tracks = 0;
    for (const auto& cl : clusters)
        if (cl.second * 2 >= rows) ++tracks;
    return tracks;
}

}  // namespace orb
