#pragma once

#include <cmath>
#include <functional>
#include <memory>

#include "orb/image.hpp"
#include "orb/scene.hpp"

namespace orb {

// Albedo/height evaluated in relief-plane coordinates (cm). Built once at
// scene construction; evaluation is pure and thread-safe.

inline double wrap_angle(double a) {
    while (a > kPi) a -= 2.0 * kPi;
    while (a < -kPi) a += 2.0 * kPi;
    return a;
}

class FoldPattern {
public:
    explicit FoldPattern(const ReliefSpec& spec) : spec_(spec) {}

    // Angular offset of a converging fold's centerline at plane radius rho:
    // straight (radial) out to straight_radius, then a circular-arc bend of
    // radius curve_radius toward increasing azimuth.
    double centerline_offset(double rho) const {
        double excess = rho - spec_.straight_radius;
        if (excess <= 0.0) return 0.0;
        return excess * excess / (2.0 * spec_.curve_radius);
    }

    double albedo(double x, double y) const {
        double dx = x - spec_.convergence.x;
        double dy = y - spec_.convergence.y;
        double rho = std::hypot(dx, dy);
        if (rho < spec_.dot_radius) return spec_.dot_albedo;
        double phi = std::atan2(dy, dx);

        double half_angle = deg_to_rad(spec_.fold_half_angle_deg);
        double safe_rho = std::max(rho, 1e-6);
        double halfw = std::max(spec_.fold_min_half_width / safe_rho, half_angle);

        // fold wedges sit on top of the ground tone at every radius
        for (double az : spec_.fold_azimuths_deg) {
            double phc = deg_to_rad(az) + centerline_offset(rho) / safe_rho;
            if (std::abs(wrap_angle(phi - phc)) < halfw) return spec_.fold_albedo;
        }
        // exempt fold: centerline misses the convergence point by exempt_offset
        double phe = deg_to_rad(spec_.exempt_azimuth_deg) +
                     (spec_.exempt_offset + centerline_offset(rho)) / safe_rho;
        double de = wrap_angle(phi - phe);
        if (std::abs(de) < halfw) return spec_.fold_albedo;

        double ground;
        if (rho > spec_.far_radius) {
            ground = spec_.far_albedo;
        } else {
            double phi_deg = phi / kPi * 180.0 - spec_.stripe_phase_deg;
            double half_periods = std::floor(phi_deg / (0.5 * spec_.stripe_period_deg));
            double sign = (static_cast<long long>(half_periods) % 2 == 0) ? 1.0 : -1.0;
            ground = spec_.base_albedo + sign * spec_.stripe_contrast;
        }
        // the exempt fold's wider soft cast shadow, on the increasing-azimuth side
        double shadow_halfw = halfw * spec_.exempt_shadow_scale;
        if (de > halfw && de < halfw + 2.0 * shadow_halfw) {
            double fall = 1.0 - (de - halfw) / (2.0 * shadow_halfw);
            return ground * (1.0 - 0.6 * fall);
        }
        return ground;
    }

    // Ridge height: smooth bump across each fold band.
    double height(double x, double y) const {
        if (spec_.fold_height <= 0.0) return 0.0;
        double dx = x - spec_.convergence.x;
        double dy = y - spec_.convergence.y;
        double rho = std::hypot(dx, dy);
        if (rho < spec_.dot_radius || rho > spec_.far_radius) return 0.0;
        double phi = std::atan2(dy, dx);
        double half_angle = deg_to_rad(spec_.fold_half_angle_deg);
        double safe_rho = std::max(rho, 1e-6);
        double halfw = std::max(spec_.fold_min_half_width / safe_rho, half_angle);
        double h = 0.0;
        auto bump = [&](double delta) {
            double t = std::abs(delta) / (2.0 * halfw);
            if (t < 1.0) h = std::max(h, spec_.fold_height * 0.5 * (1.0 + std::cos(kPi * t)));
        };
        for (double az : spec_.fold_azimuths_deg)
            bump(wrap_angle(phi - (deg_to_rad(az) + centerline_offset(rho) / safe_rho)));
        bump(wrap_angle(phi - (deg_to_rad(spec_.exempt_azimuth_deg) +
                               (spec_.exempt_offset + centerline_offset(rho)) / safe_rho)));
        return h;
    }

private:
    ReliefSpec spec_;
};

class LinePattern {
public:
    LinePattern(const LinesSpec& spec, Point2 convergence) : spec_(spec), conv_(convergence) {}

    // Three lines parallel to the y axis at x = -spacing, 0, +spacing
    // (relative to the convergence point). The middle line optionally kinks
    // by bend_deg beyond bend_start on the +y side.
    double albedo(double x, double y) const {
        double lx = x - conv_.x;
        double ly = y - conv_.y;
        double half = 0.5 * spec_.line_width;
        for (double cx : {-spec_.spacing, 0.0, spec_.spacing}) {
            double dx = lx - cx;
            if (cx == 0.0 && spec_.bend_deg != 0.0 && ly > spec_.bend_start)
                dx -= std::tan(deg_to_rad(spec_.bend_deg)) * (ly - spec_.bend_start);
            if (std::abs(dx) <= half) return spec_.line_albedo;
        }
        return spec_.plane_albedo;
    }

private:
    LinesSpec spec_;
    Point2 conv_;
};

class ImagePattern {
public:
    // img spans [-half_size, half_size]^2 in plane cm.
    ImagePattern(Image img, double half_size) : img_(std::move(img)), half_(half_size) {}

    RGB albedo(double x, double y) const {
        double u = (x / half_ * 0.5 + 0.5) * img_.width();
        double v = (0.5 - y / half_ * 0.5) * img_.height();
        return img_.sample(u, v);
    }

private:
    Image img_;
    double half_;
};

using AlbedoFn = std::function<RGB(double, double)>;

}  // namespace orb
