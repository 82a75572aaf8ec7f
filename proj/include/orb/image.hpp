#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "orb/optics.hpp"

namespace orb {

// Linear-radiance raster. All measurement happens on this; 8-bit encodings
// exist only at the file boundary.
class Image {
public:
    Image() = default;
    Image(int width, int height, RGB fill = RGB{0.0})
        : width_(width), height_(height), pixels_(static_cast<size_t>(width) * height, fill) {}

    int width() const { return width_; }
    int height() const { return height_; }

    RGB& at(int x, int y) { return pixels_[static_cast<size_t>(y) * width_ + x]; }
    const RGB& at(int x, int y) const { return pixels_[static_cast<size_t>(y) * width_ + x]; }

    const std::vector<RGB>& pixels() const { return pixels_; }
    std::vector<RGB>& pixels() { return pixels_; }

    bool in_bounds(int x, int y) const { return x >= 0 && x < width_ && y >= 0 && y < height_; }

    // Bilinear sample at continuous pixel coordinates (the center of pixel
    // (i, j) is at (i + 0.5, j + 0.5), matching the camera's convention);
    // clamps at borders.
    RGB sample(double x, double y) const {
        x = std::clamp(x - 0.5, 0.0, static_cast<double>(width_ - 1));
        y = std::clamp(y - 0.5, 0.0, static_cast<double>(height_ - 1));
        int x0 = static_cast<int>(x);
        int y0 = static_cast<int>(y);
        int x1 = std::min(x0 + 1, width_ - 1);
        int y1 = std::min(y0 + 1, height_ - 1);
        double fx = x - x0, fy = y - y0;
        RGB a = at(x0, y0) * (1 - fx) + at(x1, y0) * fx;
        RGB b = at(x0, y1) * (1 - fx) + at(x1, y1) * fx;
        return a * (1 - fy) + b * fy;
    }

    double sample_luminance(double x, double y) const { return luminance(sample(x, y)); }

private:
    int width_ = 0, height_ = 0;
    std::vector<RGB> pixels_;
};

inline double gamma_encode(double linear, double gamma = 2.2) {
    return std::pow(std::clamp(linear, 0.0, 1.0), 1.0 / gamma);
}

inline double gamma_decode(double encoded, double gamma = 2.2) {
    return std::pow(std::clamp(encoded, 0.0, 1.0), gamma);
}

inline uint8_t encode_byte(double linear, double gamma = 2.2) {
    return static_cast<uint8_t>(std::lround(255.0 * gamma_encode(linear, gamma)));
}

}  // namespace orb
