#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace blurvitals {

/// Real-valued row-major intensity grid used for every pre-quantization step.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    Image() = default;
    Image(int w, int h, double fill = 0.0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

    double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }

    double clamped(int x, int y) const {
        x = std::clamp(x, 0, width - 1);
        y = std::clamp(y, 0, height - 1);
        return at(x, y);
    }
};

/// Bilinear sample with replicate-edge extension.
inline double bilinear(const Image& img, double x, double y) {
    const double fx = std::floor(x);
    const double fy = std::floor(y);
    const int x0 = static_cast<int>(fx);
    const int y0 = static_cast<int>(fy);
    const double ax = x - fx;
    const double ay = y - fy;
    const double v00 = img.clamped(x0, y0);
    const double v10 = img.clamped(x0 + 1, y0);
    const double v01 = img.clamped(x0, y0 + 1);
    const double v11 = img.clamped(x0 + 1, y0 + 1);
    return (1 - ay) * ((1 - ax) * v00 + ax * v10) + ay * ((1 - ax) * v01 + ax * v11);
}

/// Bilinear sample that treats everything outside the grid as zero.
inline double bilinear_zero(const Image& img, double x, double y) {
    const double fx = std::floor(x);
    const double fy = std::floor(y);
    const int x0 = static_cast<int>(fx);
    const int y0 = static_cast<int>(fy);
    const double ax = x - fx;
    const double ay = y - fy;
    auto get = [&](int xx, int yy) {
        if (xx < 0 || yy < 0 || xx >= img.width || yy >= img.height) return 0.0;
        return img.at(xx, yy);
    };
    return (1 - ay) * ((1 - ax) * get(x0, y0) + ax * get(x0 + 1, y0)) +
           ay * ((1 - ax) * get(x0, y0 + 1) + ax * get(x0 + 1, y0 + 1));
}

/// Translates content by (dx, dy): out(x, y) = img(x - dx, y - dy).
inline Image shift_image(const Image& img, double dx, double dy) {
    Image out(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) out.at(x, y) = bilinear(img, x - dx, y - dy);
    return out;
}

} // namespace blurvitals
