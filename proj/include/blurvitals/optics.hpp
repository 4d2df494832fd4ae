#pragma once

// Defocus model: a uniform disc point-spread function, discretized by exact
// pixel-area coverage, applied with replicate-edge padding.

#include <algorithm>
#include <cmath>
#include <vector>

#include "error.hpp"
#include "image.hpp"
#include "parallel.hpp"
#include "vidio.hpp"

namespace blurvitals::optics {

struct PsfKernel {
    double radius = 0.0;
    int side = 1;
    std::vector<double> taps{1.0};

    int half() const { return side / 2; }
    /// Tap at offset (dx, dy) from the center.
    double tap(int dx, int dy) const { return taps[static_cast<std::size_t>(dy + half()) * side + (dx + half())]; }
};

namespace detail {

// Antiderivative of sqrt(r^2 - x^2).
inline double chord_integral(double r, double x) {
    x = std::clamp(x, -r, r);
    return 0.5 * (x * std::sqrt(r * r - x * x) + r * r * std::asin(x / r));
}

} // namespace detail

/// Exact area of the disc |p| <= r intersected with [x0, x1] x [y0, y1].
inline double disc_cell_area(double r, double x0, double x1, double y0, double y1) {
    const double a = std::max(x0, -r);
    const double b = std::min(x1, r);
    if (a >= b || r <= 0.0) return 0.0;
    std::vector<double> cuts{a, b};
    for (double y : {y0, y1}) {
        if (std::abs(y) >= r) continue;
        const double s = std::sqrt(r * r - y * y);
        for (double c : {-s, s})
            if (c > a && c < b) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    double area = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double u = cuts[i];
        const double v = cuts[i + 1];
        if (v <= u) continue;
        const double m = 0.5 * (u + v);
        const double h = std::sqrt(std::max(0.0, r * r - m * m));
        if (std::min(y1, h) <= std::max(y0, -h)) continue;
        // Within one piece the active bounds do not switch between the
        // cell edge and the circle.
        const double arc = detail::chord_integral(r, v) - detail::chord_integral(r, u);
        const double upper = y1 < h ? y1 * (v - u) : arc;
        const double lower = y0 > -h ? y0 * (v - u) : -arc;
        area += upper - lower;
    }
    return area;
}

inline PsfKernel disc_psf(double radius) {
    if (!(radius >= 0.0) || !std::isfinite(radius)) throw ValidationError("blur radius must be a non-negative number");
    PsfKernel k;
    k.radius = radius;
    if (radius == 0.0) return k;
    const int h = static_cast<int>(std::ceil(radius));
    k.side = 2 * h + 1;
    k.taps.assign(static_cast<std::size_t>(k.side) * k.side, 0.0);
    double total = 0.0;
    for (int j = -h; j <= h; ++j)
        for (int i = -h; i <= h; ++i) {
            const double a = disc_cell_area(radius, i - 0.5, i + 0.5, j - 0.5, j + 0.5);
            k.taps[static_cast<std::size_t>(j + h) * k.side + (i + h)] = a;
            total += a;
        }
    for (double& t : k.taps) t /= total;
    return k;
}

/// Real-valued convolution with replicate-edge padding.
inline Image convolve(const Image& img, const PsfKernel& psf) {
    const int h = psf.half();
    if (psf.side > std::min(img.width, img.height))
        throw ValidationError("blur kernel of side " + std::to_string(psf.side) + " exceeds the frame");
    if (psf.side == 1) return img;
    const int pw = img.width + 2 * h;
    const int ph = img.height + 2 * h;
    std::vector<double> padded(static_cast<std::size_t>(pw) * ph);
    for (int y = 0; y < ph; ++y)
        for (int x = 0; x < pw; ++x) padded[static_cast<std::size_t>(y) * pw + x] = img.clamped(x - h, y - h);

    Image out(img.width, img.height);
    for (int dy = -h; dy <= h; ++dy)
        for (int dx = -h; dx <= h; ++dx) {
            const double w = psf.tap(dx, dy);
            if (w == 0.0) continue;
            for (int y = 0; y < img.height; ++y) {
                const double* src = padded.data() + static_cast<std::size_t>(y + h + dy) * pw + (h + dx);
                double* dst = out.data.data() + static_cast<std::size_t>(y) * img.width;
                for (int x = 0; x < img.width; ++x) dst[x] += w * src[x];
            }
        }
    return out;
}

inline vidio::Frame blur_frame(const vidio::Frame& frame, const PsfKernel& psf) {
    if (psf.side == 1) return frame;
    return vidio::quantize(convolve(frame.to_image(), psf), frame.bit_depth);
}

inline vidio::VideoClip blur_clip(const vidio::VideoClip& clip, const PsfKernel& psf) {
    if (psf.side > static_cast<int>(std::min(clip.width(), clip.height())) && !clip.empty())
        throw ValidationError("blur kernel of side " + std::to_string(psf.side) + " exceeds the frame");
    vidio::VideoClip out;
    out.fps = clip.fps;
    out.label = clip.label;
    out.frames.resize(clip.size());
    parallel_for(clip.size(), [&](std::size_t i) { out.frames[i] = blur_frame(clip.frames[i], psf); });
    return out;
}

} // namespace blurvitals::optics
