#pragma once

// Multi-scale block segmentation. Each scale tiles the frame with square,
// non-overlapping blocks; trailing partial blocks are dropped.

#include <cstddef>
#include <string>
#include <vector>

#include "error.hpp"
#include "image.hpp"
#include "vidio.hpp"

namespace blurvitals::grid {

struct Block {
    int x0 = 0;
    int y0 = 0;
    int size = 0;
    int scale_index = 0;

    long long area() const { return static_cast<long long>(size) * size; }
    bool contains(int x, int y) const { return x >= x0 && x < x0 + size && y >= y0 && y < y0 + size; }
    friend bool operator==(const Block&, const Block&) = default;
};

struct BlockGrid {
    int width = 0;
    int height = 0;
    std::vector<int> scales;
    std::vector<Block> blocks;
    /// Scales that were dropped because they do not fit in the frame.
    std::vector<std::string> warnings;

    std::size_t size() const { return blocks.size(); }
};

inline const std::vector<int>& default_scales() {
    static const std::vector<int> s{16, 32, 64};
    return s;
}

inline BlockGrid build_grid(int width, int height, const std::vector<int>& scales) {
    if (scales.empty()) throw ValidationError("scale list is empty");
    if (width <= 0 || height <= 0) throw ValidationError("frame dimensions must be positive");
    BlockGrid g;
    g.width = width;
    g.height = height;
    int scale_index = 0;
    for (int s : scales) {
        if (s < 4) throw ValidationError("block scale " + std::to_string(s) + " is below the 4 px minimum");
        if (s > width || s > height) {
            g.warnings.push_back("scale " + std::to_string(s) + " exceeds the " + std::to_string(width) + "x" +
                                 std::to_string(height) + " frame and was skipped");
            continue;
        }
        g.scales.push_back(s);
        for (int by = 0; by + s <= height; by += s)
            for (int bx = 0; bx + s <= width; bx += s) g.blocks.push_back({bx, by, s, scale_index});
        ++scale_index;
    }
    if (g.blocks.empty()) throw ValidationError("no block scale fits the frame");
    return g;
}

inline void check_inside(const Block& b, int width, int height) {
    if (b.size <= 0 || b.x0 < 0 || b.y0 < 0 || b.x0 + b.size > width || b.y0 + b.size > height)
        throw ValidationError("block lies outside the frame");
}

inline double block_mean(const vidio::Frame& frame, const Block& b) {
    check_inside(b, static_cast<int>(frame.width), static_cast<int>(frame.height));
    double sum = 0.0;
    for (int y = b.y0; y < b.y0 + b.size; ++y) {
        const std::uint16_t* row = frame.pixels.data() + static_cast<std::size_t>(y) * frame.width;
        for (int x = b.x0; x < b.x0 + b.size; ++x) sum += row[x];
    }
    return sum / static_cast<double>(b.area());
}

/// Summed-area table for O(1) block means over many blocks of one frame.
class IntegralImage {
public:
    explicit IntegralImage(const vidio::Frame& frame)
        : width_(static_cast<int>(frame.width)), height_(static_cast<int>(frame.height)),
          sums_(static_cast<std::size_t>(width_ + 1) * (height_ + 1), 0.0) {
        for (int y = 0; y < height_; ++y) {
            double row = 0.0;
            for (int x = 0; x < width_; ++x) {
                row += frame.pixels[static_cast<std::size_t>(y) * width_ + x];
                sums_[idx(x + 1, y + 1)] = sums_[idx(x + 1, y)] + row;
            }
        }
    }

    double mean(const Block& b) const {
        const int x1 = b.x0 + b.size;
        const int y1 = b.y0 + b.size;
        const double s = sums_[idx(x1, y1)] - sums_[idx(b.x0, y1)] - sums_[idx(x1, b.y0)] + sums_[idx(b.x0, b.y0)];
        return s / static_cast<double>(b.area());
    }

private:
    std::size_t idx(int x, int y) const { return static_cast<std::size_t>(y) * (width_ + 1) + x; }
    int width_;
    int height_;
    std::vector<double> sums_;
};

} // namespace blurvitals::grid
