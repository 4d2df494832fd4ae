#pragma once

// Block-wise rigid translation between consecutive frames: the 2x2
// least-squares gradient system over the block, followed by one refinement
// pass against a bilinear warp of the previous frame.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "error.hpp"
#include "grid.hpp"
#include "image.hpp"
#include "parallel.hpp"
#include "vidio.hpp"

namespace blurvitals::flow {

struct Rect {
    int x0 = 0;
    int y0 = 0;
    int w = 0;
    int h = 0;

    static Rect of(const grid::Block& b) { return {b.x0, b.y0, b.size, b.size}; }
};

struct FlowOptions {
    double max_displacement = 8.0;
    /// Normal matrices with a worse eigenvalue ratio are treated as textureless.
    double max_condition = 1e6;
};

enum FlowFlag : std::uint8_t { kFlagNone = 0, kFlagLowTexture = 1, kFlagCapped = 2 };

struct FlowEstimate {
    double dx = 0.0;
    double dy = 0.0;
    bool low_texture = false;
    bool capped = false;

    std::uint8_t flags() const {
        return static_cast<std::uint8_t>((low_texture ? kFlagLowTexture : 0) | (capped ? kFlagCapped : 0));
    }
};

/// Precomputed gradients for one (prev, curr) pair, shared by every block.
class FramePairFlow {
public:
    FramePairFlow(Image prev, Image curr) : prev_(std::move(prev)), curr_(std::move(curr)) {
        if (prev_.width != curr_.width || prev_.height != curr_.height)
            throw ValidationError("frame pair differs in size");
        const int w = prev_.width;
        const int h = prev_.height;
        ix_ = Image(w, h);
        iy_ = Image(w, h);
        for (int y = 0; y < h; ++y) {
            const int ym = std::max(y - 1, 0);
            const int yp = std::min(y + 1, h - 1);
            for (int x = 0; x < w; ++x) {
                const int xm = std::max(x - 1, 0);
                const int xp = std::min(x + 1, w - 1);
                ix_.at(x, y) = 0.5 * (prev_.at(xp, y) - prev_.at(xm, y));
                iy_.at(x, y) = 0.5 * (prev_.at(x, yp) - prev_.at(x, ym));
            }
        }
    }

    FramePairFlow(const vidio::Frame& prev, const vidio::Frame& curr) : FramePairFlow(prev.to_image(), curr.to_image()) {}

    int width() const { return prev_.width; }
    int height() const { return prev_.height; }

    FlowEstimate estimate(const Rect& r, const FlowOptions& opt = {}) const {
        if (r.w <= 0 || r.h <= 0 || r.x0 < 0 || r.y0 < 0 || r.x0 + r.w > width() || r.y0 + r.h > height())
            throw ValidationError("flow region lies outside the frame");
        double sxx = 0, sxy = 0, syy = 0, sxt = 0, syt = 0;
        for (int y = r.y0; y < r.y0 + r.h; ++y) {
            const std::size_t row = static_cast<std::size_t>(y) * width();
            for (int x = r.x0; x < r.x0 + r.w; ++x) {
                const double gx = ix_.data[row + x];
                const double gy = iy_.data[row + x];
                const double gt = curr_.data[row + x] - prev_.data[row + x];
                sxx += gx * gx;
                sxy += gx * gy;
                syy += gy * gy;
                sxt += gx * gt;
                syt += gy * gt;
            }
        }
        FlowEstimate est;
        const double half_tr = 0.5 * (sxx + syy);
        const double spread = std::sqrt(0.25 * (sxx - syy) * (sxx - syy) + sxy * sxy);
        const double lmax = half_tr + spread;
        const double lmin = half_tr - spread;
        if (!(lmin > 0.0) || lmax > opt.max_condition * lmin) {
            est.low_texture = true;
            return est;
        }
        const double det = sxx * syy - sxy * sxy;
        auto solve = [&](double bx, double by, double& dx, double& dy) {
            dx = -(syy * bx - sxy * by) / det;
            dy = -(sxx * by - sxy * bx) / det;
        };
        double dx = 0.0;
        double dy = 0.0;
        solve(sxt, syt, dx, dy);

        if (std::abs(dx) <= opt.max_displacement && std::abs(dy) <= opt.max_displacement) {
            // Residual of curr sampled back along the first estimate against prev,
            // so prev's gradients stay valid at every pixel.
            const double fx = std::floor(dx);
            const double fy = std::floor(dy);
            const int ox = static_cast<int>(fx);
            const int oy = static_cast<int>(fy);
            const double ax = dx - fx;
            const double ay = dy - fy;
            const double w00 = (1 - ax) * (1 - ay), w10 = ax * (1 - ay), w01 = (1 - ax) * ay, w11 = ax * ay;
            const int wmax = width() - 1;
            const int hmax = height() - 1;
            double bx = 0.0;
            double by = 0.0;
            for (int y = r.y0; y < r.y0 + r.h; ++y) {
                const int y0 = std::clamp(y + oy, 0, hmax);
                const int y1 = std::clamp(y + oy + 1, 0, hmax);
                const double* c0 = curr_.data.data() + static_cast<std::size_t>(y0) * width();
                const double* c1 = curr_.data.data() + static_cast<std::size_t>(y1) * width();
                const std::size_t row = static_cast<std::size_t>(y) * width();
                for (int x = r.x0; x < r.x0 + r.w; ++x) {
                    const int x0 = std::clamp(x + ox, 0, wmax);
                    const int x1 = std::clamp(x + ox + 1, 0, wmax);
                    const double warped = w00 * c0[x0] + w10 * c0[x1] + w01 * c1[x0] + w11 * c1[x1];
                    const double res = warped - prev_.data[row + x];
                    bx += ix_.data[row + x] * res;
                    by += iy_.data[row + x] * res;
                }
            }
            double ddx = 0.0;
            double ddy = 0.0;
            solve(bx, by, ddx, ddy);
            dx += ddx;
            dy += ddy;
        }
        if (std::abs(dx) > opt.max_displacement || std::abs(dy) > opt.max_displacement) {
            est.capped = true;
            dx = std::clamp(dx, -opt.max_displacement, opt.max_displacement);
            dy = std::clamp(dy, -opt.max_displacement, opt.max_displacement);
        }
        est.dx = dx;
        est.dy = dy;
        return est;
    }

private:
    Image prev_;
    Image curr_;
    Image ix_;
    Image iy_;
};

inline FlowEstimate estimate_block_flow(const vidio::Frame& prev, const vidio::Frame& curr, const grid::Block& block,
                                        const FlowOptions& opt = {}) {
    if (prev.width != curr.width || prev.height != curr.height) throw ValidationError("frame pair differs in size");
    grid::check_inside(block, static_cast<int>(prev.width), static_cast<int>(prev.height));
    return FramePairFlow(prev, curr).estimate(Rect::of(block), opt);
}

inline double combined_angle(double dx, double dy) { return (dx == 0.0 && dy == 0.0) ? 0.0 : std::atan2(dy, dx); }

/// Per-pair motion of one region; sample t describes frame t relative to t-1.
struct MotionTrace {
    std::size_t block_id = 0;
    std::vector<double> dx;
    std::vector<double> dy;
    std::vector<double> theta;
    std::vector<std::uint8_t> flags;

    void resize(std::size_t n) {
        dx.assign(n, 0.0);
        dy.assign(n, 0.0);
        theta.assign(n, 0.0);
        flags.assign(n, kFlagNone);
    }
    void set(std::size_t i, const FlowEstimate& e) {
        dx[i] = e.dx;
        dy[i] = e.dy;
        theta[i] = combined_angle(e.dx, e.dy);
        flags[i] = e.flags();
    }
    std::size_t size() const { return dx.size(); }
};

inline MotionTrace trace_block(const vidio::VideoClip& clip, const grid::Block& block, const FlowOptions& opt = {}) {
    if (clip.size() < 2) throw InsufficientDataError("motion tracing needs a frame pair", 2);
    grid::check_inside(block, static_cast<int>(clip.width()), static_cast<int>(clip.height()));
    MotionTrace t;
    t.resize(clip.size() - 1);
    parallel_for(clip.size() - 1, [&](std::size_t i) {
        t.set(i, FramePairFlow(clip.frames[i], clip.frames[i + 1]).estimate(Rect::of(block), opt));
    });
    return t;
}

/// Traces for every grid block plus a whole-frame trace used for gating.
struct MotionField {
    std::vector<MotionTrace> blocks;
    MotionTrace whole_frame;
};

inline MotionField trace_grid(const vidio::VideoClip& clip, const grid::BlockGrid& g, const FlowOptions& opt = {}) {
    if (clip.size() < 2) throw InsufficientDataError("motion tracing needs a frame pair", 2);
    MotionField field;
    field.blocks.resize(g.size());
    for (std::size_t b = 0; b < g.size(); ++b) {
        field.blocks[b].block_id = b;
        field.blocks[b].resize(clip.size() - 1);
    }
    field.whole_frame.resize(clip.size() - 1);
    const Rect full{0, 0, static_cast<int>(clip.width()), static_cast<int>(clip.height())};
    parallel_for(clip.size() - 1, [&](std::size_t i) {
        const FramePairFlow pair(clip.frames[i], clip.frames[i + 1]);
        for (std::size_t b = 0; b < g.size(); ++b) field.blocks[b].set(i, pair.estimate(Rect::of(g.blocks[b]), opt));
        field.whole_frame.set(i, pair.estimate(full, opt));
    });
    return field;
}

} // namespace blurvitals::flow
