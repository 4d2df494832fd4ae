#include <random>

#include <gtest/gtest.h>

#include <blurvitals/grid.hpp>
#include <blurvitals/ppg.hpp>

#include "support.hpp"

using namespace blurvitals;
using namespace blurvitals::grid;

TEST(Grid, TilingArithmetic) {
    EXPECT_EQ(build_grid(64, 64, {16, 32}).size(), 20u);
    // two columns by two rows; the trailing 6 px column is dropped
    const BlockGrid g = build_grid(70, 64, {32});
    EXPECT_EQ(g.size(), 4u);
    for (const auto& b : g.blocks) EXPECT_LE(b.x0 + b.size, 64);
    EXPECT_EQ(build_grid(548, 968, {16, 32, 64}).size(), 34u * 60 + 17u * 30 + 8u * 15);
}

TEST(Grid, OrderIsScaleMajorRowMajor) {
    const BlockGrid g = build_grid(64, 32, {16, 32});
    ASSERT_EQ(g.size(), 8u + 2u);
    EXPECT_EQ(g.blocks[0], (Block{0, 0, 16, 0}));
    EXPECT_EQ(g.blocks[1], (Block{16, 0, 16, 0}));
    EXPECT_EQ(g.blocks[4], (Block{0, 16, 16, 0}));
    EXPECT_EQ(g.blocks[8], (Block{0, 0, 32, 1}));
    EXPECT_EQ(g.blocks[9], (Block{32, 0, 32, 1}));
}

TEST(Grid, Errors) {
    EXPECT_THROW(build_grid(64, 64, {}), ValidationError);
    EXPECT_THROW(build_grid(64, 64, {2}), ValidationError);
    const BlockGrid g = build_grid(64, 40, {16, 64});
    EXPECT_EQ(g.size(), 8u);
    EXPECT_EQ(g.warnings.size(), 1u);
    EXPECT_THROW(build_grid(10, 10, {16}), ValidationError);
}

TEST(Grid, EachScaleCoversItsAreaOnce) {
    const int w = 100, h = 75;
    const BlockGrid g = build_grid(w, h, {16, 32});
    for (int s_idx = 0; s_idx < 2; ++s_idx) {
        const int s = g.scales[s_idx];
        std::vector<int> hits(static_cast<std::size_t>(w) * h, 0);
        for (const auto& b : g.blocks) {
            if (b.scale_index != s_idx) continue;
            for (int y = b.y0; y < b.y0 + b.size; ++y)
                for (int x = b.x0; x < b.x0 + b.size; ++x) ++hits[static_cast<std::size_t>(y) * w + x];
        }
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const bool inside = x < (w / s) * s && y < (h / s) * s;
                EXPECT_EQ(hits[static_cast<std::size_t>(y) * w + x], inside ? 1 : 0);
            }
    }
}

TEST(Grid, BlockMeanSmallCases) {
    vidio::Frame f(4, 4, 8, 7);
    EXPECT_DOUBLE_EQ(block_mean(f, {0, 0, 4, 0}), 7.0);
    vidio::Frame g(2, 2);
    g.pixels = {0, 0, 2, 2};
    EXPECT_DOUBLE_EQ(block_mean(g, {0, 0, 2, 0}), 1.0);
    EXPECT_THROW(block_mean(g, {1, 0, 2, 0}), ValidationError);
}

TEST(Grid, BlockMeanAgreesWithBruteForce) {
    std::mt19937_64 gen(77);
    vidio::Frame f(90, 70, 16);
    std::uniform_int_distribution<int> px(0, 65535);
    for (auto& v : f.pixels) v = static_cast<std::uint16_t>(px(gen));
    const IntegralImage ii(f);
    for (int trial = 0; trial < 100; ++trial) {
        const int s = std::uniform_int_distribution<int>(1, 60)(gen);
        const int x0 = std::uniform_int_distribution<int>(0, 90 - s)(gen);
        const int y0 = std::uniform_int_distribution<int>(0, 70 - s)(gen);
        long long sum = 0;
        for (int y = y0; y < y0 + s; ++y)
            for (int x = x0; x < x0 + s; ++x) sum += f.at(x, y);
        const double expect = static_cast<double>(sum) / (static_cast<double>(s) * s);
        EXPECT_NEAR(block_mean(f, {x0, y0, s, 0}), expect, 1e-9);
        EXPECT_NEAR(ii.mean({x0, y0, s, 0}), expect, 1e-6);
    }
}

// ---------------------------------------------------------------------------

namespace {

vidio::VideoClip modulated_clip(double dc, double amp, double f, std::size_t n, double fps = 20.0) {
    vidio::VideoClip c;
    c.fps = fps;
    for (std::size_t k = 0; k < n; ++k) {
        const double v = dc * (1.0 + amp * std::sin(2.0 * std::numbers::pi * f * k / fps));
        // 16-bit keeps the 0.5% pulse well above the quantization step.
        c.frames.push_back(vidio::quantize(Image(16, 16, v * 256.0), 16));
    }
    return c;
}

} // namespace

TEST(Ppg, ConstantClip) {
    vidio::VideoClip c;
    for (int k = 0; k < 50; ++k) c.frames.push_back(vidio::Frame(16, 16, 8, 100));
    const auto t = ppg::extract_trace(c, {0, 0, 16, 0}, 25);
    ASSERT_EQ(t.c_raw.size(), 50u);
    for (double v : t.c_raw) EXPECT_DOUBLE_EQ(v, 100.0);
    for (double v : t.c_norm) EXPECT_DOUBLE_EQ(v, 0.0);
    EXPECT_EQ(t.segment_usable, (std::vector<std::uint8_t>{1, 1}));
}

TEST(Ppg, RecoversClosedFormPulse) {
    const auto c = modulated_clip(100.0, 0.005, 1.2, 200);
    const auto t = ppg::extract_trace(c, {0, 0, 16, 0}, 200);
    std::vector<double> ref(200);
    for (std::size_t k = 0; k < 200; ++k) ref[k] = 0.005 * std::sin(2.0 * std::numbers::pi * 1.2 * k / 20.0);
    ppg::detrend(ref);
    double err = 0.0, pow = 0.0;
    for (std::size_t k = 0; k < 200; ++k) {
        err += (t.c_norm[k] - ref[k]) * (t.c_norm[k] - ref[k]);
        pow += ref[k] * ref[k];
    }
    EXPECT_LT(std::sqrt(err / pow), 0.05);
}

TEST(Ppg, DarkWindowUnusable) {
    vidio::VideoClip c;
    for (int k = 0; k < 20; ++k) c.frames.push_back(vidio::Frame(4, 4, 8, k % 2)); // mean 0.5
    const auto t = ppg::extract_trace(c, {0, 0, 4, 0}, 20);
    EXPECT_EQ(t.segment_usable, (std::vector<std::uint8_t>{0}));
    for (double v : t.c_norm) EXPECT_EQ(v, 0.0);
}

TEST(Ppg, WindowMeanIsZero) {
    const auto c = modulated_clip(80.0, 0.01, 0.9, 120);
    const auto t = ppg::extract_trace(c, {0, 0, 16, 0}, 40);
    for (std::size_t s = 0; s < 120; s += 40) {
        double m = 0.0;
        for (std::size_t i = s; i < s + 40; ++i) m += t.c_norm[i];
        EXPECT_NEAR(m / 40.0, 0.0, 1e-9);
    }
}

TEST(Ppg, GainInvariance) {
    std::vector<double> raw(200);
    for (std::size_t k = 0; k < raw.size(); ++k) raw[k] = 120.0 + 0.6 * std::sin(0.37 * k) + 0.01 * k;
    const auto a = ppg::normalize_window(raw);
    for (double k : {0.01, 3.0, 250.0}) {
        std::vector<double> scaled(raw);
        for (double& v : scaled) v *= k;
        const auto b = ppg::normalize_window(scaled);
        for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-6);
    }
}

TEST(Ppg, RawTraceIsLinearInPixels) {
    vidio::VideoClip a, b, sum;
    std::mt19937_64 gen(4);
    std::uniform_int_distribution<int> px(0, 100);
    for (int k = 0; k < 5; ++k) {
        vidio::Frame fa(8, 8), fb(8, 8), fs(8, 8);
        for (std::size_t i = 0; i < fa.pixels.size(); ++i) {
            fa.pixels[i] = static_cast<std::uint16_t>(px(gen));
            fb.pixels[i] = static_cast<std::uint16_t>(px(gen));
            fs.pixels[i] = static_cast<std::uint16_t>(fa.pixels[i] + fb.pixels[i]);
        }
        a.frames.push_back(fa);
        b.frames.push_back(fb);
        sum.frames.push_back(fs);
    }
    const Block blk{2, 1, 5, 0};
    const auto ta = ppg::extract_trace(a, blk).c_raw;
    const auto tb = ppg::extract_trace(b, blk).c_raw;
    const auto ts = ppg::extract_trace(sum, blk).c_raw;
    for (std::size_t k = 0; k < ts.size(); ++k) EXPECT_NEAR(ts[k], ta[k] + tb[k], 1e-12);
}

TEST(Ppg, BlockMeansMatchDirectMeans) {
    const auto c = modulated_clip(60.0, 0.02, 1.0, 10);
    const BlockGrid g = build_grid(16, 16, {4, 8});
    const auto m = ppg::block_means(c, g);
    for (std::size_t b = 0; b < g.size(); ++b)
        for (std::size_t t = 0; t < c.size(); ++t) EXPECT_NEAR(m[b][t], block_mean(c.frames[t], g.blocks[b]), 1e-9);
}
