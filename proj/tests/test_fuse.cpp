#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include <blurvitals/fuse.hpp>
#include <blurvitals/optics.hpp>
#include <blurvitals/pipeline.hpp>
#include <blurvitals/synth.hpp>

#include "support.hpp"

using namespace blurvitals;
using namespace blurvitals::fuse;

namespace {

SnrHeatmap map_of(std::vector<double> snr) {
    SnrHeatmap m;
    m.snr = std::move(snr);
    m.axis.assign(m.snr.size(), spectra::Source::ppg);
    return m;
}

double snr_of(const std::vector<double>& x) {
    const auto s = spectra::window_spectrum(x, spectra::WindowPlan{}, 20.0, spectra::Source::ppg);
    return spectra::snr_db(s, spectra::kHeartBand, true);
}

struct Analyzed {
    synth::GroundTruth gt;
    ClipAnalysis a;
};

Analyzed analyze(const synth::SceneConfig& c, double blur_radius = 0.0) {
    const synth::SceneRenderer r(c);
    const optics::PsfKernel psf = optics::disc_psf(blur_radius);
    return {r.ground_truth(), analyze_clip(r.render_clip(blur_radius > 0.0 ? &psf : nullptr), PipelineConfig{}, true)};
}

synth::SceneConfig twenty_seconds() { return testsupport::small_scene(20.0); }

const Analyzed& clear_clip() {
    static const Analyzed a = analyze(twenty_seconds());
    return a;
}

double skin_fraction(const synth::GroundTruth& gt, const grid::Block& b) {
    long n = 0;
    for (int y = b.y0; y < b.y0 + b.size; ++y)
        for (int x = b.x0; x < b.x0 + b.size; ++x) n += gt.skin(x, y);
    return static_cast<double>(n) / b.area();
}

} // namespace

TEST(Fuse, SelectRoiKeepsOnlyBlocksAboveThreshold) {
    const auto m = map_of({-5.0, 4.0, -1.0, 12.0, -20.0, 0.5, -3.0});
    EXPECT_EQ(select_roi(m, 10, 0.0), (std::vector<std::size_t>{3, 1, 5}));
    EXPECT_EQ(select_roi(m, 2, 0.0), (std::vector<std::size_t>{3, 1}));
    EXPECT_TRUE(select_roi(map_of(std::vector<double>(50, -2.0)), 10, 0.0).empty());
    EXPECT_THROW(select_roi(m, 0, 0.0), ValidationError);
}

TEST(Fuse, SelectRoiTieGoesToLowerIndex) {
    EXPECT_EQ(select_roi(map_of({3.0, 7.0, 7.0, 3.0}), 3, 0.0), (std::vector<std::size_t>{1, 2, 0}));
}

TEST(Fuse, CombineSingleTraceIsIdentity) {
    auto t = testsupport::tone(1.3, 200, 20.0);
    const auto g = combine_global(std::vector<std::vector<double>>{t}, std::vector<double>{8.0});
    ASSERT_TRUE(g);
    double m = 0.0;
    for (double v : t) m += v;
    m /= t.size();
    for (std::size_t i = 0; i < t.size(); ++i) EXPECT_NEAR((*g)[i], t[i] - m, 1e-12);
}

TEST(Fuse, CombineIdenticalTracesGivesSameTrace) {
    const auto t = testsupport::tone(0.9, 200, 20.0, 2.0, 0.4);
    const auto one = combine_global(std::vector<std::vector<double>>{t}, std::vector<double>{0.0});
    const auto three = combine_global(std::vector<std::vector<double>>{t, t, t}, std::vector<double>{1.0, 9.0, 30.0});
    for (std::size_t i = 0; i < t.size(); ++i) EXPECT_NEAR((*three)[i], (*one)[i], 1e-12);
}

TEST(Fuse, CombineEmptyAndMismatch) {
    EXPECT_FALSE(combine_global(std::vector<std::vector<double>>{}, std::vector<double>{}));
    const std::vector<std::vector<double>> two{std::vector<double>(5, 1.0), std::vector<double>(4, 1.0)};
    EXPECT_THROW(combine_global(two, std::vector<double>{1.0, 1.0}), ValidationError);
    EXPECT_THROW(combine_global(two, std::vector<double>{1.0}), ValidationError);
}

TEST(Fuse, CombiningCleanAndNoisyBeatsNoisy) {
    std::mt19937_64 gen(21);
    std::normal_distribution<double> n(0.0, 1.0);
    const auto s = testsupport::tone(1.4, 200, 20.0);
    std::vector<double> clean(s), noisy(s);
    for (double& v : clean) v += 0.05 * n(gen);
    for (double& v : noisy) v += 2.0 * n(gen);
    const double sc = snr_of(clean), sn = snr_of(noisy);
    const auto g = combine_global(std::vector<std::vector<double>>{clean, noisy}, std::vector<double>{sc, sn});
    EXPECT_GE(snr_of(*g), sn);
}

TEST(Fuse, MotionMetric) {
    const std::vector<double> zero(40, 0.0);
    EXPECT_EQ(motion_metric(zero, zero), 0.0);
    std::vector<double> alt(40);
    for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = (i % 2) ? 2.0 : 0.0;
    EXPECT_DOUBLE_EQ(motion_metric(alt, zero), 1.0);
    EXPECT_DOUBLE_EQ(motion_metric(zero, alt), 1.0);
    const std::vector<double> steady(40, 3.0);
    EXPECT_NEAR(motion_metric(steady, steady), 0.0, 1e-12);
    EXPECT_THROW(motion_metric(zero, std::vector<double>(3, 0.0)), ValidationError);
}

TEST(Fuse, HeatmapRejectsMissingBlock) {
    std::vector<BlockSpectra> blocks(3);
    blocks[0].channels.push_back(spectra::window_spectrum(testsupport::tone(1.0, 200, 20.0), {}, 20.0, spectra::Source::ppg));
    blocks[2] = blocks[0];
    EXPECT_THROW(build_heatmap(blocks, spectra::kHeartBand, Modality::ppg_hr), DataError);
}

TEST(Fuse, HeatmapTakesBetterAxis) {
    std::mt19937_64 gen(2);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> noise(200);
    for (double& v : noise) v = n(gen);
    std::vector<BlockSpectra> blocks(1);
    blocks[0].channels.push_back(spectra::window_spectrum(noise, {}, 20.0, spectra::Source::motion_dx));
    blocks[0].channels.push_back(
        spectra::window_spectrum(testsupport::tone(0.3, 200, 20.0), {}, 20.0, spectra::Source::motion_dy));
    const auto m = build_heatmap(blocks, spectra::kBreathBand, Modality::motion_rr);
    EXPECT_EQ(m.axis[0], spectra::Source::motion_dy);
    EXPECT_GT(m.snr[0], 20.0);
}

// ---------------------------------------------------------------------------
// On rendered scenes

TEST(FusePipeline, EstimatesTrackTruth) {
    const auto& [gt, a] = clear_clip();
    ASSERT_EQ(a.estimates.size(), 11u);
    for (std::size_t w = 0; w < a.estimates.size(); ++w) {
        const auto& e = a.estimates[w];
        EXPECT_FALSE(e.gated);
        ASSERT_TRUE(e.hr_bpm && e.rr_bpm);
        EXPECT_NEAR(*e.hr_bpm, gt.hr_bpm[w], 1.2);
        EXPECT_NEAR(*e.rr_bpm, gt.rr_bpm[w], 1.2);
        EXPECT_GT(e.hr_quality, 10.0);
        EXPECT_DOUBLE_EQ(e.t_center_s, gt.t_center_s[w]);
    }
}

TEST(FusePipeline, PpgRoiSitsOnSkin) {
    const auto& [gt, a] = clear_clip();
    const std::size_t decile = (a.grid.size() + 9) / 10;
    double total = 0.0;
    for (const auto& d : a.diagnostics) {
        std::vector<std::size_t> order(a.grid.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t x, std::size_t y) { return d.ppg_map.snr[x] > d.ppg_map.snr[y]; });
        double skin = 0.0, area = 0.0;
        for (std::size_t i = 0; i < decile; ++i) {
            const auto& b = a.grid.blocks[order[i]];
            skin += skin_fraction(gt, b) * b.area();
            area += b.area();
        }
        total += skin / area;
        EXPECT_GE(skin_fraction(gt, a.grid.blocks[d.ppg_roi.front()]), 0.5);
    }
    EXPECT_GE(total / a.diagnostics.size(), 0.6);
}

TEST(FusePipeline, RoiIsStableAcrossWindows) {
    const auto& a = clear_clip().a;
    for (std::size_t w = 1; w < a.diagnostics.size(); ++w) {
        const std::set<std::size_t> p(a.diagnostics[w - 1].ppg_roi.begin(), a.diagnostics[w - 1].ppg_roi.end());
        const std::set<std::size_t> q(a.diagnostics[w].ppg_roi.begin(), a.diagnostics[w].ppg_roi.end());
        std::size_t common = 0;
        for (auto b : q) common += p.count(b);
        const double jaccard = static_cast<double>(common) / static_cast<double>(p.size() + q.size() - common);
        EXPECT_GE(jaccard, 0.5) << w;
    }
}

TEST(FusePipeline, MotionEventIsGated) {
    auto c = twenty_seconds();
    c.motion_events.push_back({12.0, 13.0, 20.0});
    const auto [gt, a] = analyze(c);
    const auto plan = a.plan;
    for (std::size_t w = 0; w < a.estimates.size(); ++w) {
        const auto& e = a.estimates[w];
        const std::size_t s = plan.start(w);
        const bool overlaps = s < 260 && s + plan.window_len > 240;
        EXPECT_EQ(e.gated, overlaps) << w << " metric " << e.motion_intensity;
        if (e.gated) {
            EXPECT_GT(e.motion_intensity, 1.0);
            EXPECT_FALSE(e.hr_bpm);
            EXPECT_FALSE(e.rr_bpm);
        } else {
            EXPECT_LT(e.motion_intensity, 1.0);
        }
    }
}

// With nothing to find the heart band stays near the white-noise level. The
// breathing band does not: its signal window spans a large share of the band,
// so its quality sits well above 0 dB even on pure noise.
TEST(FusePipeline, AllNoiseClipHasLowHeartQuality) {
    auto c = testsupport::small_scene(12.0);
    c.pulse_amplitude = 0.0;
    c.breath_amplitude = 0.0;
    const auto [gt, a] = analyze(c);
    for (const auto& e : a.estimates) EXPECT_LT(e.hr_quality, 3.0);
}

TEST(FusePipeline, BlurDoesNotImproveHeartQuality) {
    auto mean_quality = [](const ClipAnalysis& a) {
        double s = 0.0;
        for (const auto& e : a.estimates) s += e.hr_quality;
        return s / a.estimates.size();
    };
    const double q0 = mean_quality(clear_clip().a);
    const double q6 = mean_quality(analyze(twenty_seconds(), 6.0).a);
    EXPECT_GE(q0, q6);
}
