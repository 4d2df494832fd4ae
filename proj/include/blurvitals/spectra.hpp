#pragma once

// Sliding-window power spectra, band-limited peak picking and SNR.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <fftw3.h>

#include "error.hpp"

namespace blurvitals::spectra {

struct WindowPlan {
    std::size_t window_len = 200;
    std::size_t hop = 20;
    std::size_t zero_pad_to = 2048;

    void validate() const {
        if (window_len < 4) throw ValidationError("analysis window must hold at least 4 samples");
        if (hop == 0 || hop > window_len) throw ValidationError("hop must be in [1, window_len]");
        if (zero_pad_to < window_len || !std::has_single_bit(zero_pad_to))
            throw ValidationError("zero_pad_to must be a power of two >= window_len");
    }

    std::size_t window_count(std::size_t trace_len) const {
        return trace_len < window_len ? 0 : (trace_len - window_len) / hop + 1;
    }
    std::size_t start(std::size_t window_index) const { return window_index * hop; }
    double center_seconds(std::size_t window_index, double fps) const {
        return (static_cast<double>(start(window_index)) + 0.5 * static_cast<double>(window_len)) / fps;
    }
};

/// Builds a plan from durations; padding is the larger of 2048 and the next power of two.
inline WindowPlan make_plan(double window_sec, double hop_sec, double fps) {
    if (!(window_sec > 0.0) || !(hop_sec > 0.0) || !(fps > 0.0))
        throw ValidationError("window, hop and fps must be positive");
    WindowPlan p;
    p.window_len = static_cast<std::size_t>(std::lround(window_sec * fps));
    p.hop = static_cast<std::size_t>(std::lround(hop_sec * fps));
    p.zero_pad_to = std::max<std::size_t>(2048, std::bit_ceil(std::max<std::size_t>(p.window_len, 1)));
    p.validate();
    return p;
}

struct Band {
    double lo = 0.0;
    double hi = 0.0;

    void validate(double fps) const {
        if (!(lo > 0.0) || !(hi > lo) || hi > fps / 2.0)
            throw ValidationError("band [" + std::to_string(lo) + ", " + std::to_string(hi) +
                                  "] Hz must satisfy 0 < lo < hi <= fps/2");
    }
    bool contains(double f) const { return f >= lo && f <= hi; }
};

inline constexpr Band kHeartBand{0.70, 3.00};
inline constexpr Band kBreathBand{0.10, 0.70};

enum class Source { ppg, motion_dx, motion_dy, motion_theta };

inline const char* to_string(Source s) {
    switch (s) {
    case Source::ppg: return "ppg";
    case Source::motion_dx: return "motion_dx";
    case Source::motion_dy: return "motion_dy";
    case Source::motion_theta: return "motion_theta";
    }
    return "?";
}

/// One-sided power spectrum of one analysis window. Bin k sits at k*fps/zero_pad_to.
struct Spectrum {
    std::size_t window_index = 0;
    Source source = Source::ppg;
    double fps = 0.0;
    std::size_t window_len = 0;
    std::size_t zero_pad_to = 0;
    std::vector<double> power;

    double bin_width() const { return fps / static_cast<double>(zero_pad_to); }
    /// Frequency resolution of the unpadded window; SNR bins are measured in this unit.
    double resolution() const { return fps / static_cast<double>(window_len); }
    double freq(std::size_t k) const { return static_cast<double>(k) * bin_width(); }
    std::vector<double> freqs() const {
        std::vector<double> f(power.size());
        for (std::size_t k = 0; k < f.size(); ++k) f[k] = freq(k);
        return f;
    }
};

namespace detail {

class RealFft {
public:
    static RealFft& instance() {
        static RealFft fft;
        return fft;
    }

    fftw_plan plan(std::size_t n) {
        std::lock_guard lock(mutex_);
        auto it = plans_.find(n);
        if (it != plans_.end()) return it->second;
        std::vector<double> in(n);
        std::vector<std::complex<double>> out(n / 2 + 1);
        fftw_plan p = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(), reinterpret_cast<fftw_complex*>(out.data()),
                                           FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(n, p);
        return p;
    }

    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;
    ~RealFft() {
        for (auto& [n, p] : plans_) fftw_destroy_plan(p);
    }

private:
    RealFft() = default;
    std::mutex mutex_;
    std::map<std::size_t, fftw_plan> plans_;
};

} // namespace detail

/// Symmetric Hann taper of length n.
inline std::vector<double> hann(std::size_t n) {
    std::vector<double> w(n, 1.0);
    if (n < 2) return w;
    for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1));
    return w;
}

/// Spectrum of exactly one window: mean removal, Hann taper, zero padding, |X|^2.
inline Spectrum window_spectrum(std::span<const double> samples, const WindowPlan& plan, double fps, Source source,
                                std::size_t window_index = 0) {
    plan.validate();
    if (samples.size() != plan.window_len)
        throw InsufficientDataError("window holds " + std::to_string(samples.size()) + " samples", plan.window_len);
    const std::size_t n = plan.zero_pad_to;
    thread_local std::vector<double> taper;
    if (taper.size() != plan.window_len) taper = hann(plan.window_len);

    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= static_cast<double>(samples.size());

    std::vector<double> in(n, 0.0);
    for (std::size_t i = 0; i < samples.size(); ++i) in[i] = (samples[i] - mean) * taper[i];
    std::vector<std::complex<double>> out(n / 2 + 1);
    fftw_execute_dft_r2c(detail::RealFft::instance().plan(n), in.data(), reinterpret_cast<fftw_complex*>(out.data()));

    Spectrum s;
    s.window_index = window_index;
    s.source = source;
    s.fps = fps;
    s.window_len = plan.window_len;
    s.zero_pad_to = n;
    s.power.resize(out.size());
    for (std::size_t k = 0; k < out.size(); ++k) s.power[k] = std::norm(out[k]);
    return s;
}

inline std::vector<Spectrum> windowed_spectrum(std::span<const double> trace, const WindowPlan& plan, double fps,
                                               Source source = Source::ppg) {
    plan.validate();
    if (trace.size() < plan.window_len)
        throw InsufficientDataError("trace of " + std::to_string(trace.size()) + " samples is shorter than one window",
                                    plan.window_len);
    const std::size_t count = plan.window_count(trace.size());
    std::vector<Spectrum> out;
    out.reserve(count);
    for (std::size_t w = 0; w < count; ++w)
        out.push_back(window_spectrum(trace.subspan(plan.start(w), plan.window_len), plan, fps, source, w));
    return out;
}

struct BandPeak {
    double freq = 0.0;
    double bpm = 0.0;
    std::size_t bin = 0;
};

struct BinRange {
    std::size_t first = 0;
    std::size_t last = 0; // inclusive
};

inline BinRange band_bins(const Spectrum& spec, const Band& band) {
    band.validate(spec.fps);
    const double bw = spec.bin_width();
    const auto first = static_cast<std::size_t>(std::ceil(band.lo / bw - 1e-9));
    const auto last = std::min(static_cast<std::size_t>(std::floor(band.hi / bw + 1e-9)), spec.power.size() - 1);
    if (last < first || last - first + 1 < 3) throw ValidationError("band holds fewer than 3 spectral bins");
    return {first, last};
}

/// Highest-power bin inside the band; ties go to the lower frequency.
inline BandPeak band_peak(const Spectrum& spec, const Band& band) {
    const BinRange r = band_bins(spec, band);
    std::size_t best = r.first;
    for (std::size_t k = r.first + 1; k <= r.last; ++k)
        if (spec.power[k] > spec.power[best]) best = k;
    return {spec.freq(best), spec.freq(best) * 60.0, best};
}

inline constexpr double kSnrFloorDb = -40.0;
inline constexpr double kSnrCeilingDb = 100.0;

/// Peak-to-remainder ratio in dB. Signal is the power within two unpadded
/// resolution bins of the band peak (and of its second harmonic when asked);
/// noise is the rest of the band.
inline double snr_db(const Spectrum& spec, const Band& band, bool include_harmonic) {
    const BinRange r = band_bins(spec, band);
    const BandPeak peak = band_peak(spec, band);
    const double half_width = 2.0 * spec.resolution();
    const double nyquist = spec.fps / 2.0;
    const double f0 = peak.freq;
    const bool harmonic = include_harmonic && 2.0 * f0 <= nyquist;
    auto in_signal = [&](double f) {
        if (std::abs(f - f0) <= half_width + 1e-12) return true;
        return harmonic && std::abs(f - 2.0 * f0) <= half_width + 1e-12;
    };
    double signal = 0.0;
    double noise = 0.0;
    for (std::size_t k = 0; k < spec.power.size(); ++k) {
        const double f = spec.freq(k);
        if (in_signal(f))
            signal += spec.power[k];
        else if (k >= r.first && k <= r.last)
            noise += spec.power[k];
    }
    if (!(signal > 0.0)) return kSnrFloorDb;
    if (!(noise > 0.0)) return kSnrCeilingDb;
    return std::clamp(10.0 * std::log10(signal / noise), kSnrFloorDb, kSnrCeilingDb);
}

} // namespace blurvitals::spectra
