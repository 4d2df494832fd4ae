#pragma once

// Independent reference computations and fixtures shared by the suites.
// Nothing here calls into the library code it is used to check.

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <blurvitals/synth.hpp>

namespace testsupport {

/// One-sided |X_k|^2 of the zero-padded sequence by the direct DFT sum.
inline std::vector<double> direct_dft_power(const std::vector<double>& x, std::size_t n_fft) {
    std::vector<double> out(n_fft / 2 + 1);
    for (std::size_t k = 0; k < out.size(); ++k) {
        long double re = 0.0L, im = 0.0L;
        for (std::size_t t = 0; t < x.size(); ++t) {
            const long double a = -2.0L * std::numbers::pi_v<long double> * static_cast<long double>(k * t % n_fft) /
                                  static_cast<long double>(n_fft);
            re += x[t] * std::cos(a);
            im += x[t] * std::sin(a);
        }
        out[k] = static_cast<double>(re * re + im * im);
    }
    return out;
}

/// Symmetric Hann from the sin^2 form.
inline std::vector<double> hann_ref(std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = std::pow(std::sin(std::numbers::pi * i / (n - 1.0)), 2);
    return w;
}

inline std::vector<double> tone(double f, std::size_t n, double fps, double amp = 1.0, double phase = 0.0) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(2.0 * std::numbers::pi * f * i / fps + phase);
    return x;
}

/// Fraction of a unit cell covered by a disc, by 256 x 256 point sampling.
inline double supersampled_cell(double r, int i, int j, int s = 256) {
    long hits = 0;
    for (int a = 0; a < s; ++a)
        for (int b = 0; b < s; ++b) {
            const double x = i - 0.5 + (a + 0.5) / s;
            const double y = j - 0.5 + (b + 0.5) / s;
            if (x * x + y * y <= r * r) ++hits;
        }
    return static_cast<double>(hits) / (static_cast<double>(s) * s);
}

/// Textured real image built from random plane waves.
inline blurvitals::Image texture(int w, int h, std::uint64_t seed, double amp = 20.0) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    blurvitals::Image img(w, h);
    struct W {
        double kx, ky, ph;
    };
    std::vector<W> ws;
    for (int i = 0; i < 12; ++i) {
        const double lambda = 6.0 + 20.0 * u(gen);
        const double ang = std::numbers::pi * u(gen);
        ws.push_back({2 * std::numbers::pi / lambda * std::cos(ang), 2 * std::numbers::pi / lambda * std::sin(ang),
                      2 * std::numbers::pi * u(gen)});
    }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double v = 100.0;
            for (const auto& q : ws) v += amp / 3.0 * std::cos(q.kx * x + q.ky * y + q.ph);
            img.at(x, y) = v;
        }
    return img;
}

/// Short default scene for fast pipeline tests.
inline blurvitals::synth::SceneConfig small_scene(double duration = 14.0) {
    blurvitals::synth::SceneConfig c;
    c.duration = duration;
    c.seed = 11;
    return c;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("blurvitals_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

inline std::string slurp(const std::filesystem::path& p) {
    const auto bytes = blurvitals::vidio::detail::read_all(p);
    return {bytes.begin(), bytes.end()};
}

} // namespace testsupport
