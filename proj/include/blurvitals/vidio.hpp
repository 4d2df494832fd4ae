#pragma once

// BVR1 raw container, P5 graymap import, and clip slicing.
//
// BVR1 layout (all integers little-endian):
//   "BVR1" | width u32 | height u32 | frame_count u32 | bit_depth u8 | fps f32 | 3 zero bytes
// followed by frame_count row-major frames; 16-bit samples are stored LE.

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "error.hpp"
#include "image.hpp"

namespace blurvitals::vidio {

struct Frame {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::uint8_t bit_depth = 8;
    std::vector<std::uint16_t> pixels;

    Frame() = default;
    Frame(std::uint32_t w, std::uint32_t h, std::uint8_t depth = 8, std::uint16_t fill = 0)
        : width(w), height(h), bit_depth(depth), pixels(static_cast<std::size_t>(w) * h, fill) {}

    std::uint16_t at(std::uint32_t x, std::uint32_t y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::uint16_t& at(std::uint32_t x, std::uint32_t y) { return pixels[static_cast<std::size_t>(y) * width + x]; }

    std::uint32_t max_value() const { return (1u << bit_depth) - 1u; }

    void validate() const {
        if (bit_depth != 8 && bit_depth != 16)
            throw ValidationError("bit depth must be 8 or 16, got " + std::to_string(bit_depth));
        if (pixels.size() != static_cast<std::size_t>(width) * height)
            throw ValidationError("pixel count " + std::to_string(pixels.size()) + " does not match " +
                                  std::to_string(width) + "x" + std::to_string(height));
        const std::uint32_t limit = max_value();
        for (auto v : pixels)
            if (v > limit) throw ValidationError("intensity " + std::to_string(v) + " exceeds bit depth");
    }

    Image to_image() const {
        Image img(static_cast<int>(width), static_cast<int>(height));
        std::copy(pixels.begin(), pixels.end(), img.data.begin());
        return img;
    }

    friend bool operator==(const Frame&, const Frame&) = default;
};

/// Round-to-nearest with clamping into the frame's bit depth.
inline Frame quantize(const Image& img, std::uint8_t bit_depth) {
    Frame f(static_cast<std::uint32_t>(img.width), static_cast<std::uint32_t>(img.height), bit_depth);
    const double hi = static_cast<double>(f.max_value());
    for (std::size_t i = 0; i < img.data.size(); ++i)
        f.pixels[i] = static_cast<std::uint16_t>(std::clamp(std::nearbyint(img.data[i]), 0.0, hi));
    return f;
}

struct VideoClip {
    std::vector<Frame> frames;
    double fps = 20.0;
    std::string label;

    std::size_t size() const { return frames.size(); }
    bool empty() const { return frames.empty(); }
    std::uint32_t width() const { return frames.empty() ? 0 : frames.front().width; }
    std::uint32_t height() const { return frames.empty() ? 0 : frames.front().height; }
    std::uint8_t bit_depth() const { return frames.empty() ? 8 : frames.front().bit_depth; }
    double duration() const { return static_cast<double>(frames.size()) / fps; }

    void validate() const {
        if (!(fps > 0.0)) throw ValidationError("fps must be positive");
        for (std::size_t i = 0; i < frames.size(); ++i) {
            const Frame& f = frames[i];
            f.validate();
            if (f.width != width() || f.height != height() || f.bit_depth != bit_depth())
                throw ValidationError("frame " + std::to_string(i) + " differs in size or bit depth from frame 0");
        }
    }

    /// Pixel and timing content; the label is not part of the container.
    friend bool operator==(const VideoClip& a, const VideoClip& b) { return a.fps == b.fps && a.frames == b.frames; }
};

inline constexpr std::size_t kHeaderSize = 24;
inline constexpr std::array<char, 4> kMagic{'B', 'V', 'R', '1'};

namespace detail {

inline void put_u32(std::vector<char>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

inline std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

/// Writes via a sibling temp file and rename so readers never see partial output.
inline void write_atomic(const std::filesystem::path& path, const char* data, std::size_t n) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw IoError(path, "cannot open for writing");
        os.write(data, static_cast<std::streamsize>(n));
        if (!os) throw IoError(path, "write failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError(path, "rename failed");
    }
}

inline void write_atomic(const std::filesystem::path& path, const std::string& text) {
    write_atomic(path, text.data(), text.size());
}

inline std::vector<char> read_all(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError(path, "cannot open for reading");
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

} // namespace detail

inline std::vector<char> encode_clip(const VideoClip& clip) {
    clip.validate();
    if (clip.empty()) throw ValidationError("cannot encode a clip without frames");
    const std::size_t bytes_per_sample = clip.bit_depth() == 16 ? 2 : 1;
    const std::size_t frame_px = static_cast<std::size_t>(clip.width()) * clip.height();
    std::vector<char> out;
    out.reserve(kHeaderSize + clip.size() * frame_px * bytes_per_sample);
    out.insert(out.end(), kMagic.begin(), kMagic.end());
    detail::put_u32(out, clip.width());
    detail::put_u32(out, clip.height());
    detail::put_u32(out, static_cast<std::uint32_t>(clip.size()));
    out.push_back(static_cast<char>(clip.bit_depth()));
    detail::put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(clip.fps)));
    out.insert(out.end(), 3, '\0');
    for (const Frame& f : clip.frames) {
        for (std::uint16_t v : f.pixels) {
            out.push_back(static_cast<char>(v & 0xffu));
            if (bytes_per_sample == 2) out.push_back(static_cast<char>(v >> 8));
        }
    }
    return out;
}

inline VideoClip decode_clip(const std::vector<char>& bytes) {
    if (bytes.size() < kHeaderSize) throw FormatError("file shorter than the 24-byte header");
    if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) throw FormatError("bad magic, expected BVR1");
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::uint32_t width = detail::get_u32(p + 4);
    const std::uint32_t height = detail::get_u32(p + 8);
    const std::uint32_t count = detail::get_u32(p + 12);
    const std::uint8_t depth = p[16];
    const float fps = std::bit_cast<float>(detail::get_u32(p + 17));
    if (depth != 8 && depth != 16) throw FormatError("unsupported bit depth " + std::to_string(depth));
    if (width == 0 || height == 0) throw FormatError("zero frame dimension");
    if (!(fps > 0.0f) || !std::isfinite(fps)) throw FormatError("non-positive fps");
    if (p[21] != 0 || p[22] != 0 || p[23] != 0) throw FormatError("reserved header bytes are not zero");

    const std::size_t bps = depth == 16 ? 2 : 1;
    const std::size_t frame_px = static_cast<std::size_t>(width) * height;
    const std::size_t frame_bytes = frame_px * bps;
    const std::size_t payload = bytes.size() - kHeaderSize;
    if (payload / frame_bytes < count) throw TruncationError(payload / frame_bytes);
    if (payload != frame_bytes * count) throw FormatError("trailing bytes after the last frame");

    VideoClip clip;
    clip.fps = fps;
    clip.frames.reserve(count);
    const unsigned char* src = p + kHeaderSize;
    for (std::uint32_t i = 0; i < count; ++i) {
        Frame f(width, height, depth);
        if (bps == 1) {
            std::copy(src, src + frame_px, f.pixels.begin());
        } else {
            for (std::size_t k = 0; k < frame_px; ++k)
                f.pixels[k] = static_cast<std::uint16_t>(src[2 * k] | (src[2 * k + 1] << 8));
        }
        src += frame_bytes;
        clip.frames.push_back(std::move(f));
    }
    return clip;
}

inline void write_clip(const VideoClip& clip, const std::filesystem::path& path) {
    const auto bytes = encode_clip(clip);
    detail::write_atomic(path, bytes.data(), bytes.size());
}

inline VideoClip read_clip(const std::filesystem::path& path) {
    VideoClip clip = decode_clip(detail::read_all(path));
    clip.label = path.stem().string();
    return clip;
}

inline VideoClip slice(const VideoClip& clip, std::size_t start_frame, std::size_t len) {
    if (start_frame > clip.size() || len > clip.size() - start_frame)
        throw ValidationError("slice [" + std::to_string(start_frame) + ", +" + std::to_string(len) +
                              ") out of range for " + std::to_string(clip.size()) + " frames");
    VideoClip out;
    out.fps = clip.fps;
    out.label = clip.label;
    const auto first = clip.frames.begin() + static_cast<std::ptrdiff_t>(start_frame);
    out.frames.assign(first, first + static_cast<std::ptrdiff_t>(len));
    return out;
}

// ---------------------------------------------------------------------------
// Portable graymap (binary P5)

inline void write_pgm(const Frame& frame, const std::filesystem::path& path) {
    frame.validate();
    const std::uint32_t maxval = frame.max_value();
    std::string out = "P5\n" + std::to_string(frame.width) + " " + std::to_string(frame.height) + "\n" +
                      std::to_string(maxval) + "\n";
    for (std::uint16_t v : frame.pixels) {
        if (maxval > 255) out.push_back(static_cast<char>(v >> 8));
        out.push_back(static_cast<char>(v & 0xffu));
    }
    detail::write_atomic(path, out);
}

inline Frame read_pgm(const std::filesystem::path& path) {
    const auto bytes = detail::read_all(path);
    std::size_t pos = 0;
    auto skip_space = [&] {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto read_uint = [&]() -> std::uint32_t {
        skip_space();
        if (pos >= bytes.size() || !std::isdigit(static_cast<unsigned char>(bytes[pos])))
            throw FormatError(path.string() + ": malformed P5 header");
        std::uint64_t v = 0;
        while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
            v = v * 10 + static_cast<std::uint64_t>(bytes[pos++] - '0');
            if (v > 0xffffffffull) throw FormatError(path.string() + ": header value overflow");
        }
        return static_cast<std::uint32_t>(v);
    };
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw FormatError(path.string() + ": not a P5 graymap");
    pos = 2;
    const std::uint32_t w = read_uint();
    const std::uint32_t h = read_uint();
    const std::uint32_t maxval = read_uint();
    if (w == 0 || h == 0 || maxval == 0 || maxval > 65535) throw FormatError(path.string() + ": bad P5 header values");
    ++pos; // single whitespace before raster
    const std::size_t bps = maxval > 255 ? 2 : 1;
    const std::size_t need = static_cast<std::size_t>(w) * h * bps;
    if (bytes.size() < pos + need) throw FormatError(path.string() + ": raster truncated");
    Frame f(w, h, maxval > 255 ? 16 : 8);
    const auto* src = reinterpret_cast<const unsigned char*>(bytes.data()) + pos;
    for (std::size_t k = 0; k < f.pixels.size(); ++k)
        f.pixels[k] = bps == 1 ? src[k] : static_cast<std::uint16_t>((src[2 * k] << 8) | src[2 * k + 1]);
    return f;
}

/// Imports every *.pgm in `dir`, ordered by the integer embedded in each file stem.
inline VideoClip read_pgm_sequence(const std::filesystem::path& dir, double fps) {
    if (!(fps > 0.0)) throw ValidationError("fps must be positive");
    if (!std::filesystem::is_directory(dir)) throw IoError(dir, "not a directory");
    struct Entry {
        std::uint64_t index;
        std::filesystem::path path;
    };
    std::vector<Entry> entries;
    for (const auto& de : std::filesystem::directory_iterator(dir)) {
        if (!de.is_regular_file() || de.path().extension() != ".pgm") continue;
        const std::string stem = de.path().stem().string();
        std::string digits;
        for (char c : stem)
            if (std::isdigit(static_cast<unsigned char>(c))) digits.push_back(c);
        if (digits.empty()) throw FormatError(de.path().string() + ": file name carries no frame number");
        entries.push_back({std::stoull(digits), de.path()});
    }
    if (entries.empty()) throw DataError(dir.string() + ": no .pgm frames found");
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return a.index != b.index ? a.index < b.index : a.path < b.path;
    });
    VideoClip clip;
    clip.fps = fps;
    clip.label = dir.filename().string();
    for (const auto& e : entries) clip.frames.push_back(read_pgm(e.path));
    clip.validate();
    return clip;
}

} // namespace blurvitals::vidio
