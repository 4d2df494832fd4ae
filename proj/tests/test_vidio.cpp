#include <fstream>

#include <gtest/gtest.h>

#include <blurvitals/vidio.hpp>

#include "support.hpp"

using namespace blurvitals;
using namespace blurvitals::vidio;

namespace {

VideoClip ramp_clip(std::size_t n, std::uint32_t w, std::uint32_t h, std::uint8_t depth = 8) {
    VideoClip c;
    c.fps = 20.0;
    for (std::size_t k = 0; k < n; ++k) {
        Frame f(w, h, depth);
        for (std::size_t i = 0; i < f.pixels.size(); ++i)
            f.pixels[i] = static_cast<std::uint16_t>((i * 7 + k * 13) % (depth == 16 ? 65536 : 256));
        c.frames.push_back(f);
    }
    return c;
}

} // namespace

TEST(Vidio, RoundTripIsExact) {
    const auto dir = testsupport::scratch("vidio_rt");
    for (std::uint8_t depth : {8, 16}) {
        const VideoClip c = ramp_clip(5, 7, 3, depth);
        write_clip(c, dir / "a.bvr");
        EXPECT_EQ(read_clip(dir / "a.bvr"), c);
    }
}

TEST(Vidio, MinimalContainerBytes) {
    VideoClip c;
    Frame f(2, 2);
    f.pixels = {0, 1, 2, 3};
    c.frames.push_back(f);
    const auto bytes = encode_clip(c);
    // magic + width + height + count + depth + fps(f32) + 3 reserved
    ASSERT_EQ(bytes.size(), 4u + 4 + 4 + 4 + 1 + 4 + 3 + 4);
    EXPECT_EQ(bytes.size(), kHeaderSize + 4);
    const VideoClip back = decode_clip(bytes);
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(back.frames[0].pixels, (std::vector<std::uint16_t>{0, 1, 2, 3}));
    EXPECT_DOUBLE_EQ(back.fps, 20.0);
}

TEST(Vidio, WritesAreDeterministic) {
    const auto dir = testsupport::scratch("vidio_det");
    const VideoClip c = ramp_clip(4, 9, 5);
    write_clip(c, dir / "a.bvr");
    write_clip(c, dir / "b.bvr");
    EXPECT_EQ(testsupport::slurp(dir / "a.bvr"), testsupport::slurp(dir / "b.bvr"));
}

TEST(Vidio, TruncationNamesTheMissingFrame) {
    auto bytes = encode_clip(ramp_clip(10, 4, 4));
    bytes.resize(bytes.size() - 16);
    try {
        decode_clip(bytes);
        FAIL() << "expected truncation";
    } catch (const TruncationError& e) {
        EXPECT_EQ(e.frame_index(), 9u);
        EXPECT_NE(std::string(e.what()).find("frame 9"), std::string::npos);
    }
    bytes.resize(bytes.size() - 3); // partial frame 8
    try {
        decode_clip(bytes);
        FAIL() << "expected truncation";
    } catch (const TruncationError& e) {
        EXPECT_EQ(e.frame_index(), 8u);
    }
}

TEST(Vidio, CorruptHeaderIsFormatError) {
    auto bytes = encode_clip(ramp_clip(1, 4, 4));
    auto bad = bytes;
    bad[0] = 'X';
    EXPECT_THROW(decode_clip(bad), FormatError);
    bad = bytes;
    bad[16] = 12; // depth
    EXPECT_THROW(decode_clip(bad), FormatError);
    bad = bytes;
    bad.push_back(0);
    EXPECT_THROW(decode_clip(bad), FormatError);
    EXPECT_THROW(decode_clip(std::vector<char>(10)), FormatError);
}

TEST(Vidio, MixedFrameSizesRejectedBeforeWrite) {
    const auto dir = testsupport::scratch("vidio_mixed");
    VideoClip c = ramp_clip(2, 4, 4);
    c.frames.push_back(Frame(5, 4));
    EXPECT_THROW(write_clip(c, dir / "m.bvr"), ValidationError);
    EXPECT_FALSE(std::filesystem::exists(dir / "m.bvr"));
}

TEST(Vidio, OutOfRangeIntensityRejected) {
    VideoClip c = ramp_clip(1, 2, 2);
    c.frames[0].pixels[0] = 300;
    EXPECT_THROW(c.validate(), ValidationError);
}

TEST(Vidio, MissingFileIsIoError) {
    EXPECT_THROW(read_clip("/nonexistent/dir/clip.bvr"), IoError);
}

TEST(Vidio, Slice) {
    const VideoClip c = ramp_clip(6, 3, 3);
    EXPECT_EQ(slice(c, 0, c.size()), c);
    const VideoClip s = slice(c, 2, 3);
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s.frames[0], c.frames[2]);
    EXPECT_EQ(s.fps, c.fps);
    EXPECT_THROW(slice(c, 4, 3), ValidationError);
    EXPECT_THROW(slice(c, 7, 0), ValidationError);
}

TEST(Vidio, PgmRoundTripAndOrdering) {
    const auto dir = testsupport::scratch("vidio_pgm");
    const VideoClip c16 = ramp_clip(3, 5, 4, 16);
    for (std::size_t k = 0; k < c16.size(); ++k)
        write_pgm(c16.frames[k], dir / ("f" + std::to_string(k == 0 ? 10 : k) + ".pgm"));
    // f1, f2, f10: numeric order, not lexicographic
    const VideoClip seq = read_pgm_sequence(dir, 20.0);
    ASSERT_EQ(seq.size(), 3u);
    EXPECT_EQ(seq.frames[0], c16.frames[1]);
    EXPECT_EQ(seq.frames[1], c16.frames[2]);
    EXPECT_EQ(seq.frames[2], c16.frames[0]);
}

TEST(Vidio, PgmWithComment) {
    const auto dir = testsupport::scratch("vidio_pgm_comment");
    {
        std::ofstream os(dir / "x.pgm", std::ios::binary);
        os << "P5\n# made by hand\n2 1\n255\n";
        os.put(static_cast<char>(9));
        os.put(static_cast<char>(200));
    }
    const Frame f = read_pgm(dir / "x.pgm");
    EXPECT_EQ(f.width, 2u);
    EXPECT_EQ(f.pixels, (std::vector<std::uint16_t>{9, 200}));
}
