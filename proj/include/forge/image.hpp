#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "forge/common.hpp"

namespace forge::image {

/// Planar float image, 1 (gray) or 3 (RGB) channels, values in [0,255].
/// Float pixels keep the tiling/low-pass chain exact until the final write.
class Image {
  public:
    Image() = default;
    Image(int width, int height, int channels, float fill = 0.0f);

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    bool empty() const { return data_.empty(); }

    float& at(int x, int y, int c);
    float at(int x, int y, int c) const;

    const std::vector<float>& data() const { return data_; }
    std::vector<float>& data() { return data_; }

    Image to_gray() const;

    bool operator==(const Image&) const = default;

  private:
    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<float> data_;  // row-major, channel-interleaved
};

/// Bilinear resample to the target size. Fixed kernel so outputs are
/// bit-stable across runs.
Image resize_bilinear(const Image& src, int out_width, int out_height);

/// Reads binary PGM (P5) or PPM (P6), 8-bit.
Image read_pnm(const std::filesystem::path& path);

/// Writes PGM for 1-channel images, PPM for 3-channel. Values rounded and
/// clamped to [0,255].
void write_pnm(const std::filesystem::path& path, const Image& img);

/// Parses width/height from a PNM header without decoding pixels.
struct PnmHeader {
    int width = 0;
    int height = 0;
    int channels = 0;
};
PnmHeader probe_pnm(const std::filesystem::path& path);

}  // namespace forge::image
