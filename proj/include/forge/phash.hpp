#pragma once

#include <cstdint>

#include "forge/image.hpp"

namespace forge::dedup {

/// 64-bit perceptual hash: 32x32 grayscale resample, 2-D DCT, the top-left
/// 8x8 low-frequency block minus the constant term thresholded at its median
/// (63 bits), plus one sign bit comparing the DC coefficient against the
/// global mean intensity. Invariant to uniform brightness scaling.
struct PHash64 {
    std::uint64_t bits = 0;

    bool operator==(const PHash64&) const = default;
};

PHash64 phash(const image::Image& img);

/// Number of differing bits; a metric on PHash64.
int hamming_distance(PHash64 a, PHash64 b);

}  // namespace forge::dedup
