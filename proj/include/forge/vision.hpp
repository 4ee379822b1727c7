#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "forge/common.hpp"
#include "forge/image.hpp"

namespace forge::vision {

class OddGridSide : public Error {
  public:
    explicit OddGridSide(const std::string& what) : Error(what) {}
};

class FractionOutOfRange : public Error {
  public:
    explicit FractionOutOfRange(const std::string& what) : Error(what) {}
};

constexpr int kTilePx = 448;
constexpr int kMaxTiles = 12;
constexpr int kTokensPerTile = 256;

/// Chosen tiling grid for one image: n_tiles = cols x rows <= 12, a global
/// thumbnail whenever more than one tile is used, and the visual-token budget
/// of 256 per 448x448 input.
struct TileLayout {
    int grid_cols = 1;
    int grid_rows = 1;
    int tile_px = kTilePx;
    bool include_thumbnail = false;
    int n_tiles = 1;
    int token_count = kTokensPerTile;
};

/// Best-aspect grid: over all (c, r) with 1 <= c*r <= 12, minimize
/// |log(c/r) - log(w/h)|. Ties prefer fewer tiles (cheapest grid that
/// matches the aspect), then larger column count.
TileLayout select_grid(int width, int height);

/// Resizes to (448*cols) x (448*rows), cuts on the exact grid (row-major),
/// and appends the whole image resized to 448x448 as the thumbnail when the
/// layout asks for one.
std::vector<image::Image> tile_image(const image::Image& img, const TileLayout& layout);

/// Channel-last feature grid for the token-accounting path.
struct FeatureGrid {
    int rows = 0;
    int cols = 0;
    int channels = 0;
    std::vector<double> data;  // row-major, channel-interleaved

    double& at(int r, int c, int ch);
    double at(int r, int c, int ch) const;
    int positions() const { return rows * cols; }
};

/// Space-to-depth: folds each 2x2 spatial block into channel depth, halving
/// both grid sides and quartering the position count. A bijection on the
/// feature values; pixel_shuffle inverts it exactly.
FeatureGrid pixel_unshuffle(const FeatureGrid& grid);
FeatureGrid pixel_shuffle(const FeatureGrid& grid);

struct LowPassConfig {
    double removal_fraction = 0.03;
    bool luma_only = false;

    void validate() const;  // fraction must lie in [0.015, 0.07]
};

/// Frequency-domain cleanup: per channel, zero the highest radial-frequency
/// DCT coefficients until removal_fraction of the coefficient count is
/// cleared, then transform back. Deterministic for a given input.
image::Image low_pass(const image::Image& img, const LowPassConfig& cfg);

/// 2-D orthonormal DCT-II of a single-channel image, exposed for tests.
std::vector<double> dct2(const image::Image& gray);

}  // namespace forge::vision
