#include "forge/vision.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

namespace forge::vision {

TileLayout select_grid(int width, int height) {
    if (width < 1 || height < 1) {
        throw ConfigInvalid("image sides must be >= 1");
    }
    const double target = std::log(static_cast<double>(width) /
                                   static_cast<double>(height));
    int best_cols = 1;
    int best_rows = 1;
    double best_diff = std::numeric_limits<double>::infinity();
    for (int cols = 1; cols <= kMaxTiles; ++cols) {
        for (int rows = 1; cols * rows <= kMaxTiles; ++rows) {
            const double diff = std::abs(
                std::log(static_cast<double>(cols) / static_cast<double>(rows)) -
                target);
            const int count = cols * rows;
            const int best_count = best_cols * best_rows;
            bool better = diff < best_diff;
            if (diff == best_diff) {
                better = count < best_count ||
                         (count == best_count && cols > best_cols);
            }
            if (better) {
                best_diff = diff;
                best_cols = cols;
                best_rows = rows;
            }
        }
    }
    TileLayout layout;
    layout.grid_cols = best_cols;
    layout.grid_rows = best_rows;
    layout.n_tiles = best_cols * best_rows;
    layout.include_thumbnail = layout.n_tiles > 1;
    layout.token_count =
        kTokensPerTile * (layout.n_tiles + (layout.include_thumbnail ? 1 : 0));
    return layout;
}

std::vector<image::Image> tile_image(const image::Image& img,
                                     const TileLayout& layout) {
    const int full_w = layout.tile_px * layout.grid_cols;
    const int full_h = layout.tile_px * layout.grid_rows;
    const image::Image resized = image::resize_bilinear(img, full_w, full_h);

    std::vector<image::Image> tiles;
    tiles.reserve(static_cast<std::size_t>(layout.n_tiles) +
                  (layout.include_thumbnail ? 1 : 0));
    for (int gy = 0; gy < layout.grid_rows; ++gy) {
        for (int gx = 0; gx < layout.grid_cols; ++gx) {
            image::Image tile(layout.tile_px, layout.tile_px, img.channels());
            for (int y = 0; y < layout.tile_px; ++y) {
                for (int x = 0; x < layout.tile_px; ++x) {
                    for (int c = 0; c < img.channels(); ++c) {
                        tile.at(x, y, c) = resized.at(gx * layout.tile_px + x,
                                                      gy * layout.tile_px + y, c);
                    }
                }
            }
            tiles.push_back(std::move(tile));
        }
    }
    if (layout.include_thumbnail) {
        tiles.push_back(image::resize_bilinear(img, layout.tile_px, layout.tile_px));
    }
    return tiles;
}

double& FeatureGrid::at(int r, int c, int ch) {
    return data[(static_cast<std::size_t>(r) * cols + c) * channels + ch];
}

double FeatureGrid::at(int r, int c, int ch) const {
    return data[(static_cast<std::size_t>(r) * cols + c) * channels + ch];
}

FeatureGrid pixel_unshuffle(const FeatureGrid& grid) {
    if (grid.rows % 2 != 0 || grid.cols % 2 != 0) {
        throw OddGridSide("pixel unshuffle needs even grid sides, got " +
                          std::to_string(grid.rows) + "x" + std::to_string(grid.cols));
    }
    FeatureGrid out;
    out.rows = grid.rows / 2;
    out.cols = grid.cols / 2;
    out.channels = grid.channels * 4;
    out.data.assign(static_cast<std::size_t>(out.rows) * out.cols * out.channels, 0.0);
    for (int r = 0; r < out.rows; ++r) {
        for (int c = 0; c < out.cols; ++c) {
            for (int dy = 0; dy < 2; ++dy) {
                for (int dx = 0; dx < 2; ++dx) {
                    for (int ch = 0; ch < grid.channels; ++ch) {
                        out.at(r, c, (dy * 2 + dx) * grid.channels + ch) =
                            grid.at(2 * r + dy, 2 * c + dx, ch);
                    }
                }
            }
        }
    }
    return out;
}

FeatureGrid pixel_shuffle(const FeatureGrid& grid) {
    if (grid.channels % 4 != 0) {
        throw OddGridSide("pixel shuffle needs channels divisible by 4");
    }
    FeatureGrid out;
    out.rows = grid.rows * 2;
    out.cols = grid.cols * 2;
    out.channels = grid.channels / 4;
    out.data.assign(static_cast<std::size_t>(out.rows) * out.cols * out.channels, 0.0);
    for (int r = 0; r < grid.rows; ++r) {
        for (int c = 0; c < grid.cols; ++c) {
            for (int dy = 0; dy < 2; ++dy) {
                for (int dx = 0; dx < 2; ++dx) {
                    for (int ch = 0; ch < out.channels; ++ch) {
                        out.at(2 * r + dy, 2 * c + dx, ch) =
                            grid.at(r, c, (dy * 2 + dx) * out.channels + ch);
                    }
                }
            }
        }
    }
    return out;
}

void LowPassConfig::validate() const {
    if (removal_fraction < 0.015 || removal_fraction > 0.07) {
        throw FractionOutOfRange("removal_fraction must lie in [0.015, 0.07], got " +
                                 std::to_string(removal_fraction));
    }
}

namespace {

/// Orthonormal DCT-II basis rows for size n, cached per size.
const std::vector<double>& dct_basis(int n) {
    static std::map<int, std::vector<double>> cache;
    auto it = cache.find(n);
    if (it != cache.end()) {
        return it->second;
    }
    std::vector<double> basis(static_cast<std::size_t>(n) * n);
    for (int k = 0; k < n; ++k) {
        const double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
        for (int x = 0; x < n; ++x) {
            basis[static_cast<std::size_t>(k) * n + x] =
                scale * std::cos(std::numbers::pi * (x + 0.5) * k / n);
        }
    }
    return cache.emplace(n, std::move(basis)).first->second;
}

/// coeffs = B_h * X * B_w^T for one channel plane.
std::vector<double> forward_dct(const std::vector<double>& plane, int w, int h) {
    const auto& bw = dct_basis(w);
    const auto& bh = dct_basis(h);
    std::vector<double> rows(static_cast<std::size_t>(w) * h, 0.0);
    for (int y = 0; y < h; ++y) {
        for (int u = 0; u < w; ++u) {
            double acc = 0.0;
            for (int x = 0; x < w; ++x) {
                acc += bw[static_cast<std::size_t>(u) * w + x] *
                       plane[static_cast<std::size_t>(y) * w + x];
            }
            rows[static_cast<std::size_t>(y) * w + u] = acc;
        }
    }
    std::vector<double> coeffs(static_cast<std::size_t>(w) * h, 0.0);
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            double acc = 0.0;
            for (int y = 0; y < h; ++y) {
                acc += bh[static_cast<std::size_t>(v) * h + y] *
                       rows[static_cast<std::size_t>(y) * w + u];
            }
            coeffs[static_cast<std::size_t>(v) * w + u] = acc;
        }
    }
    return coeffs;
}

/// X = B_h^T * coeffs * B_w; exact inverse of forward_dct.
std::vector<double> inverse_dct(const std::vector<double>& coeffs, int w, int h) {
    const auto& bw = dct_basis(w);
    const auto& bh = dct_basis(h);
    std::vector<double> rows(static_cast<std::size_t>(w) * h, 0.0);
    for (int y = 0; y < h; ++y) {
        for (int u = 0; u < w; ++u) {
            double acc = 0.0;
            for (int v = 0; v < h; ++v) {
                acc += bh[static_cast<std::size_t>(v) * h + y] *
                       coeffs[static_cast<std::size_t>(v) * w + u];
            }
            rows[static_cast<std::size_t>(y) * w + u] = acc;
        }
    }
    std::vector<double> plane(static_cast<std::size_t>(w) * h, 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int u = 0; u < w; ++u) {
                acc += bw[static_cast<std::size_t>(u) * w + x] *
                       rows[static_cast<std::size_t>(y) * w + u];
            }
            plane[static_cast<std::size_t>(y) * w + x] = acc;
        }
    }
    return plane;
}

}  // namespace

std::vector<double> dct2(const image::Image& gray) {
    if (gray.channels() != 1) {
        throw ConfigInvalid("dct2 expects a single-channel image");
    }
    std::vector<double> plane(gray.data().begin(), gray.data().end());
    return forward_dct(plane, gray.width(), gray.height());
}

image::Image low_pass(const image::Image& img, const LowPassConfig& cfg) {
    cfg.validate();
    const int w = img.width();
    const int h = img.height();

    // Coefficients ranked by descending normalized radial frequency;
    // deterministic tie-break on (v, u).
    const std::size_t total = static_cast<std::size_t>(w) * h;
    std::vector<std::size_t> order(total);
    for (std::size_t i = 0; i < total; ++i) {
        order[i] = i;
    }
    auto radial = [&](std::size_t idx) {
        const double v = static_cast<double>(idx / static_cast<std::size_t>(w)) / h;
        const double u = static_cast<double>(idx % static_cast<std::size_t>(w)) / w;
        return u * u + v * v;
    };
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double ra = radial(a);
        const double rb = radial(b);
        if (ra != rb) {
            return ra > rb;
        }
        return a > b;
    });
    const auto n_zero = static_cast<std::size_t>(
        std::llround(cfg.removal_fraction * static_cast<double>(total)));

    image::Image out(w, h, img.channels());
    const bool fold_luma = cfg.luma_only && img.channels() == 3;
    const int planes = fold_luma ? 1 : img.channels();
    image::Image gray = fold_luma ? img.to_gray() : image::Image();

    for (int c = 0; c < planes; ++c) {
        std::vector<double> plane(total);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                plane[static_cast<std::size_t>(y) * w + x] =
                    fold_luma ? gray.at(x, y, 0) : img.at(x, y, c);
            }
        }
        auto coeffs = forward_dct(plane, w, h);
        for (std::size_t i = 0; i < n_zero && i < total; ++i) {
            coeffs[order[i]] = 0.0;
        }
        const auto restored = inverse_dct(coeffs, w, h);
        if (fold_luma) {
            // Apply the luma delta to all channels.
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    const auto idx = static_cast<std::size_t>(y) * w + x;
                    const double delta = restored[idx] - plane[idx];
                    for (int ch = 0; ch < img.channels(); ++ch) {
                        out.at(x, y, ch) =
                            static_cast<float>(img.at(x, y, ch) + delta);
                    }
                }
            }
        } else {
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    out.at(x, y, c) = static_cast<float>(
                        restored[static_cast<std::size_t>(y) * w + x]);
                }
            }
        }
    }
    return out;
}

}  // namespace forge::vision
