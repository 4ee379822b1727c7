#include "forge/phash.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numbers>
#include <vector>

namespace forge::dedup {

namespace {

constexpr int kSide = 32;
constexpr int kBlock = 8;

/// Orthonormal DCT-II basis for the 32-point transform, computed once.
const std::array<std::array<double, kSide>, kSide>& dct_basis() {
    static const auto basis = [] {
        std::array<std::array<double, kSide>, kSide> m{};
        for (int k = 0; k < kSide; ++k) {
            const double scale =
                k == 0 ? std::sqrt(1.0 / kSide) : std::sqrt(2.0 / kSide);
            for (int n = 0; n < kSide; ++n) {
                m[k][n] = scale * std::cos(std::numbers::pi * (n + 0.5) * k / kSide);
            }
        }
        return m;
    }();
    return basis;
}

}  // namespace

PHash64 phash(const image::Image& img) {
    const image::Image small = image::resize_bilinear(img.to_gray(), kSide, kSide);

    // Separable 2-D DCT: rows then columns.
    const auto& basis = dct_basis();
    std::array<std::array<double, kSide>, kSide> rows{};
    for (int y = 0; y < kSide; ++y) {
        for (int u = 0; u < kSide; ++u) {
            double acc = 0.0;
            for (int x = 0; x < kSide; ++x) {
                acc += basis[u][x] * static_cast<double>(small.at(x, y, 0));
            }
            rows[y][u] = acc;
        }
    }
    std::array<std::array<double, kSide>, kSide> coeffs{};
    for (int u = 0; u < kSide; ++u) {
        for (int v = 0; v < kSide; ++v) {
            double acc = 0.0;
            for (int y = 0; y < kSide; ++y) {
                acc += basis[v][y] * rows[y][u];
            }
            coeffs[v][u] = acc;  // coeffs[row frequency][column frequency]
        }
    }

    // 63 low-frequency coefficients (8x8 block minus DC), median threshold.
    std::vector<double> block;
    block.reserve(kBlock * kBlock - 1);
    for (int v = 0; v < kBlock; ++v) {
        for (int u = 0; u < kBlock; ++u) {
            if (u == 0 && v == 0) {
                continue;
            }
            block.push_back(coeffs[v][u]);
        }
    }
    std::vector<double> sorted = block;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double median = sorted[sorted.size() / 2];

    PHash64 hash;
    for (std::size_t i = 0; i < block.size(); ++i) {
        if (block[i] > median) {
            hash.bits |= std::uint64_t{1} << i;
        }
    }
    // Bit 63: DC against the global mean intensity. Both scale together under
    // uniform brightness changes, as does the median above.
    double mean = 0.0;
    for (int y = 0; y < kSide; ++y) {
        for (int x = 0; x < kSide; ++x) {
            mean += static_cast<double>(small.at(x, y, 0));
        }
    }
    mean /= kSide * kSide;
    if (coeffs[0][0] > mean) {
        hash.bits |= std::uint64_t{1} << 63;
    }
    return hash;
}

int hamming_distance(PHash64 a, PHash64 b) {
    return std::popcount(a.bits ^ b.bits);
}

}  // namespace forge::dedup
