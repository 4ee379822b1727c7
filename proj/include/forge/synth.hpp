#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "forge/corpus.hpp"
#include "forge/image.hpp"

namespace forge::synth {

/// Controls for the seeded synthetic corpus used by demos and the
/// end-to-end suite. Everything derives from the seed; two runs with the
/// same config produce identical records and identical image bytes.
struct SynthConfig {
    std::size_t count = 10000;
    std::uint64_t seed = 1;
    double dup_fraction = 0.10;    // planted exact/near duplicates
    double url_fraction = 0.5;
    double image_fraction = 0.3;
    double garbled_fraction = 0.02;  // rare-token noise lines
    int image_min_px = 224;
    int image_max_px = 512;
    std::filesystem::path media_dir;  // empty: records carry dims without files
};

/// Generates records (and image files when media_dir is set).
std::vector<corpus::SampleRecord> generate(const SynthConfig& cfg);

/// Seeded smooth test image: gradient plus low-frequency waves; pixel data is
/// a pure function of (seed, width, height).
image::Image make_image(std::uint64_t seed, int width, int height, int channels = 3);

/// Deterministic word-salad sentence of the given length.
std::string make_sentence(std::uint64_t seed, std::size_t words);

}  // namespace forge::synth
