#include "forge/synth.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "forge/common.hpp"

namespace forge::synth {

namespace {

const char* kWords[] = {
    "product",  "poster",   "banner",   "stream",  "daily",   "feed",    "report",
    "account",  "message",  "channel",  "group",   "offer",   "promo",   "sale",
    "service",  "contact",  "image",    "layout",  "text",    "overlay", "corner",
    "detail",   "pattern",  "texture",  "scene",   "subject", "content", "review",
    "policy",   "standard", "evidence", "visible", "hidden",  "normal",  "sample"};

const char* kSources[] = {"feed", "backfill", "open-web", "partner"};

std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return splitmix64(seed ^ splitmix64(a + 0x9e3779b97f4a7c15ULL * (b + 1)));
}

}  // namespace

std::string make_sentence(std::uint64_t seed, std::size_t words) {
    std::ostringstream out;
    for (std::size_t i = 0; i < words; ++i) {
        if (i > 0) {
            out << ' ';
        }
        out << kWords[mix(seed, i) % std::size(kWords)];
    }
    return out.str();
}

image::Image make_image(std::uint64_t seed, int width, int height, int channels) {
    image::Image img(width, height, channels);
    const double fx = 1.0 + static_cast<double>(mix(seed, 1) % 5);
    const double fy = 1.0 + static_cast<double>(mix(seed, 2) % 5);
    const double phase = static_cast<double>(mix(seed, 3) % 628) / 100.0;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double u = static_cast<double>(x) / width;
            const double v = static_cast<double>(y) / height;
            for (int c = 0; c < channels; ++c) {
                const double wave =
                    std::sin(fx * 6.28318 * u + phase + c) *
                    std::cos(fy * 6.28318 * v - phase);
                const double value = 127.5 + 80.0 * wave + 40.0 * (u - v);
                img.at(x, y, c) = static_cast<float>(std::clamp(value, 0.0, 255.0));
            }
        }
    }
    return img;
}

std::vector<corpus::SampleRecord> generate(const SynthConfig& cfg) {
    if (!cfg.media_dir.empty()) {
        std::filesystem::create_directories(cfg.media_dir);
    }
    std::vector<corpus::SampleRecord> records;
    records.reserve(cfg.count);

    for (std::size_t i = 0; i < cfg.count; ++i) {
        corpus::SampleRecord rec;
        std::ostringstream id;
        id << "syn-" << std::setw(6) << std::setfill('0') << i;
        rec.id = id.str();
        rec.source = kSources[mix(cfg.seed, i, 1) % std::size(kSources)];

        const double dup_u = hash_to_unit(mix(cfg.seed, i, 2));
        const bool duplicate = i > 0 && dup_u < cfg.dup_fraction;
        const std::size_t dup_of = duplicate ? mix(cfg.seed, i, 3) % i : 0;

        if (duplicate) {
            // Exact text copy of an earlier record (id differs).
            rec.text = records[dup_of].text;
            rec.url = records[dup_of].url;
            rec.media = records[dup_of].media;
        } else {
            const std::size_t words = 8 + mix(cfg.seed, i, 4) % 25;
            rec.text = make_sentence(mix(cfg.seed, i, 5), words);
            if (hash_to_unit(mix(cfg.seed, i, 6)) < cfg.garbled_fraction) {
                // Garbled suffix of improbable token pairs.
                std::ostringstream noise;
                for (int k = 0; k < 12; ++k) {
                    noise << ' ' << "zq" << mix(cfg.seed, i, 40 + k) % 100000;
                }
                rec.text += noise.str();
            }
            if (hash_to_unit(mix(cfg.seed, i, 7)) < cfg.url_fraction) {
                rec.url = "https://example.test/item/" +
                          std::to_string(mix(cfg.seed, i, 8) % 1000000);
            }
            if (hash_to_unit(mix(cfg.seed, i, 9)) < cfg.image_fraction) {
                const int span = cfg.image_max_px - cfg.image_min_px + 1;
                const int w = cfg.image_min_px +
                              static_cast<int>(mix(cfg.seed, i, 10) % span);
                const int h = cfg.image_min_px +
                              static_cast<int>(mix(cfg.seed, i, 11) % span);
                corpus::MediaRef ref;
                ref.kind = corpus::MediaKind::kImage;
                ref.locator = rec.id + ".ppm";
                ref.width = w;
                ref.height = h;
                if (!cfg.media_dir.empty()) {
                    image::write_pnm(cfg.media_dir / ref.locator,
                                     make_image(mix(cfg.seed, i, 12), w, h));
                }
                rec.media.push_back(ref);
                rec.text += " <image>";
            }
        }
        rec.labels["category"] =
            hash_to_unit(mix(cfg.seed, i, 13)) < 0.5 ? "normal" : "ad";
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace forge::synth
