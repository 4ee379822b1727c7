#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "forge/corpus.hpp"
#include "forge/synth.hpp"

using namespace forge;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
    const auto dir = fs::temp_directory_path() / ("forge_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("parse_record reconciles placeholders") {
    SUBCASE("matching image placeholder") {
        const auto outcome = corpus::parse_record(
            R"({"id":"a","text":"look <image> here","images":[{"locator":"x.ppm"}]})");
        REQUIRE(outcome.ok());
        CHECK(outcome.record->media.size() == 1);
    }
    SUBCASE("two placeholders one ref rejects") {
        const auto outcome = corpus::parse_record(
            R"({"id":"a","text":"<image><image>","images":[{"locator":"x.ppm"}]})");
        CHECK_FALSE(outcome.ok());
        CHECK(outcome.error == corpus::ParseError::kPlaceholderMismatch);
    }
    SUBCASE("text-only record valid") {
        const auto outcome = corpus::parse_record(R"({"id":"a","text":"plain"})");
        REQUIRE(outcome.ok());
        CHECK(outcome.record->media.empty());
    }
    SUBCASE("video and image placeholders may co-occur") {
        const auto outcome = corpus::parse_record(
            R"({"id":"a","text":"<image> and <video>","images":[{"locator":"i"}],)"
            R"("videos":[{"locator":"v"}]})");
        REQUIRE(outcome.ok());
        CHECK(outcome.record->images().size() == 1);
        CHECK(outcome.record->videos().size() == 1);
    }
    SUBCASE("garbage line is malformed, not a crash") {
        const auto outcome = corpus::parse_record("not json at all");
        CHECK_FALSE(outcome.ok());
        CHECK(outcome.error == corpus::ParseError::kMalformedRecord);
    }
    SUBCASE("empty id is malformed") {
        const auto outcome = corpus::parse_record(R"({"text":"x"})");
        CHECK_FALSE(outcome.ok());
    }
    SUBCASE("unknown fields survive in meta") {
        const auto outcome =
            corpus::parse_record(R"({"id":"a","text":"t","custom_field":"kept"})");
        REQUIRE(outcome.ok());
        CHECK(outcome.record->meta.at("x.custom_field") == "kept");
    }
}

TEST_CASE("shard write/read round trip") {
    const auto dir = temp_dir("corpus_rt");

    std::vector<corpus::SampleRecord> records;
    SUBCASE("empty shard") {
        const auto manifest = corpus::write_shard(dir / "s.jsonl", records, "t");
        CHECK(manifest.record_count == 0);
        CHECK(corpus::read_shard(dir / "s.jsonl").empty());
    }
    SUBCASE("three records round trip") {
        for (int i = 0; i < 3; ++i) {
            corpus::SampleRecord rec;
            rec.id = "r" + std::to_string(i);
            rec.text = "body <image>";
            rec.media.push_back({corpus::MediaKind::kImage,
                                 "img" + std::to_string(i) + ".ppm", 448, 448});
            rec.labels["category"] = "normal";
            rec.source = "unit";
            rec.url = "https://example.test/" + std::to_string(i);
            rec.meta["k"] = "v";
            rec.stage_history = {"raw"};
            records.push_back(rec);
        }
        const auto manifest = corpus::write_shard(dir / "s.jsonl", records, "t");
        CHECK(manifest.record_count == 3);
        const auto back = corpus::read_shard(dir / "s.jsonl");
        CHECK(back == records);

        // Identical input sequence produces identical bytes.
        const auto manifest2 = corpus::write_shard(dir / "s2.jsonl", records, "t");
        CHECK(manifest2.checksum == manifest.checksum);
        CHECK(manifest2.byte_size == manifest.byte_size);
    }
    SUBCASE("checksum verification catches corruption") {
        corpus::SampleRecord rec;
        rec.id = "x";
        rec.text = "body";
        records.push_back(rec);
        corpus::write_shard(dir / "s.jsonl", records, "t");
        // Corrupt the id byte; the line stays structurally valid JSON.
        std::fstream f(dir / "s.jsonl", std::ios::in | std::ios::out);
        f.seekp(7);
        f.put('!');
        f.close();
        CHECK_THROWS_AS(corpus::read_shard(dir / "s.jsonl"), IoFailure);
        CHECK_NOTHROW(corpus::read_shard(dir / "s.jsonl", /*verify=*/false));
    }
}

TEST_CASE("round trip property on synthetic records") {
    const auto dir = temp_dir("corpus_prop");
    synth::SynthConfig cfg;
    cfg.count = 200;
    cfg.seed = 7;
    cfg.image_fraction = 0.4;  // media refs without files
    const auto records = synth::generate(cfg);
    corpus::write_shard(dir / "p.jsonl", records, "t");
    CHECK(corpus::read_shard(dir / "p.jsonl") == records);

    // Placeholder conservation on every accepted record.
    for (const auto& rec : records) {
        CHECK(corpus::count_placeholders(rec.text, corpus::MediaKind::kImage) ==
              rec.images().size());
        CHECK(corpus::count_placeholders(rec.text, corpus::MediaKind::kVideo) ==
              rec.videos().size());
    }
}
