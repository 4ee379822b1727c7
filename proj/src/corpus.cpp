#include "forge/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace forge::corpus {

using nlohmann::json;

namespace {

constexpr std::string_view kImageTag = "<image>";
constexpr std::string_view kVideoTag = "<video>";

const char* kKnownFields[] = {"id",  "text", "images", "videos",       "labels",
                              "source", "url",  "meta",   "stage_history"};

bool is_known_field(const std::string& key) {
    return std::find(std::begin(kKnownFields), std::end(kKnownFields), key) !=
           std::end(kKnownFields);
}

json media_to_json(const MediaRef& m) {
    json j;
    j["locator"] = m.locator;
    if (m.width) j["width"] = *m.width;
    if (m.height) j["height"] = *m.height;
    return j;
}

MediaRef media_from_json(const json& j, MediaKind kind) {
    MediaRef m;
    m.kind = kind;
    m.locator = j.value("locator", "");
    if (j.contains("width")) m.width = j.at("width").get<int>();
    if (j.contains("height")) m.height = j.at("height").get<int>();
    return m;
}

}  // namespace

std::vector<const MediaRef*> SampleRecord::images() const {
    std::vector<const MediaRef*> out;
    for (const auto& m : media) {
        if (m.kind == MediaKind::kImage) out.push_back(&m);
    }
    return out;
}

std::vector<const MediaRef*> SampleRecord::videos() const {
    std::vector<const MediaRef*> out;
    for (const auto& m : media) {
        if (m.kind == MediaKind::kVideo) out.push_back(&m);
    }
    return out;
}

std::size_t count_placeholders(std::string_view text, MediaKind kind) {
    const std::string_view tag = kind == MediaKind::kImage ? kImageTag : kVideoTag;
    std::size_t count = 0;
    std::size_t pos = 0;
    while ((pos = text.find(tag, pos)) != std::string_view::npos) {
        ++count;
        pos += tag.size();
    }
    return count;
}

ParseOutcome parse_record(std::string_view line) {
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) {
        return {.record = std::nullopt,
                .error = ParseError::kMalformedRecord,
                .detail = "not a JSON object"};
    }

    SampleRecord rec;
    try {
        rec.id = j.value("id", "");
        rec.text = j.value("text", "");
        rec.source = j.value("source", "");
        if (j.contains("url") && !j.at("url").is_null()) {
            rec.url = j.at("url").get<std::string>();
        }
        for (const auto& img : j.value("images", json::array())) {
            rec.media.push_back(media_from_json(img, MediaKind::kImage));
        }
        for (const auto& vid : j.value("videos", json::array())) {
            rec.media.push_back(media_from_json(vid, MediaKind::kVideo));
        }
        if (j.contains("labels")) {
            for (const auto& [k, v] : j.at("labels").items()) {
                rec.labels[k] = v.is_string() ? v.get<std::string>() : v.dump();
            }
        }
        if (j.contains("meta")) {
            for (const auto& [k, v] : j.at("meta").items()) {
                rec.meta[k] = v.is_string() ? v.get<std::string>() : v.dump();
            }
        }
        for (const auto& s : j.value("stage_history", json::array())) {
            rec.stage_history.push_back(s.get<std::string>());
        }
        // Unknown top-level fields are preserved in meta so later pipeline
        // versions can round-trip records they do not understand.
        for (const auto& [k, v] : j.items()) {
            if (!is_known_field(k)) {
                rec.meta["x." + k] = v.is_string() ? v.get<std::string>() : v.dump();
            }
        }
    } catch (const json::exception& e) {
        return {.record = std::nullopt,
                .error = ParseError::kMalformedRecord,
                .detail = e.what()};
    }

    if (rec.id.empty()) {
        return {.record = std::nullopt,
                .error = ParseError::kMalformedRecord,
                .detail = "empty id"};
    }

    const std::size_t image_tags = count_placeholders(rec.text, MediaKind::kImage);
    const std::size_t video_tags = count_placeholders(rec.text, MediaKind::kVideo);
    const std::size_t image_refs = rec.images().size();
    const std::size_t video_refs = rec.videos().size();
    // Text-only records carry no placeholders; otherwise tags and refs must
    // reconcile per kind.
    if (image_tags != image_refs || video_tags != video_refs) {
        std::ostringstream detail;
        detail << "placeholders image=" << image_tags << "/" << image_refs
               << " video=" << video_tags << "/" << video_refs;
        return {.record = std::nullopt,
                .error = ParseError::kPlaceholderMismatch,
                .detail = detail.str()};
    }
    return {.record = std::move(rec), .error = std::nullopt, .detail = ""};
}

std::string serialize_record(const SampleRecord& record) {
    json j;
    j["id"] = record.id;
    j["text"] = record.text;
    json images = json::array();
    json videos = json::array();
    for (const auto& m : record.media) {
        (m.kind == MediaKind::kImage ? images : videos).push_back(media_to_json(m));
    }
    j["images"] = images;
    j["videos"] = videos;
    j["labels"] = record.labels;
    j["source"] = record.source;
    if (record.url) j["url"] = *record.url;
    j["meta"] = record.meta;
    j["stage_history"] = record.stage_history;
    return j.dump();
}

namespace {

std::filesystem::path manifest_path(const std::filesystem::path& shard) {
    auto p = shard;
    p += ".manifest.json";
    return p;
}

}  // namespace

ShardManifest write_shard(const std::filesystem::path& path,
                          const std::vector<SampleRecord>& records,
                          const std::string& stage) {
    std::string payload;
    for (const auto& rec : records) {
        payload += serialize_record(rec);
        payload += '\n';
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoFailure("cannot open shard for writing: " + path.string());
    }
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out) {
        throw IoFailure("short write on shard: " + path.string());
    }
    out.close();

    ShardManifest manifest;
    manifest.shard_id = path.filename().string();
    manifest.record_count = records.size();
    manifest.byte_size = payload.size();
    manifest.checksum = to_hex(fnv1a64(payload));
    manifest.stage = stage;

    json mj;
    mj["shard_id"] = manifest.shard_id;
    mj["record_count"] = manifest.record_count;
    mj["byte_size"] = manifest.byte_size;
    mj["checksum"] = manifest.checksum;
    mj["stage"] = manifest.stage;
    std::ofstream mout(manifest_path(path), std::ios::binary | std::ios::trunc);
    if (!mout) {
        throw IoFailure("cannot write manifest for " + path.string());
    }
    mout << mj.dump(2) << '\n';
    return manifest;
}

ShardManifest read_manifest(const std::filesystem::path& shard_path) {
    std::ifstream in(manifest_path(shard_path), std::ios::binary);
    if (!in) {
        throw IoFailure("missing manifest for " + shard_path.string());
    }
    json mj = json::parse(in, nullptr, false);
    if (mj.is_discarded()) {
        throw IoFailure("malformed manifest for " + shard_path.string());
    }
    ShardManifest manifest;
    manifest.shard_id = mj.value("shard_id", "");
    manifest.record_count = mj.value("record_count", std::uint64_t{0});
    manifest.byte_size = mj.value("byte_size", std::uint64_t{0});
    manifest.checksum = mj.value("checksum", "");
    manifest.stage = mj.value("stage", "");
    return manifest;
}

std::vector<SampleRecord> read_shard(const std::filesystem::path& path, bool verify) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoFailure("cannot open shard: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string payload = buf.str();

    if (verify) {
        const ShardManifest manifest = read_manifest(path);
        if (manifest.byte_size != payload.size() ||
            manifest.checksum != to_hex(fnv1a64(payload))) {
            throw IoFailure("shard checksum mismatch: " + path.string());
        }
    }

    std::vector<SampleRecord> records;
    std::size_t start = 0;
    std::size_t lineno = 0;
    while (start < payload.size()) {
        std::size_t end = payload.find('\n', start);
        if (end == std::string::npos) end = payload.size();
        ++lineno;
        const std::string_view line(payload.data() + start, end - start);
        if (!line.empty()) {
            ParseOutcome outcome = parse_record(line);
            if (!outcome.ok()) {
                throw IoFailure("invalid record at " + path.string() + ":" +
                                std::to_string(lineno) + " (" + outcome.detail + ")");
            }
            records.push_back(std::move(*outcome.record));
        }
        start = end + 1;
    }
    if (verify) {
        const ShardManifest manifest = read_manifest(path);
        if (manifest.record_count != records.size()) {
            throw IoFailure("shard record count mismatch: " + path.string());
        }
    }
    return records;
}

std::vector<std::filesystem::path> list_shards(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> shards;
    if (!std::filesystem::exists(dir)) {
        return shards;
    }
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
            shards.push_back(entry.path());
        }
    }
    std::sort(shards.begin(), shards.end());
    return shards;
}

}  // namespace forge::corpus
