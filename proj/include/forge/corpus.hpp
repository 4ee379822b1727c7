#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "forge/common.hpp"

namespace forge::corpus {

enum class MediaKind { kImage, kVideo };

/// Reference to one media object carried by a record. Dimensions are filled
/// in once the media has been decoded (or probed from its file header).
struct MediaRef {
    MediaKind kind = MediaKind::kImage;
    std::string locator;
    std::optional<int> width;
    std::optional<int> height;

    bool operator==(const MediaRef&) const = default;
};

/// One multimodal corpus item. `text` may embed <image>/<video> placeholders;
/// an accepted record has exactly one placeholder per media ref of that kind.
struct SampleRecord {
    std::string id;
    std::string text;
    std::vector<MediaRef> media;
    std::map<std::string, std::string> labels;
    std::string source;
    std::optional<std::string> url;
    std::map<std::string, std::string> meta;
    std::vector<std::string> stage_history;

    bool operator==(const SampleRecord&) const = default;

    std::vector<const MediaRef*> images() const;
    std::vector<const MediaRef*> videos() const;
};

/// Sidecar metadata written next to every shard.
struct ShardManifest {
    std::string shard_id;
    std::uint64_t record_count = 0;
    std::uint64_t byte_size = 0;
    std::string checksum;  // fnv1a-64 hex of the shard bytes
    std::string stage;
};

enum class ParseError { kMalformedRecord, kPlaceholderMismatch };

/// Outcome of Stage-1 parsing: a validated record, or a rejection reason.
struct ParseOutcome {
    std::optional<SampleRecord> record;
    std::optional<ParseError> error;
    std::string detail;

    bool ok() const { return record.has_value(); }
};

std::size_t count_placeholders(std::string_view text, MediaKind kind);

/// Parses one serialized line into a validated record. Placeholder/media
/// count mismatches reject the record (Stage-1 semantics), they do not throw.
ParseOutcome parse_record(std::string_view line);

/// Serializes a record to a single line with the fixed field-name schema
/// (id, text, images, videos, labels, source, url, meta, stage_history).
/// Byte output is deterministic for a given record.
std::string serialize_record(const SampleRecord& record);

/// Writes one record per line plus a `<path>.manifest.json` sidecar.
ShardManifest write_shard(const std::filesystem::path& path,
                          const std::vector<SampleRecord>& records,
                          const std::string& stage);

/// Reads a shard back. With `verify`, checks byte size and checksum against
/// the manifest sidecar and throws IoFailure on mismatch.
std::vector<SampleRecord> read_shard(const std::filesystem::path& path, bool verify = true);

ShardManifest read_manifest(const std::filesystem::path& shard_path);

/// Shard files under `dir` matching the line-record extension, sorted by name
/// so every traversal order is deterministic.
std::vector<std::filesystem::path> list_shards(const std::filesystem::path& dir);

}  // namespace forge::corpus
