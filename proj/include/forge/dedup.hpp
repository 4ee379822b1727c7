#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "forge/common.hpp"
#include "forge/corpus.hpp"
#include "forge/image.hpp"
#include "forge/minhash.hpp"
#include "forge/phash.hpp"

namespace forge::dedup {

class IndexParameterMismatch : public Error {
  public:
    explicit IndexParameterMismatch(const std::string& what) : Error(what) {}
};

struct DedupConfig {
    MinHashParams minhash;
    std::size_t bands = 16;
    std::size_t rows_per_band = 8;
    double jaccard_threshold = 0.8;
    int hamming_threshold = 8;

    void validate() const;
};

/// Everything dedup needs to know about one record.
struct RecordFeatures {
    std::string id;
    std::optional<std::string> url;
    std::optional<MinHashSignature> text_sig;
    std::vector<PHash64> image_hashes;
};

/// Signatures, pHashes and URLs of an existing corpus (baseline training set
/// or online eval set), queryable for matches against new records.
class DedupIndex {
  public:
    explicit DedupIndex(const DedupConfig& cfg);

    void add(const RecordFeatures& features);

    const DedupConfig& config() const { return cfg_; }
    std::size_t size() const { return count_; }

    /// Id owning this exact URL, if any.
    std::optional<std::string> url_match(const std::string& url) const;

    /// First indexed id whose signature clears the Jaccard threshold.
    /// LSH buckets only propose; the signature estimate decides.
    std::optional<std::string> text_match(const MinHashSignature& sig) const;

    /// First indexed id with an image within the Hamming threshold.
    std::optional<std::string> image_match(PHash64 hash) const;

    void save(const std::filesystem::path& dir) const;
    static DedupIndex load(const std::filesystem::path& dir);

  private:
    DedupConfig cfg_;
    std::size_t count_ = 0;
    LshIndex lsh_;
    std::map<std::string, MinHashSignature> signatures_;
    std::vector<std::pair<std::string, PHash64>> phashes_;  // insertion order
    std::map<std::string, std::string> urls_;               // url -> first id
};

struct DuplicatePair {
    std::string kept_id;
    std::string removed_id;
    std::string reason;  // url | text | image | leakage
};

struct DedupReport {
    std::uint64_t input_count = 0;
    std::uint64_t kept_count = 0;
    std::uint64_t url_dupes = 0;
    std::uint64_t text_dupes = 0;
    std::uint64_t image_dupes = 0;
    std::uint64_t leakage_hits = 0;
    std::vector<DuplicatePair> duplicate_pairs;
};

/// Removal precedence per record, first firing rule wins:
/// URL -> text LSH (Jaccard-verified) -> image pHash -> eval-set leakage.
/// Earliest-seen record wins within the new corpus; anything matching the
/// baseline or eval index is removed. Returns per-record keep flags.
std::pair<std::vector<bool>, DedupReport> dedup_corpus(
    const std::vector<RecordFeatures>& records, const DedupIndex* baseline,
    const DedupIndex* eval_index, const DedupConfig& cfg);

using ImageLoader =
    std::function<std::optional<image::Image>(const std::string& locator)>;

/// Extracts dedup features from a record: text signature over shingles of the
/// record text, pHash per loadable image, URL when present.
RecordFeatures features_for(const corpus::SampleRecord& record, const DedupConfig& cfg,
                            const ImageLoader& loader);

}  // namespace forge::dedup
