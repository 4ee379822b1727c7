#include "forge/dedup.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "forge/text.hpp"

namespace forge::dedup {

using nlohmann::json;

void DedupConfig::validate() const {
    if (bands * rows_per_band != minhash.num_hashes) {
        throw ConfigInvalid("bands*rows_per_band must equal num_hashes");
    }
    if (jaccard_threshold < 0.0 || jaccard_threshold > 1.0) {
        throw ConfigInvalid("jaccard_threshold must lie in [0,1]");
    }
    if (hamming_threshold < 0 || hamming_threshold > 64) {
        throw ConfigInvalid("hamming_threshold must lie in [0,64]");
    }
}

DedupIndex::DedupIndex(const DedupConfig& cfg)
    : cfg_(cfg), lsh_(cfg.bands, cfg.rows_per_band) {
    cfg_.validate();
}

void DedupIndex::add(const RecordFeatures& features) {
    ++count_;
    if (features.url && !features.url->empty()) {
        urls_.emplace(*features.url, features.id);  // first id wins
    }
    if (features.text_sig) {
        if (features.text_sig->seed != cfg_.minhash.seed ||
            features.text_sig->values.size() != cfg_.minhash.num_hashes) {
            throw IndexParameterMismatch("signature parameters do not match index");
        }
        lsh_.insert(features.id, *features.text_sig);
        signatures_.emplace(features.id, *features.text_sig);
    }
    for (PHash64 hash : features.image_hashes) {
        phashes_.emplace_back(features.id, hash);
    }
}

std::optional<std::string> DedupIndex::url_match(const std::string& url) const {
    auto it = urls_.find(url);
    if (it == urls_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<std::string> DedupIndex::text_match(const MinHashSignature& sig) const {
    for (const auto& id : lsh_.candidates(sig)) {
        const auto& candidate = signatures_.at(id);
        if (estimate_jaccard(sig, candidate) >= cfg_.jaccard_threshold) {
            return id;
        }
    }
    return std::nullopt;
}

std::optional<std::string> DedupIndex::image_match(PHash64 hash) const {
    for (const auto& [id, candidate] : phashes_) {
        if (hamming_distance(hash, candidate) <= cfg_.hamming_threshold) {
            return id;
        }
    }
    return std::nullopt;
}

std::pair<std::vector<bool>, DedupReport> dedup_corpus(
    const std::vector<RecordFeatures>& records, const DedupIndex* baseline,
    const DedupIndex* eval_index, const DedupConfig& cfg) {
    cfg.validate();
    for (const DedupIndex* index : {baseline, eval_index}) {
        if (index != nullptr &&
            (index->config().minhash != cfg.minhash ||
             index->config().bands != cfg.bands ||
             index->config().rows_per_band != cfg.rows_per_band)) {
            throw IndexParameterMismatch(
                "baseline/eval index built with different hash parameters");
        }
    }

    DedupIndex kept_index(cfg);
    std::vector<bool> keep_flags(records.size(), false);
    DedupReport report;
    report.input_count = records.size();

    auto match_in = [](const DedupIndex& index, const RecordFeatures& rec)
        -> std::optional<std::pair<std::string, std::string>> {
        if (rec.url && !rec.url->empty()) {
            if (auto id = index.url_match(*rec.url)) {
                return std::make_pair(*id, std::string("url"));
            }
        }
        if (rec.text_sig) {
            if (auto id = index.text_match(*rec.text_sig)) {
                return std::make_pair(*id, std::string("text"));
            }
        }
        for (PHash64 hash : rec.image_hashes) {
            if (auto id = index.image_match(hash)) {
                return std::make_pair(*id, std::string("image"));
            }
        }
        return std::nullopt;
    };

    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& rec = records[i];

        // Rule precedence across the kept corpus and the baseline set.
        std::optional<std::pair<std::string, std::string>> hit;
        if (rec.url && !rec.url->empty()) {
            if (auto id = kept_index.url_match(*rec.url)) {
                hit = {*id, "url"};
            } else if (baseline != nullptr) {
                if (auto bid = baseline->url_match(*rec.url)) {
                    hit = {*bid, "url"};
                }
            }
        }
        if (!hit && rec.text_sig) {
            if (auto id = kept_index.text_match(*rec.text_sig)) {
                hit = {*id, "text"};
            } else if (baseline != nullptr) {
                if (auto bid = baseline->text_match(*rec.text_sig)) {
                    hit = {*bid, "text"};
                }
            }
        }
        if (!hit) {
            for (PHash64 hash : rec.image_hashes) {
                if (auto id = kept_index.image_match(hash)) {
                    hit = {*id, "image"};
                    break;
                }
                if (baseline != nullptr) {
                    if (auto bid = baseline->image_match(hash)) {
                        hit = {*bid, "image"};
                        break;
                    }
                }
            }
        }
        if (!hit && eval_index != nullptr) {
            if (auto leak = match_in(*eval_index, rec)) {
                hit = {leak->first, "leakage"};
            }
        }

        if (!hit) {
            keep_flags[i] = true;
            ++report.kept_count;
            kept_index.add(rec);
            continue;
        }
        const auto& [kept_id, reason] = *hit;
        if (reason == "url") {
            ++report.url_dupes;
        } else if (reason == "text") {
            ++report.text_dupes;
        } else if (reason == "image") {
            ++report.image_dupes;
        } else {
            ++report.leakage_hits;
        }
        report.duplicate_pairs.push_back({kept_id, rec.id, reason});
    }
    return {std::move(keep_flags), std::move(report)};
}

RecordFeatures features_for(const corpus::SampleRecord& record, const DedupConfig& cfg,
                            const ImageLoader& loader) {
    RecordFeatures features;
    features.id = record.id;
    features.url = record.url;
    const auto shingle_set = shingles(record.text, cfg.minhash.shingle_width);
    if (!shingle_set.empty()) {
        features.text_sig =
            minhash_signature(shingle_set, cfg.minhash.num_hashes, cfg.minhash.seed);
    }
    if (loader) {
        for (const auto* ref : record.images()) {
            if (auto img = loader(ref->locator)) {
                features.image_hashes.push_back(phash(*img));
            }
        }
    }
    return features;
}

// ---------------------------------------------------------------------------
// Index directory format: index.json header, one bucket file per band,
// signatures, pHash table and URL table. Versioned so stale layouts fail
// loudly instead of silently mismatching.
// ---------------------------------------------------------------------------

namespace {
constexpr int kIndexVersion = 1;
}

void DedupIndex::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    json header;
    header["version"] = kIndexVersion;
    header["bands"] = cfg_.bands;
    header["rows_per_band"] = cfg_.rows_per_band;
    header["num_hashes"] = cfg_.minhash.num_hashes;
    header["seed"] = cfg_.minhash.seed;
    header["shingle_width"] = cfg_.minhash.shingle_width;
    header["jaccard_threshold"] = cfg_.jaccard_threshold;
    header["hamming_threshold"] = cfg_.hamming_threshold;
    header["count"] = count_;
    {
        std::ofstream out(dir / "index.json", std::ios::trunc);
        if (!out) {
            throw IoFailure("cannot write index header in " + dir.string());
        }
        out << header.dump(2) << '\n';
    }

    // One file per band; rebuilt from signatures on load, kept on disk for
    // inspection and streaming consumers.
    std::vector<std::ofstream> band_files;
    for (std::size_t b = 0; b < cfg_.bands; ++b) {
        std::ostringstream name;
        name << "band_" << b << ".tsv";
        band_files.emplace_back(dir / name.str(), std::ios::trunc);
    }
    std::ofstream sig_out(dir / "signatures.tsv", std::ios::trunc);
    for (const auto& [id, sig] : signatures_) {
        sig_out << id;
        for (std::uint64_t v : sig.values) {
            sig_out << '\t' << to_hex(v);
        }
        sig_out << '\n';
        for (std::size_t b = 0; b < cfg_.bands; ++b) {
            std::uint64_t h = kFnvOffset ^ splitmix64(b + 1);
            for (std::size_t r = b * cfg_.rows_per_band; r < (b + 1) * cfg_.rows_per_band;
                 ++r) {
                const std::uint64_t v = sig.values[r];
                h = fnv1a64(std::string_view(reinterpret_cast<const char*>(&v),
                                             sizeof(v)),
                            h);
            }
            band_files[b] << to_hex(h) << '\t' << id << '\n';
        }
    }

    std::ofstream phash_out(dir / "phash.tsv", std::ios::trunc);
    for (const auto& [id, hash] : phashes_) {
        phash_out << id << '\t' << to_hex(hash.bits) << '\n';
    }
    std::ofstream url_out(dir / "urls.tsv", std::ios::trunc);
    for (const auto& [url, id] : urls_) {
        url_out << id << '\t' << url << '\n';
    }
}

DedupIndex DedupIndex::load(const std::filesystem::path& dir) {
    std::ifstream in(dir / "index.json");
    if (!in) {
        throw IoFailure("missing index header in " + dir.string());
    }
    json header = json::parse(in, nullptr, false);
    if (header.is_discarded() || header.value("version", 0) != kIndexVersion) {
        throw IoFailure("unsupported index version in " + dir.string());
    }
    DedupConfig cfg;
    cfg.bands = header.value("bands", std::size_t{16});
    cfg.rows_per_band = header.value("rows_per_band", std::size_t{8});
    cfg.minhash.num_hashes = header.value("num_hashes", std::size_t{128});
    cfg.minhash.seed = header.value("seed", std::uint64_t{0});
    cfg.minhash.shingle_width = header.value("shingle_width", std::size_t{5});
    cfg.jaccard_threshold = header.value("jaccard_threshold", 0.8);
    cfg.hamming_threshold = header.value("hamming_threshold", 8);

    DedupIndex index(cfg);

    std::map<std::string, RecordFeatures> features;
    std::ifstream sig_in(dir / "signatures.tsv");
    std::string line;
    while (sig_in && std::getline(sig_in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string id;
        row >> id;
        MinHashSignature sig;
        sig.seed = cfg.minhash.seed;
        std::string hex;
        while (row >> hex) {
            sig.values.push_back(std::stoull(hex, nullptr, 16));
        }
        features[id].id = id;
        features[id].text_sig = std::move(sig);
    }
    std::ifstream phash_in(dir / "phash.tsv");
    std::vector<std::pair<std::string, PHash64>> hash_rows;
    while (phash_in && std::getline(phash_in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string id, hex;
        row >> id >> hex;
        features[id].id = id;
        hash_rows.emplace_back(id, PHash64{std::stoull(hex, nullptr, 16)});
    }
    std::ifstream url_in(dir / "urls.tsv");
    while (url_in && std::getline(url_in, line)) {
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) continue;
        const std::string id = line.substr(0, tab);
        features[id].id = id;
        features[id].url = line.substr(tab + 1);
    }
    for (auto& [id, hash] : hash_rows) {
        features[id].image_hashes.push_back(hash);
    }
    for (const auto& [id, f] : features) {
        index.add(f);
    }
    return index;
}

}  // namespace forge::dedup
