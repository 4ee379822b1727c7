#include "forge/minhash.hpp"

#include <algorithm>

#include "forge/text.hpp"

namespace forge::dedup {

std::set<std::string> shingles(std::string_view text, std::size_t width) {
    std::set<std::string> out;
    const auto cps = text::decode_utf8(text::compat_fold(text));
    if (cps.empty()) {
        return out;
    }
    if (cps.size() <= width) {
        out.insert(text::encode_utf8(cps));
        return out;
    }
    for (std::size_t i = 0; i + width <= cps.size(); ++i) {
        std::string shingle;
        for (std::size_t k = i; k < i + width; ++k) {
            shingle += text::encode_utf8(cps[k]);
        }
        out.insert(std::move(shingle));
    }
    return out;
}

MinHashSignature minhash_signature(const std::set<std::string>& shingle_set,
                                   std::size_t num_hashes, std::uint64_t seed) {
    if (shingle_set.empty()) {
        throw EmptyShingleSet("cannot sign an empty shingle set");
    }
    MinHashSignature sig;
    sig.seed = seed;
    sig.values.assign(num_hashes, ~std::uint64_t{0});

    // Per-function stream seeds derived once from the signature seed.
    std::vector<std::uint64_t> streams(num_hashes);
    std::uint64_t state = seed;
    for (auto& s : streams) {
        state = splitmix64(state);
        s = state;
    }
    for (const auto& shingle : shingle_set) {
        const std::uint64_t base = fnv1a64(shingle);
        for (std::size_t i = 0; i < num_hashes; ++i) {
            const std::uint64_t h = splitmix64(base ^ streams[i]);
            sig.values[i] = std::min(sig.values[i], h);
        }
    }
    return sig;
}

MinHashSignature text_signature(std::string_view text, const MinHashParams& params) {
    return minhash_signature(shingles(text, params.shingle_width), params.num_hashes,
                             params.seed);
}

double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b) {
    if (a.values.size() != b.values.size() || a.seed != b.seed) {
        throw SignatureMismatch("signatures differ in length or seed");
    }
    if (a.values.empty()) {
        throw SignatureMismatch("empty signatures");
    }
    std::size_t agree = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        if (a.values[i] == b.values[i]) {
            ++agree;
        }
    }
    return static_cast<double>(agree) / static_cast<double>(a.values.size());
}

LshIndex::LshIndex(std::size_t bands, std::size_t rows_per_band)
    : bands_(bands), rows_(rows_per_band) {
    if (bands_ == 0 || rows_ == 0) {
        throw ConfigInvalid("bands and rows_per_band must be positive");
    }
}

std::uint64_t LshIndex::band_hash(const MinHashSignature& signature,
                                  std::size_t band) const {
    std::uint64_t h = kFnvOffset ^ splitmix64(band + 1);
    for (std::size_t r = band * rows_; r < (band + 1) * rows_; ++r) {
        const std::uint64_t v = signature.values[r];
        h = fnv1a64(std::string_view(reinterpret_cast<const char*>(&v), sizeof(v)), h);
    }
    return h;
}

void LshIndex::insert(const std::string& id, const MinHashSignature& signature) {
    if (signature.values.size() != bands_ * rows_) {
        throw SignatureMismatch("signature length " +
                                std::to_string(signature.values.size()) +
                                " does not match bands*rows " +
                                std::to_string(bands_ * rows_));
    }
    if (!insert_order_.contains(id)) {
        insert_order_[id] = size_++;
    }
    for (std::size_t band = 0; band < bands_; ++band) {
        auto& bucket = buckets_[{band, band_hash(signature, band)}];
        // A record appears at most once per band bucket.
        if (std::find(bucket.begin(), bucket.end(), id) == bucket.end()) {
            bucket.push_back(id);
        }
    }
}

std::vector<std::string> LshIndex::candidates(const MinHashSignature& signature) const {
    if (signature.values.size() != bands_ * rows_) {
        throw SignatureMismatch("query signature does not match index layout");
    }
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (std::size_t band = 0; band < bands_; ++band) {
        auto it = buckets_.find({band, band_hash(signature, band)});
        if (it == buckets_.end()) {
            continue;
        }
        for (const auto& id : it->second) {
            if (seen.insert(id).second) {
                out.push_back(id);
            }
        }
    }
    std::sort(out.begin(), out.end(), [this](const auto& a, const auto& b) {
        return insert_order_.at(a) < insert_order_.at(b);
    });
    return out;
}

void LshIndex::merge(const LshIndex& other) {
    if (other.bands_ != bands_ || other.rows_ != rows_) {
        throw SignatureMismatch("cannot merge indices with different band layouts");
    }
    for (const auto& [key, ids] : other.buckets_) {
        auto& bucket = buckets_[key];
        for (const auto& id : ids) {
            if (std::find(bucket.begin(), bucket.end(), id) == bucket.end()) {
                bucket.push_back(id);
            }
        }
    }
    for (const auto& [id, _] : other.insert_order_) {
        if (!insert_order_.contains(id)) {
            insert_order_[id] = size_++;
        }
    }
}

}  // namespace forge::dedup
