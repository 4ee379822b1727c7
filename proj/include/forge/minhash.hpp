#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "forge/common.hpp"

namespace forge::dedup {

class EmptyShingleSet : public Error {
  public:
    explicit EmptyShingleSet(const std::string& what) : Error(what) {}
};

class SignatureMismatch : public Error {
  public:
    explicit SignatureMismatch(const std::string& what) : Error(what) {}
};

struct MinHashParams {
    std::size_t num_hashes = 128;
    std::uint64_t seed = 0;
    std::size_t shingle_width = 5;  // codepoints, sliding window

    bool operator==(const MinHashParams&) const = default;
};

struct MinHashSignature {
    std::vector<std::uint64_t> values;  // length num_hashes
    std::uint64_t seed = 0;
};

/// Character shingles of the compat-folded text. Texts shorter than the
/// window yield the whole text as a single shingle.
std::set<std::string> shingles(std::string_view text, std::size_t width);

/// Position i holds min over shingles of the i-th hash function;
/// deterministic for a fixed seed.
MinHashSignature minhash_signature(const std::set<std::string>& shingle_set,
                                   std::size_t num_hashes, std::uint64_t seed);

MinHashSignature text_signature(std::string_view text, const MinHashParams& params);

/// Fraction of agreeing positions; unbiased estimator of Jaccard similarity.
double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b);

/// Banded signature index: similar signatures collide in at least one band
/// bucket with probability 1 - (1 - s^rows)^bands.
class LshIndex {
  public:
    LshIndex(std::size_t bands = 16, std::size_t rows_per_band = 8);

    void insert(const std::string& id, const MinHashSignature& signature);

    /// Ids sharing at least one band bucket with the signature, deduplicated,
    /// in insertion order.
    std::vector<std::string> candidates(const MinHashSignature& signature) const;

    std::size_t bands() const { return bands_; }
    std::size_t rows_per_band() const { return rows_; }
    std::size_t size() const { return size_; }

    /// Merges another index built with identical parameters; bucket contents
    /// are order-independent under merge.
    void merge(const LshIndex& other);

  private:
    std::uint64_t band_hash(const MinHashSignature& signature, std::size_t band) const;

    std::size_t bands_;
    std::size_t rows_;
    std::size_t size_ = 0;
    // (band, hash) -> ids, with per-id insertion sequence for stable ordering.
    std::map<std::pair<std::size_t, std::uint64_t>, std::vector<std::string>> buckets_;
    std::map<std::string, std::size_t> insert_order_;
};

}  // namespace forge::dedup
