#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "forge/common.hpp"

namespace forge::filters {

class EmptyText : public Error {
  public:
    explicit EmptyText(const std::string& what) : Error(what) {}
};

/// Add-alpha smoothed n-gram language model over string tokens. Sequences are
/// padded with a BOS sentinel so every position sees a full-length context.
/// A trained model is immutable and shareable across workers.
class NGramLM {
  public:
    explicit NGramLM(std::size_t order = 3, double smoothing_alpha = 1.0);

    /// Accumulates counts from one token sequence.
    void train(const std::vector<std::string>& tokens);

    /// Overrides the vocabulary size (otherwise the number of distinct
    /// trained tokens). Needed for the untrained uniform model.
    void set_vocab_size(std::size_t vocab_size);

    /// P(token | context) under add-alpha smoothing; context is the
    /// preceding order-1 tokens, BOS-padded.
    double probability(const std::vector<std::string>& context,
                       const std::string& token) const;

    /// exp of the mean negative log-probability of the sequence.
    double perplexity(const std::vector<std::string>& tokens) const;

    std::size_t order() const { return order_; }
    std::size_t vocab_size() const;
    double smoothing_alpha() const { return alpha_; }

    static const std::string kBos;

  private:
    std::string context_key(const std::vector<std::string>& context,
                            std::size_t end) const;

    std::size_t order_;
    double alpha_;
    std::unordered_map<std::string, std::uint64_t> ngram_counts_;
    std::unordered_map<std::string, std::uint64_t> context_counts_;
    std::unordered_map<std::string, std::uint64_t> unigram_counts_;
    std::size_t vocab_override_ = 0;
};

}  // namespace forge::filters
