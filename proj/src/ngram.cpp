#include "forge/ngram.hpp"

#include <cmath>

namespace forge::filters {

const std::string NGramLM::kBos = "\x02<s>";

namespace {
constexpr char kSep = '\x1f';
}

NGramLM::NGramLM(std::size_t order, double smoothing_alpha)
    : order_(order), alpha_(smoothing_alpha) {
    if (order_ < 1) {
        throw ConfigInvalid("n-gram order must be >= 1");
    }
    if (alpha_ <= 0.0) {
        throw ConfigInvalid("smoothing alpha must be positive");
    }
}

void NGramLM::set_vocab_size(std::size_t vocab_size) {
    vocab_override_ = vocab_size;
}

std::size_t NGramLM::vocab_size() const {
    return vocab_override_ > 0 ? vocab_override_ : unigram_counts_.size();
}

void NGramLM::train(const std::vector<std::string>& tokens) {
    if (tokens.empty()) {
        return;
    }
    std::vector<std::string> padded(order_ - 1, kBos);
    padded.insert(padded.end(), tokens.begin(), tokens.end());

    for (std::size_t i = 0; i + order_ <= padded.size(); ++i) {
        std::string context;
        for (std::size_t k = i; k + 1 < i + order_; ++k) {
            context += padded[k];
            context += kSep;
        }
        const std::string& token = padded[i + order_ - 1];
        ++ngram_counts_[context + token];
        ++context_counts_[context];
        ++unigram_counts_[token];
    }
}

double NGramLM::probability(const std::vector<std::string>& context,
                            const std::string& token) const {
    // Use the trailing order-1 tokens, BOS-padding short contexts.
    const std::size_t need = order_ - 1;
    const std::size_t have = context.size() < need ? context.size() : need;
    std::string key;
    for (std::size_t pad = 0; pad < need - have; ++pad) {
        key += kBos;
        key += kSep;
    }
    for (std::size_t k = context.size() - have; k < context.size(); ++k) {
        key += context[k];
        key += kSep;
    }

    const double v = static_cast<double>(vocab_size());
    auto cit = context_counts_.find(key);
    const double context_count =
        cit == context_counts_.end() ? 0.0 : static_cast<double>(cit->second);
    auto nit = ngram_counts_.find(key + token);
    const double ngram_count =
        nit == ngram_counts_.end() ? 0.0 : static_cast<double>(nit->second);
    return (ngram_count + alpha_) / (context_count + alpha_ * v);
}

double NGramLM::perplexity(const std::vector<std::string>& tokens) const {
    if (tokens.empty()) {
        throw EmptyText("perplexity of empty token sequence");
    }
    if (vocab_size() == 0) {
        throw ConfigInvalid("model has no vocabulary; train it or set_vocab_size");
    }
    std::vector<std::string> context(order_ - 1, kBos);
    double log_sum = 0.0;
    for (const auto& token : tokens) {
        log_sum += std::log(probability(context, token));
        context.push_back(token);
    }
    return std::exp(-log_sum / static_cast<double>(tokens.size()));
}

}  // namespace forge::filters
