#include "forge/filters.hpp"

#include <algorithm>

#include "forge/text.hpp"

namespace forge::filters {

void FilterConfig::validate() const {
    if (max_aspect_ratio <= 0.0 || min_short_edge <= 0 || max_perplexity <= 0.0) {
        throw ConfigInvalid("filter thresholds must be strictly positive");
    }
    if (safety_threshold < 0.0 || safety_threshold > 1.0) {
        throw ConfigInvalid("safety_threshold must lie in [0,1]");
    }
}

void FilterVerdict::reject(const std::string& reason, double score) {
    keep = false;
    reasons.push_back(reason);
    scores[reason] = score;
}

FilterVerdict heuristic_filter(const corpus::SampleRecord& record,
                               const FilterConfig& cfg) {
    cfg.validate();
    FilterVerdict verdict;
    for (const auto* image : record.images()) {
        if (!image->width || !image->height) {
            throw MissingDimensions("record " + record.id + " image '" +
                                    image->locator + "' has no dimensions");
        }
        const double w = *image->width;
        const double h = *image->height;
        const double aspect = std::max(w, h) / std::min(w, h);
        const double short_edge = std::min(w, h);

        const bool tall = h > w;
        if (aspect > cfg.max_aspect_ratio && !(cfg.long_image_exempt && tall)) {
            verdict.reject("aspect_ratio", aspect);
        }
        if (short_edge < cfg.min_short_edge) {
            verdict.reject("short_edge", short_edge);
        }
    }
    return verdict;
}

double text_perplexity(const NGramLM& lm, const std::string& text) {
    const auto tokens = text::tokenize(text);
    if (tokens.empty()) {
        throw EmptyText("record has no tokens");
    }
    return lm.perplexity(tokens);
}

FilterVerdict perplexity_filter(const corpus::SampleRecord& record, const NGramLM& lm,
                                const FilterConfig& cfg) {
    cfg.validate();
    FilterVerdict verdict;
    if (text::tokenize(record.text).empty()) {
        return verdict;  // nothing to judge; image-only records pass through
    }
    const double ppl = text_perplexity(lm, record.text);
    verdict.scores["perplexity"] = ppl;
    if (ppl > cfg.max_perplexity) {
        verdict.reject("perplexity", ppl);
    }
    return verdict;
}

FilterVerdict safety_filter(const corpus::SampleRecord& record,
                            const scorer::ScorerClient& client,
                            const FilterConfig& cfg) {
    cfg.validate();
    FilterVerdict verdict;
    const double risk = client.safety_score(record.id, record.text);
    verdict.scores["safety"] = risk;
    if (risk > cfg.safety_threshold) {
        verdict.reject("safety", risk);
    }
    return verdict;
}

}  // namespace forge::filters
