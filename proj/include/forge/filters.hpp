#pragma once

#include <map>
#include <string>
#include <vector>

#include "forge/common.hpp"
#include "forge/corpus.hpp"
#include "forge/ngram.hpp"
#include "forge/scorer.hpp"

namespace forge::filters {

class MissingDimensions : public Error {
  public:
    explicit MissingDimensions(const std::string& what) : Error(what) {}
};

struct FilterConfig {
    double max_aspect_ratio = 4.0;
    int min_short_edge = 224;
    double max_perplexity = 1000.0;
    double safety_threshold = 0.5;
    bool long_image_exempt = true;

    void validate() const;
};

/// Verdict of one filter pass. keep == true implies reasons is empty.
struct FilterVerdict {
    bool keep = true;
    std::vector<std::string> reasons;
    std::map<std::string, double> scores;

    void reject(const std::string& reason, double score);
};

/// Stage-2 geometric heuristics: aspect-ratio and short-edge bounds on every
/// image ref. Tall images are exempt from the aspect rule when
/// long_image_exempt is set (long-image content is a real business class).
FilterVerdict heuristic_filter(const corpus::SampleRecord& record,
                               const FilterConfig& cfg);

/// Perplexity of the record text under the given model, using the pipeline
/// tokenizer (whitespace + per-CJK-character splitting).
double text_perplexity(const NGramLM& lm, const std::string& text);

/// Stage-2 perplexity gate.
FilterVerdict perplexity_filter(const corpus::SampleRecord& record, const NGramLM& lm,
                                const FilterConfig& cfg);

/// Safety-score interception via the scorer client. ScorerUnavailable
/// propagates so callers can quarantine the record instead of dropping it.
FilterVerdict safety_filter(const corpus::SampleRecord& record,
                            const scorer::ScorerClient& client, const FilterConfig& cfg);

}  // namespace forge::filters
