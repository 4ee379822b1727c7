#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "forge/common.hpp"

namespace forge::rewards {

/// Character-bag comparison between a predicted string and the ground-truth
/// violating text. Characters are compared as multisets of codepoints after
/// normalization (compatibility fold + whitespace stripping).
struct CharBagDiff {
    std::uint64_t n_pred = 0;    // predicted characters
    std::uint64_t n_gt = 0;      // ground-truth violating characters
    std::uint64_t n_halluc = 0;  // predicted but not in ground truth
    std::uint64_t n_miss = 0;    // in ground truth but not predicted

    bool operator==(const CharBagDiff&) const = default;
};

struct RewardBreakdown {
    double r_cls = 0.0;  // {0,1}
    double r_fmt = 0.0;  // {0,1}
    double r_ocr = 0.0;  // [0,1]
    double total = 0.0;  // r_cls + r_fmt + r_ocr
    CharBagDiff diff;
};

/// One sampled response inside a GRPO group, with its grading targets.
struct GroupSample {
    std::string response;
    std::string gold_label;
    std::string gold_violating_text;
};

struct GrpoConfig {
    std::size_t group_size = 8;
    double kl_beta = 0.01;
    double std_epsilon = 1e-8;
};

struct RewardConfig {
    bool normalize_bags = true;   // compat fold + strip whitespace before bagging
    bool binary_class = false;    // grade only the violation/Safe decision
    double weight_cls = 1.0;
    double weight_fmt = 1.0;
    double weight_ocr = 1.0;
};

class GroupSizeMismatch : public Error {
  public:
    explicit GroupSizeMismatch(const std::string& what) : Error(what) {}
};

/// Builds the normalized character multiset of a string.
std::map<char32_t, std::uint64_t> char_bag(std::string_view s, bool normalize = true);

/// Bag-similarity OCR reward: 1 - (halluc + miss) / max(pred, gt), clamped to
/// [0,1]. Both bags empty scores 1 with a zero diff.
std::pair<double, CharBagDiff> ocr_reward(std::string_view pred_text,
                                          std::string_view gold_text,
                                          bool normalize = true);

/// 1 iff the response carries the four blocks [Observation], [Extraction],
/// [Reasoning], [Conclusion] exactly once each, in order, and the conclusion
/// states Safe or a known violating category.
double format_reward(std::string_view response);

/// Label extracted from the [Conclusion] block, empty when unparseable.
/// Recognized shapes: "Safe" and "Violation (<category>)".
std::string extract_conclusion_label(std::string_view response);

/// Content of the [Extraction] block (up to the next block tag). Falls back
/// to the whole response when the block is absent, so OCR grading is total.
std::string_view extraction_text(std::string_view response);

/// 1 iff the conclusion label equals the gold label (or, in binary mode, iff
/// both sides agree on Safe vs violation).
double classification_reward(std::string_view response, std::string_view gold_label,
                             bool binary_mode = false);

RewardBreakdown total_reward(const GroupSample& sample, const RewardConfig& cfg = {});

/// Group-relative advantages: (r - mean) / (population std + epsilon).
std::vector<double> group_advantages(const std::vector<double>& rewards,
                                     const GrpoConfig& cfg);

/// Category lexicon accepted in [Conclusion] blocks.
const std::vector<std::string>& violating_categories();

}  // namespace forge::rewards
