#include "forge/rewards.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "forge/text.hpp"

namespace forge::rewards {

namespace {

constexpr std::string_view kBlocks[] = {"[Observation]", "[Extraction]",
                                        "[Reasoning]", "[Conclusion]"};

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
    std::size_t count = 0;
    std::size_t pos = 0;
    while ((pos = haystack.find(needle, pos)) != std::string_view::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\n' ||
                          s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\n' ||
                          s.back() == '\r' || s.back() == '.')) {
        s.remove_suffix(1);
    }
    return s;
}

}  // namespace

const std::vector<std::string>& violating_categories() {
    static const std::vector<std::string> kCategories = {
        "ad",     "high-risk", "illegal", "porn",
        "vulgar", "other",     "off-platform diversion"};
    return kCategories;
}

std::map<char32_t, std::uint64_t> char_bag(std::string_view s, bool normalize) {
    std::map<char32_t, std::uint64_t> bag;
    for (char32_t raw : text::decode_utf8(s)) {
        const char32_t cp = normalize ? text::compat_fold(raw) : raw;
        if (normalize && text::is_space(cp)) {
            continue;
        }
        ++bag[cp];
    }
    return bag;
}

std::pair<double, CharBagDiff> ocr_reward(std::string_view pred_text,
                                          std::string_view gold_text, bool normalize) {
    const auto pred = char_bag(pred_text, normalize);
    const auto gold = char_bag(gold_text, normalize);

    CharBagDiff diff;
    for (const auto& [cp, n] : pred) {
        diff.n_pred += n;
        auto it = gold.find(cp);
        const std::uint64_t g = it == gold.end() ? 0 : it->second;
        diff.n_halluc += n > g ? n - g : 0;
    }
    for (const auto& [cp, n] : gold) {
        diff.n_gt += n;
        auto it = pred.find(cp);
        const std::uint64_t p = it == pred.end() ? 0 : it->second;
        diff.n_miss += n > p ? n - p : 0;
    }

    if (diff.n_pred == 0 && diff.n_gt == 0) {
        return {1.0, diff};
    }
    const double denom = static_cast<double>(std::max(diff.n_pred, diff.n_gt));
    const double raw = 1.0 - static_cast<double>(diff.n_halluc + diff.n_miss) / denom;
    return {std::clamp(raw, 0.0, 1.0), diff};
}

double format_reward(std::string_view response) {
    std::size_t cursor = 0;
    for (std::string_view block : kBlocks) {
        if (count_occurrences(response, block) != 1) {
            return 0.0;
        }
        const std::size_t pos = response.find(block, cursor);
        if (pos == std::string_view::npos) {
            return 0.0;  // present but before the previous block
        }
        cursor = pos + block.size();
    }
    const std::string label = extract_conclusion_label(response);
    return label.empty() ? 0.0 : 1.0;
}

namespace {

bool is_word_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
}

/// Last token-boundary occurrence of `needle` in lowered text, npos if none.
std::size_t last_token_match(const std::string& lowered, const std::string& needle) {
    std::size_t best = std::string::npos;
    std::size_t pos = 0;
    while ((pos = lowered.find(needle, pos)) != std::string::npos) {
        const bool left_ok = pos == 0 || !is_word_char(lowered[pos - 1]);
        const std::size_t end = pos + needle.size();
        const bool right_ok = end >= lowered.size() || !is_word_char(lowered[end]);
        if (left_ok && right_ok) {
            best = pos;
        }
        ++pos;
    }
    return best;
}

}  // namespace

std::string extract_conclusion_label(std::string_view response) {
    const std::size_t pos = response.find("[Conclusion]");
    if (pos == std::string_view::npos) {
        return "";
    }
    std::string_view tail = response.substr(pos + std::string_view("[Conclusion]").size());
    const std::string lowered = text::ascii_lower(tail);

    // Preferred shape: "Violation (<category>)" with a known category.
    const std::size_t vpos = lowered.find("violation");
    if (vpos != std::string::npos) {
        const std::size_t open = lowered.find('(', vpos);
        if (open != std::string::npos) {
            const std::size_t close = lowered.find(')', open);
            if (close != std::string::npos) {
                const std::string cat{trim(std::string_view(lowered).substr(
                    open + 1, close - open - 1))};
                for (const auto& known : violating_categories()) {
                    if (cat == known) {
                        return known;
                    }
                }
            }
        }
    }
    // Bare category token, last occurrence wins; longer match breaks ties.
    std::string best_cat;
    std::size_t best_pos = std::string::npos;
    for (const auto& known : violating_categories()) {
        const std::size_t p = last_token_match(lowered, known);
        if (p == std::string::npos) {
            continue;
        }
        if (best_pos == std::string::npos || p > best_pos ||
            (p == best_pos && known.size() > best_cat.size())) {
            best_pos = p;
            best_cat = known;
        }
    }
    if (!best_cat.empty()) {
        return best_cat;
    }
    if (last_token_match(lowered, "safe") != std::string::npos) {
        return "Safe";
    }
    return "";
}

double classification_reward(std::string_view response, std::string_view gold_label,
                             bool binary_mode) {
    const std::string label = extract_conclusion_label(response);
    if (label.empty()) {
        return 0.0;
    }
    const std::string gold = text::ascii_lower(trim(gold_label));
    if (binary_mode) {
        const bool pred_safe = label == "Safe";
        const bool gold_safe = gold == "safe";
        return pred_safe == gold_safe ? 1.0 : 0.0;
    }
    const std::string pred = label == "Safe" ? "safe" : label;
    return pred == gold ? 1.0 : 0.0;
}

std::string_view extraction_text(std::string_view response) {
    constexpr std::string_view kTag = "[Extraction]";
    const std::size_t pos = response.find(kTag);
    if (pos == std::string_view::npos) {
        return response;
    }
    std::string_view tail = response.substr(pos + kTag.size());
    const std::size_t next = tail.find("[Reasoning]");
    if (next != std::string_view::npos) {
        tail = tail.substr(0, next);
    }
    return tail;
}

RewardBreakdown total_reward(const GroupSample& sample, const RewardConfig& cfg) {
    RewardBreakdown out;
    out.r_cls = cfg.weight_cls *
                classification_reward(sample.response, sample.gold_label, cfg.binary_class);
    out.r_fmt = cfg.weight_fmt * format_reward(sample.response);
    auto [ocr, diff] = ocr_reward(extraction_text(sample.response),
                                  sample.gold_violating_text, cfg.normalize_bags);
    out.r_ocr = cfg.weight_ocr * ocr;
    out.diff = diff;
    out.total = out.r_cls + out.r_fmt + out.r_ocr;
    return out;
}

std::vector<double> group_advantages(const std::vector<double>& rewards,
                                     const GrpoConfig& cfg) {
    if (rewards.size() != cfg.group_size) {
        throw GroupSizeMismatch("expected group of " + std::to_string(cfg.group_size) +
                                ", got " + std::to_string(rewards.size()));
    }
    if (std::all_of(rewards.begin(), rewards.end(),
                    [&](double r) { return r == rewards.front(); })) {
        return std::vector<double>(rewards.size(), 0.0);
    }
    const double n = static_cast<double>(rewards.size());
    const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / n;
    std::vector<double> deviations;
    deviations.reserve(rewards.size());
    for (double r : rewards) {
        deviations.push_back(r - mean);
    }
    // Second centering pass removes the summation residue, keeping the
    // advantage mean at zero even after division by a small denominator.
    const double residue =
        std::accumulate(deviations.begin(), deviations.end(), 0.0) / n;
    double var = 0.0;
    for (double& d : deviations) {
        d -= residue;
        var += d * d;
    }
    const double std_dev = std::sqrt(var / n);  // population std

    std::vector<double> advantages;
    advantages.reserve(rewards.size());
    for (double d : deviations) {
        advantages.push_back(d / (std_dev + cfg.std_epsilon));
    }
    return advantages;
}

}  // namespace forge::rewards
