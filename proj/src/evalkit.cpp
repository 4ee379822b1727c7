#include "forge/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "forge/text.hpp"

namespace forge::evalkit {

const std::vector<std::string>& moderation_categories() {
    static const std::vector<std::string> kCategories = {
        "ad", "high-risk", "illegal", "porn", "vulgar", "other", "normal"};
    return kCategories;
}

const std::vector<std::string>& adversarial_subsets() {
    static const std::vector<std::string> kSubsets = {
        "aigc", "combination", "handwriting", "long",
        "noise", "small",       "warp",        "watermark"};
    return kSubsets;
}

double subset_recall(const SubsetTally& t) {
    if (t.n_total == 0) {
        throw EmptyInput("subset tally has no characters");
    }
    return static_cast<double>(t.n_recognized) / static_cast<double>(t.n_total);
}

double weighted_overall(const std::map<std::string, SubsetTally>& tallies) {
    if (tallies.empty()) {
        throw EmptyInput("no subset tallies");
    }
    SubsetTally pooled;
    for (const auto& [name, t] : tallies) {
        if (t.n_total == 0) {
            throw EmptyInput("subset '" + name + "' has no characters");
        }
        pooled.n_recognized += t.n_recognized;
        pooled.n_total += t.n_total;
    }
    return subset_recall(pooled);
}

double average_k(const std::vector<double>& values) {
    if (values.empty()) {
        throw EmptyInput("average over empty sequence");
    }
    return std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(values.size());
}

namespace {

bool is_word_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

/// Position of the last standalone occurrence of `token` in lowered text.
std::optional<std::size_t> last_standalone(const std::string& lowered,
                                           std::string_view token) {
    std::optional<std::size_t> best;
    std::size_t pos = 0;
    while ((pos = lowered.find(token, pos)) != std::string::npos) {
        const bool left_ok = pos == 0 || !is_word_char(lowered[pos - 1]);
        const std::size_t end = pos + token.size();
        const bool right_ok = end >= lowered.size() || !is_word_char(lowered[end]);
        if (left_ok && right_ok) {
            best = pos;
        }
        ++pos;
    }
    return best;
}

}  // namespace

BinaryAnswer extract_binary_answer(std::string_view raw) {
    const std::string lowered = text::ascii_lower(raw);
    const auto yes_pos = last_standalone(lowered, "yes");
    const auto no_pos = last_standalone(lowered, "no");
    if (!yes_pos && !no_pos) {
        return BinaryAnswer::kUnparseable;
    }
    if (yes_pos && (!no_pos || *yes_pos > *no_pos)) {
        return BinaryAnswer::kYes;
    }
    return BinaryAnswer::kNo;
}

ChoiceAnswer extract_choice_letter(std::string_view raw) {
    auto to_choice = [](char c) {
        switch (c) {
            case 'A': return ChoiceAnswer::kA;
            case 'B': return ChoiceAnswer::kB;
            case 'C': return ChoiceAnswer::kC;
            default: return ChoiceAnswer::kD;
        }
    };
    // Last "[X]" (whitespace tolerated inside the brackets) wins.
    std::optional<char> bracketed;
    for (std::size_t i = 0; i + 1 < raw.size(); ++i) {
        if (raw[i] != '[') {
            continue;
        }
        std::size_t j = i + 1;
        while (j < raw.size() && (raw[j] == ' ' || raw[j] == '\t')) ++j;
        if (j >= raw.size()) break;
        char c = raw[j];
        if (c >= 'a' && c <= 'd') c = static_cast<char>(c - 'a' + 'A');
        if (c < 'A' || c > 'D') continue;
        std::size_t k = j + 1;
        while (k < raw.size() && (raw[k] == ' ' || raw[k] == '\t')) ++k;
        if (k < raw.size() && raw[k] == ']') {
            bracketed = c;
        }
    }
    if (bracketed) {
        return to_choice(*bracketed);
    }
    // Fallback: "ANSWER: X" (case-insensitive keyword), last occurrence.
    const std::string lowered = text::ascii_lower(raw);
    std::optional<char> fallback;
    std::size_t pos = 0;
    while ((pos = lowered.find("answer", pos)) != std::string::npos) {
        std::size_t j = pos + 6;
        while (j < lowered.size() && (lowered[j] == ' ' || lowered[j] == '\t')) ++j;
        if (j < lowered.size() && lowered[j] == ':') {
            ++j;
            while (j < lowered.size() && (lowered[j] == ' ' || lowered[j] == '\t')) ++j;
            if (j < lowered.size()) {
                char c = raw[j];
                if (c >= 'a' && c <= 'd') c = static_cast<char>(c - 'a' + 'A');
                if (c >= 'A' && c <= 'D') {
                    const bool standalone =
                        j + 1 >= lowered.size() || !is_word_char(lowered[j + 1]);
                    if (standalone) {
                        fallback = c;
                    }
                }
            }
        }
        pos += 6;
    }
    if (fallback) {
        return to_choice(*fallback);
    }
    return ChoiceAnswer::kUnparseable;
}

double false_positive_rate(const std::vector<ModerationCase>& benign_cases) {
    if (benign_cases.empty()) {
        throw EmptyInput("no benign cases");
    }
    std::size_t flagged = 0;
    for (const auto& c : benign_cases) {
        if (extract_binary_answer(c.model_answer) == BinaryAnswer::kYes) {
            ++flagged;
        }
    }
    return static_cast<double>(flagged) / static_cast<double>(benign_cases.size());
}

std::map<std::string, double> metric_map(const EvalReport& report) {
    std::map<std::string, double> metrics;
    for (const auto& [cat, recall] : report.per_category_recall) {
        metrics["category:" + cat] = recall;
    }
    for (const auto& [subset, recall] : report.per_subset_recall) {
        metrics["subset:" + subset] = recall;
    }
    if (!report.per_category_recall.empty()) {
        metrics["average_k"] = report.average_k;
    }
    if (!report.per_subset_recall.empty()) {
        metrics["weighted_overall"] = report.weighted_overall;
    }
    return metrics;
}

std::vector<DriftAlarm> drift_alarm(const EvalReport& baseline, const EvalReport& current,
                                    double threshold_points) {
    const auto base = metric_map(baseline);
    const auto cur = metric_map(current);
    if (base.size() != cur.size()) {
        throw KeyMismatch("reports track different metric sets");
    }
    std::vector<DriftAlarm> alarms;
    for (const auto& [name, base_value] : base) {
        auto it = cur.find(name);
        if (it == cur.end()) {
            throw KeyMismatch("metric missing from current report: " + name);
        }
        // Alarms are expressed in percentage points, matching the dashboards.
        const double base_pts = base_value * 100.0;
        const double cur_pts = it->second * 100.0;
        const double delta_pts = cur_pts - base_pts;
        if (-delta_pts > threshold_points) {
            alarms.push_back({name, base_pts, cur_pts, delta_pts});
        }
    }
    // std::map iteration is already name-ordered; keep that ordering.
    return alarms;
}

EvalReport evaluate(const std::vector<ModerationCase>& moderation,
                    const std::vector<AdversarialCase>& adversarial) {
    EvalReport report;

    std::map<std::string, std::pair<std::size_t, std::size_t>> hits;  // cat -> (yes-hits, gold-yes)
    std::size_t unparseable = 0;
    std::vector<ModerationCase> benign;
    for (const auto& c : moderation) {
        const BinaryAnswer answer = extract_binary_answer(c.model_answer);
        if (answer == BinaryAnswer::kUnparseable) {
            ++unparseable;
        }
        if (c.gold_yes) {
            auto& [hit, total] = hits[c.category];
            ++total;
            if (answer == BinaryAnswer::kYes) {
                ++hit;
            }
        } else {
            benign.push_back(c);
        }
    }
    std::vector<double> recalls;
    for (const auto& [cat, counts] : hits) {
        const double recall =
            static_cast<double>(counts.first) / static_cast<double>(counts.second);
        report.per_category_recall[cat] = recall;
        recalls.push_back(recall);
    }
    if (!recalls.empty()) {
        report.average_k = average_k(recalls);
    }
    if (!benign.empty()) {
        report.false_positive_rate = false_positive_rate(benign);
    }
    if (!moderation.empty()) {
        report.unparseable_fraction =
            static_cast<double>(unparseable) / static_cast<double>(moderation.size());
    }

    // Character tallies reuse the reward module's bag diff so Eq.-2 recall and
    // the OCR reward share one matching semantics.
    for (const auto& c : adversarial) {
        auto [reward, diff] = rewards::ocr_reward(c.recognized_chars, c.gold_chars);
        (void)reward;
        auto& tally = report.per_subset_tally[c.subset];
        tally.n_total += diff.n_gt;
        tally.n_recognized += diff.n_gt - diff.n_miss;
    }
    for (const auto& [subset, tally] : report.per_subset_tally) {
        report.per_subset_recall[subset] = subset_recall(tally);
    }
    if (!report.per_subset_tally.empty()) {
        report.weighted_overall = weighted_overall(report.per_subset_tally);
    }
    return report;
}

std::string render_report(const EvalReport& report) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(2);
    if (!report.per_category_recall.empty()) {
        out << "Content moderation recall (%)\n";
        for (const auto& cat : moderation_categories()) {
            auto it = report.per_category_recall.find(cat);
            if (it != report.per_category_recall.end()) {
                out << "  " << cat << ": " << it->second * 100.0 << "\n";
            }
        }
        out << "  average-" << report.per_category_recall.size() << ": "
            << report.average_k * 100.0 << "\n";
    }
    if (!report.per_subset_recall.empty()) {
        out << "Adversarial OCR recall (%)\n";
        for (const auto& subset : adversarial_subsets()) {
            auto it = report.per_subset_recall.find(subset);
            if (it != report.per_subset_recall.end()) {
                out << "  " << subset << ": " << it->second * 100.0 << "\n";
            }
        }
        out << "  weighted overall: " << report.weighted_overall * 100.0 << "\n";
    }
    out << "False positive rate (%): " << report.false_positive_rate * 100.0 << "\n";
    out << "Unparseable fraction (%): " << report.unparseable_fraction * 100.0 << "\n";
    for (const auto& alarm : report.alarms) {
        out << "ALARM " << alarm.metric << " baseline=" << alarm.baseline
            << " current=" << alarm.current << " delta=" << alarm.delta << "\n";
    }
    return out.str();
}

std::string report_to_json(const EvalReport& report) {
    nlohmann::json j;
    j["per_category_recall"] = report.per_category_recall;
    j["average_k"] = report.average_k;
    j["per_subset_recall"] = report.per_subset_recall;
    for (const auto& [subset, tally] : report.per_subset_tally) {
        j["per_subset_tally"][subset] = {{"n_recognized", tally.n_recognized},
                                         {"n_total", tally.n_total}};
    }
    j["weighted_overall"] = report.weighted_overall;
    j["false_positive_rate"] = report.false_positive_rate;
    j["unparseable_fraction"] = report.unparseable_fraction;
    for (const auto& alarm : report.alarms) {
        j["alarms"].push_back({{"metric", alarm.metric},
                               {"baseline", alarm.baseline},
                               {"current", alarm.current},
                               {"delta", alarm.delta}});
    }
    return j.dump(2);
}

EvalReport report_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw Error("malformed eval report");
    }
    EvalReport report;
    if (j.contains("per_category_recall")) {
        report.per_category_recall =
            j.at("per_category_recall").get<std::map<std::string, double>>();
    }
    report.average_k = j.value("average_k", 0.0);
    if (j.contains("per_subset_recall")) {
        report.per_subset_recall =
            j.at("per_subset_recall").get<std::map<std::string, double>>();
    }
    if (j.contains("per_subset_tally")) {
        for (const auto& [subset, t] : j.at("per_subset_tally").items()) {
            report.per_subset_tally[subset] = {
                t.value("n_recognized", std::uint64_t{0}),
                t.value("n_total", std::uint64_t{0})};
        }
    }
    report.weighted_overall = j.value("weighted_overall", 0.0);
    report.false_positive_rate = j.value("false_positive_rate", 0.0);
    report.unparseable_fraction = j.value("unparseable_fraction", 0.0);
    if (j.contains("alarms")) {
        for (const auto& a : j.at("alarms")) {
            report.alarms.push_back({a.value("metric", ""), a.value("baseline", 0.0),
                                     a.value("current", 0.0), a.value("delta", 0.0)});
        }
    }
    return report;
}

}  // namespace forge::evalkit
