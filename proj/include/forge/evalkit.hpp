#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forge/common.hpp"
#include "forge/rewards.hpp"

namespace forge::evalkit {

class EmptyInput : public Error {
  public:
    explicit EmptyInput(const std::string& what) : Error(what) {}
};

class KeyMismatch : public Error {
  public:
    explicit KeyMismatch(const std::string& what) : Error(what) {}
};

/// Seven-label moderation taxonomy; `normal` is the non-violating class.
const std::vector<std::string>& moderation_categories();

/// Eight-way adversarial OCR split.
const std::vector<std::string>& adversarial_subsets();

enum class BinaryAnswer { kYes, kNo, kUnparseable };
enum class ChoiceAnswer { kA, kB, kC, kD, kUnparseable };

/// One binary-decision moderation case with the model's raw answer attached.
struct ModerationCase {
    std::string id;
    std::string category;
    bool gold_yes = false;
    std::string model_answer;
};

/// One adversarial OCR case; recognized text is scored against the gold
/// violating characters with the reward module's bag diff.
struct AdversarialCase {
    std::string id;
    std::string subset;
    std::string gold_chars;
    std::string recognized_chars;
};

/// Pooled character counts for one adversarial subset.
struct SubsetTally {
    std::uint64_t n_recognized = 0;
    std::uint64_t n_total = 0;
};

struct DriftAlarm {
    std::string metric;
    double baseline = 0.0;  // percentage points
    double current = 0.0;
    double delta = 0.0;  // current - baseline, negative on a drop
};

struct EvalReport {
    std::map<std::string, double> per_category_recall;
    double average_k = 0.0;
    std::map<std::string, double> per_subset_recall;
    std::map<std::string, SubsetTally> per_subset_tally;
    double weighted_overall = 0.0;
    double false_positive_rate = 0.0;
    double unparseable_fraction = 0.0;
    std::vector<DriftAlarm> alarms;
};

/// Eq.-style character recall: recognized / total.
double subset_recall(const SubsetTally& t);

/// Pooled-count recall across subsets (character-count weighting).
double weighted_overall(const std::map<std::string, SubsetTally>& tallies);

/// Arithmetic mean; the paper's average-7 / average-9 aggregations.
double average_k(const std::vector<double>& values);

/// Case-insensitive standalone Yes/No token nearest the end of the response.
BinaryAnswer extract_binary_answer(std::string_view raw);

/// Last bracketed single letter wins; falls back to "ANSWER: X".
ChoiceAnswer extract_choice_letter(std::string_view raw);

/// Fraction of benign cases whose parsed answer flags a violation.
/// Unparseable answers do not flag but are tallied by the caller.
double false_positive_rate(const std::vector<ModerationCase>& benign_cases);

/// Per-metric drops beyond `threshold_points` (percentage points), ordered by
/// metric name. Throws KeyMismatch when the reports track different metrics.
std::vector<DriftAlarm> drift_alarm(const EvalReport& baseline, const EvalReport& current,
                                    double threshold_points);

/// Flat metric view used by drift comparison and the report CLI.
std::map<std::string, double> metric_map(const EvalReport& report);

/// Scores moderation + adversarial cases into a full report. Recall counts
/// unparseable answers as "No" (a miss for violating gold) and tallies the
/// unparseable fraction separately.
EvalReport evaluate(const std::vector<ModerationCase>& moderation,
                    const std::vector<AdversarialCase>& adversarial);

/// Plain-text table mirroring the published report shapes.
std::string render_report(const EvalReport& report);

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);

}  // namespace forge::evalkit
