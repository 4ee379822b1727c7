#pragma once

#include <string>
#include <vector>

#include "forge/common.hpp"

namespace forge::difficulty {

class EmptyBatch : public Error {
  public:
    explicit EmptyBatch(const std::string& what) : Error(what) {}
};

/// Dual-track rescoring profile for one record: mean per-token cross-entropy
/// from the small model and the expert model, plus small-model confidence.
struct ScorerProfile {
    std::string record_id;
    double loss_small = 0.0;
    double loss_expert = 0.0;
    double confidence_small = 0.0;
};

enum class Grade { kEasy, kMedium, kHard };

std::string grade_name(Grade g);

struct DifficultyGrade {
    std::string record_id;
    double score = 0.0;
    Grade grade = Grade::kEasy;
};

struct DifficultyWeights {
    double absolute = 0.5;      // weight on z(loss_small)
    double disagreement = 0.5;  // weight on z(loss_small - loss_expert)
};

/// Batch difficulty scores: weighted sum of the batch z-score of the small
/// model's loss and of the small-vs-expert loss gap. A degenerate (zero-std)
/// term contributes 0.
std::vector<double> difficulty_scores(const std::vector<ScorerProfile>& profiles,
                                      const DifficultyWeights& weights = {});

/// Tertile grading over (score, record_id) order: lowest third easy, middle
/// medium, top hard, with remainders spilling to the lower grade. Output is
/// in input order.
std::vector<DifficultyGrade> grade_batch(const std::vector<ScorerProfile>& profiles,
                                         const DifficultyWeights& weights = {});

/// Record ids in curriculum order: easy, then medium, then hard, stable with
/// respect to the input order within each grade.
std::vector<std::string> curriculum_order(const std::vector<DifficultyGrade>& grades);

}  // namespace forge::difficulty
