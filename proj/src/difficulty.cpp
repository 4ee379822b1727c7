#include "forge/difficulty.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace forge::difficulty {

std::string grade_name(Grade g) {
    switch (g) {
        case Grade::kEasy: return "easy";
        case Grade::kMedium: return "medium";
        case Grade::kHard: return "hard";
    }
    return "?";
}

namespace {

struct Moments {
    double mean = 0.0;
    double std_dev = 0.0;
};

Moments moments(const std::vector<double>& xs) {
    Moments m;
    const double n = static_cast<double>(xs.size());
    m.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double var = 0.0;
    for (double x : xs) {
        var += (x - m.mean) * (x - m.mean);
    }
    m.std_dev = std::sqrt(var / n);
    return m;
}

}  // namespace

std::vector<double> difficulty_scores(const std::vector<ScorerProfile>& profiles,
                                      const DifficultyWeights& weights) {
    if (profiles.empty()) {
        throw EmptyBatch("no profiles to score");
    }
    std::vector<double> losses, deltas;
    losses.reserve(profiles.size());
    deltas.reserve(profiles.size());
    for (const auto& p : profiles) {
        losses.push_back(p.loss_small);
        deltas.push_back(p.loss_small - p.loss_expert);
    }
    const Moments loss_m = moments(losses);
    const Moments delta_m = moments(deltas);

    std::vector<double> scores(profiles.size(), 0.0);
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        double score = 0.0;
        if (loss_m.std_dev > 0.0) {
            score += weights.absolute * (losses[i] - loss_m.mean) / loss_m.std_dev;
        }
        if (delta_m.std_dev > 0.0) {
            score += weights.disagreement * (deltas[i] - delta_m.mean) / delta_m.std_dev;
        }
        scores[i] = score;
    }
    return scores;
}

std::vector<DifficultyGrade> grade_batch(const std::vector<ScorerProfile>& profiles,
                                         const DifficultyWeights& weights) {
    if (profiles.size() < 3) {
        throw EmptyBatch("grading needs at least 3 profiles");
    }
    const auto scores = difficulty_scores(profiles, weights);

    std::vector<std::size_t> order(profiles.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) {
            return scores[a] < scores[b];
        }
        return profiles[a].record_id < profiles[b].record_id;
    });

    // n = 3q + r: remainders spill to the lower grades, giving sizes like
    // (3,2,2) for 7 and (3,3,2) for 8.
    const std::size_t n = profiles.size();
    const std::size_t q = n / 3;
    const std::size_t r = n % 3;
    const std::size_t easy_end = q + (r >= 1 ? 1 : 0);
    const std::size_t medium_end = easy_end + q + (r >= 2 ? 1 : 0);

    std::vector<DifficultyGrade> grades(n);
    for (std::size_t rank = 0; rank < n; ++rank) {
        const std::size_t i = order[rank];
        Grade g = Grade::kHard;
        if (rank < easy_end) {
            g = Grade::kEasy;
        } else if (rank < medium_end) {
            g = Grade::kMedium;
        }
        grades[i] = {profiles[i].record_id, scores[i], g};
    }
    return grades;
}

std::vector<std::string> curriculum_order(const std::vector<DifficultyGrade>& grades) {
    std::vector<std::string> out;
    out.reserve(grades.size());
    for (Grade g : {Grade::kEasy, Grade::kMedium, Grade::kHard}) {
        for (const auto& grade : grades) {
            if (grade.grade == g) {
                out.push_back(grade.record_id);
            }
        }
    }
    return out;
}

}  // namespace forge::difficulty
