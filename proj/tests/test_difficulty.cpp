#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "forge/difficulty.hpp"

using namespace forge;

namespace {

std::vector<difficulty::ScorerProfile> make_profiles(
    const std::vector<std::pair<double, double>>& losses) {
    std::vector<difficulty::ScorerProfile> out;
    int i = 0;
    for (const auto& [small, expert] : losses) {
        out.push_back({"p" + std::to_string(i++), small, expert, 0.5});
    }
    return out;
}

}  // namespace

TEST_CASE("difficulty_scores") {
    SUBCASE("identical profiles score zero") {
        const auto profiles = make_profiles({{2, 1}, {2, 1}, {2, 1}});
        for (double s : difficulty::difficulty_scores(profiles)) {
            CHECK(s == 0.0);
        }
    }
    SUBCASE("equal expert losses reduce to z of loss_small") {
        const auto profiles = make_profiles({{1, 1}, {2, 2}, {3, 3}});
        const auto scores = difficulty::difficulty_scores(profiles);
        CHECK(scores[0] < 0.0);
        CHECK(scores[1] == doctest::Approx(0.0));
        CHECK(scores[2] > 0.0);
        // Hand standardization: z = (x-2)/std, std = sqrt(2/3), half weight.
        const double z = (1.0 - 2.0) / std::sqrt(2.0 / 3.0);
        CHECK(scores[0] == doctest::Approx(0.5 * z));
    }
    SUBCASE("an extreme outlier takes the maximal score") {
        auto profiles = make_profiles({{1, 1}, {1.1, 1}, {0.9, 1}, {30, 1}});
        const auto scores = difficulty::difficulty_scores(profiles);
        CHECK(*std::max_element(scores.begin(), scores.end()) == scores[3]);
    }
    SUBCASE("empty batch throws") {
        CHECK_THROWS_AS(difficulty::difficulty_scores({}), difficulty::EmptyBatch);
    }
}

TEST_CASE("grade_batch") {
    SUBCASE("three distinct scores give one of each grade") {
        const auto grades = difficulty::grade_batch(make_profiles({{1, 1}, {2, 1},
                                                                   {3, 1}}));
        CHECK(grades[0].grade == difficulty::Grade::kEasy);
        CHECK(grades[1].grade == difficulty::Grade::kMedium);
        CHECK(grades[2].grade == difficulty::Grade::kHard);
    }
    SUBCASE("six ties split by record id") {
        const auto grades = difficulty::grade_batch(
            make_profiles({{5, 1}, {5, 1}, {5, 1}, {5, 1}, {5, 1}, {5, 1}}));
        CHECK(grades[0].grade == difficulty::Grade::kEasy);    // p0
        CHECK(grades[1].grade == difficulty::Grade::kEasy);    // p1
        CHECK(grades[2].grade == difficulty::Grade::kMedium);  // p2
        CHECK(grades[3].grade == difficulty::Grade::kMedium);  // p3
        CHECK(grades[4].grade == difficulty::Grade::kHard);    // p4
        CHECK(grades[5].grade == difficulty::Grade::kHard);    // p5
    }
    SUBCASE("seven records split 3/2/2") {
        const auto grades = difficulty::grade_batch(make_profiles(
            {{1, 1}, {2, 1}, {3, 1}, {4, 1}, {5, 1}, {6, 1}, {7, 1}}));
        int easy = 0, medium = 0, hard = 0;
        for (const auto& g : grades) {
            if (g.grade == difficulty::Grade::kEasy) ++easy;
            if (g.grade == difficulty::Grade::kMedium) ++medium;
            if (g.grade == difficulty::Grade::kHard) ++hard;
        }
        CHECK(easy == 3);
        CHECK(medium == 2);
        CHECK(hard == 2);
    }
    SUBCASE("eight records split 3/3/2") {
        const auto grades = difficulty::grade_batch(make_profiles(
            {{1, 1}, {2, 1}, {3, 1}, {4, 1}, {5, 1}, {6, 1}, {7, 1}, {8, 1}}));
        int counts[3] = {0, 0, 0};
        for (const auto& g : grades) {
            ++counts[static_cast<int>(g.grade)];
        }
        CHECK(counts[0] == 3);
        CHECK(counts[1] == 3);
        CHECK(counts[2] == 2);
    }
    SUBCASE("fewer than three throws") {
        CHECK_THROWS_AS(difficulty::grade_batch(make_profiles({{1, 1}, {2, 1}})),
                        difficulty::EmptyBatch);
    }
}

TEST_CASE("grading properties on random batches") {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> loss(0.1, 9.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::uniform_int_distribution<std::size_t> n_dist(3, 200);
        const std::size_t n = n_dist(rng);
        std::vector<difficulty::ScorerProfile> profiles;
        for (std::size_t i = 0; i < n; ++i) {
            profiles.push_back({"r" + std::to_string(i), loss(rng), loss(rng),
                                0.5});
        }
        const auto grades = difficulty::grade_batch(profiles);

        // Monotonicity: lower score never gets a harder grade.
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (grades[i].score < grades[j].score) {
                    CHECK(static_cast<int>(grades[i].grade) <=
                          static_cast<int>(grades[j].grade));
                }
            }
        }

        // Tertile sizes against the sort oracle.
        const std::size_t q = n / 3, r = n % 3;
        std::size_t want_easy = q + (r >= 1), want_medium = q + (r >= 2),
                    want_hard = q;
        std::size_t easy = 0, medium = 0, hard = 0;
        for (const auto& g : grades) {
            if (g.grade == difficulty::Grade::kEasy) ++easy;
            if (g.grade == difficulty::Grade::kMedium) ++medium;
            if (g.grade == difficulty::Grade::kHard) ++hard;
        }
        CHECK(easy == want_easy);
        CHECK(medium == want_medium);
        CHECK(hard == want_hard);

        // Permutation invariance: shuffle input, same grade per id.
        auto shuffled = profiles;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const auto grades2 = difficulty::grade_batch(shuffled);
        std::map<std::string, difficulty::Grade> by_id;
        for (const auto& g : grades2) {
            by_id[g.record_id] = g.grade;
        }
        for (const auto& g : grades) {
            CHECK(by_id.at(g.record_id) == g.grade);
        }
    }
}

TEST_CASE("curriculum order is a stable grade sort") {
    const auto profiles = make_profiles(
        {{9, 1}, {1, 1}, {5, 1}, {2, 1}, {8, 1}, {4, 1}});
    const auto grades = difficulty::grade_batch(profiles);
    const auto order = difficulty::curriculum_order(grades);
    REQUIRE(order.size() == profiles.size());
    // Grade blocks in order, input order preserved within a block.
    int last_grade = -1;
    std::map<std::string, std::size_t> input_pos;
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        input_pos[profiles[i].record_id] = i;
    }
    std::map<std::string, const difficulty::DifficultyGrade*> by_id;
    for (const auto& g : grades) {
        by_id[g.record_id] = &g;
    }
    std::size_t prev_pos = 0;
    for (const auto& id : order) {
        const int g = static_cast<int>(by_id.at(id)->grade);
        if (g != last_grade) {
            last_grade = g;
            prev_pos = input_pos.at(id);
        } else {
            CHECK(input_pos.at(id) > prev_pos);
            prev_pos = input_pos.at(id);
        }
    }
}
