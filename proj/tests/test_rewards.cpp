#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "forge/rewards.hpp"
#include "forge/text.hpp"

using namespace forge;

namespace {

/// Independent route for the bag diff: greedy occurrence matching over
/// codepoint vectors instead of count maps.
std::pair<double, rewards::CharBagDiff> oracle_ocr(std::string_view pred,
                                                   std::string_view gold) {
    auto chars = [](std::string_view s) {
        std::vector<char32_t> out;
        for (char32_t cp : text::decode_utf8(s)) {
            cp = text::compat_fold(cp);
            if (!text::is_space(cp)) {
                out.push_back(cp);
            }
        }
        return out;
    };
    std::vector<char32_t> p = chars(pred);
    std::vector<char32_t> g = chars(gold);
    rewards::CharBagDiff diff;
    diff.n_pred = p.size();
    diff.n_gt = g.size();
    std::vector<char32_t> g_left = g;
    for (char32_t c : p) {
        auto it = std::find(g_left.begin(), g_left.end(), c);
        if (it != g_left.end()) {
            g_left.erase(it);
        } else {
            ++diff.n_halluc;
        }
    }
    diff.n_miss = g_left.size();
    double reward;
    if (diff.n_pred == 0 && diff.n_gt == 0) {
        reward = 1.0;
    } else {
        reward = 1.0 - static_cast<double>(diff.n_halluc + diff.n_miss) /
                           static_cast<double>(std::max(diff.n_pred, diff.n_gt));
        reward = std::clamp(reward, 0.0, 1.0);
    }
    return {reward, diff};
}

std::string random_string(std::mt19937_64& rng, std::size_t max_len) {
    static const std::vector<std::string> alphabet = [] {
        std::vector<std::string> a;
        for (char c = 'a'; c <= 'j'; ++c) a.push_back(std::string(1, c));
        for (char c = '0'; c <= '4'; ++c) a.push_back(std::string(1, c));
        // CJK and fullwidth entries.
        for (const char* s : {"微", "信", "群", "号", "搜", "一", "条", "龙",
                              "Ｑ", "７", "３", "　", " ", "加"}) {
            a.push_back(s);
        }
        return a;
    }();
    std::uniform_int_distribution<std::size_t> len(0, max_len);
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
    std::string out;
    const std::size_t n = len(rng);
    for (std::size_t i = 0; i < n; ++i) {
        out += alphabet[pick(rng)];
    }
    return out;
}

const char* kGoodResponse =
    "[Observation] A promotional product poster with dense printed text.\n"
    "[Extraction] yyKhxa\n"
    "[Reasoning] The handwritten string does not match the layout and hides a "
    "diversion code.\n"
    "[Conclusion] Determination: Violation (off-platform diversion).";

}  // namespace

TEST_CASE("ocr_reward hand cases") {
    SUBCASE("identity is 1") {
        CHECK(rewards::ocr_reward("微信群 abc", "微信群 abc").first == 1.0);
    }
    SUBCASE("empty pred, 5-char gold is 0") {
        auto [r, diff] = rewards::ocr_reward("", "abcde");
        CHECK(r == 0.0);
        CHECK(diff.n_miss == 5);
        CHECK(diff.n_pred == 0);
    }
    SUBCASE("abcx vs abcd is 0.5") {
        auto [r, diff] = rewards::ocr_reward("abcx", "abcd");
        CHECK(r == doctest::Approx(0.5));
        CHECK(diff.n_halluc == 1);
        CHECK(diff.n_miss == 1);
    }
    SUBCASE("both empty is 1 with zero diff") {
        auto [r, diff] = rewards::ocr_reward("", "");
        CHECK(r == 1.0);
        CHECK(diff == rewards::CharBagDiff{});
    }
    SUBCASE("whitespace and width variants normalize away") {
        CHECK(rewards::ocr_reward("Ｑ７３", "Q 7 3").first == 1.0);
        CHECK(rewards::ocr_reward("Ｑ７３", "Q73", /*normalize=*/false).first <
              1.0);
    }
    SUBCASE("disjoint bags clamp to 0") {
        CHECK(rewards::ocr_reward("ab", "cd").first == 0.0);
        CHECK(rewards::ocr_reward("a", "bcd").first == 0.0);
    }
}

TEST_CASE("ocr_reward equals the brute-force oracle on random pairs") {
    std::mt19937_64 rng(42);
    for (int i = 0; i < 2000; ++i) {
        const auto a = random_string(rng, 20);
        const auto b = random_string(rng, 20);
        auto [r, diff] = rewards::ocr_reward(a, b);
        auto [ro, diffo] = oracle_ocr(a, b);
        CHECK(r == ro);
        CHECK(diff == diffo);
        // Range and invariants.
        CHECK(r >= 0.0);
        CHECK(r <= 1.0);
        CHECK(diff.n_halluc <= diff.n_pred);
        CHECK(diff.n_miss <= diff.n_gt);
        // Symmetry under the max denominator.
        CHECK(rewards::ocr_reward(b, a).first == r);
    }
}

TEST_CASE("format_reward") {
    SUBCASE("well-formed four-block response") {
        CHECK(rewards::format_reward(kGoodResponse) == 1.0);
    }
    SUBCASE("safe conclusion accepted") {
        CHECK(rewards::format_reward("[Observation] a\n[Extraction] \n"
                                     "[Reasoning] ok\n[Conclusion] Safe") == 1.0);
    }
    SUBCASE("blocks out of order") {
        CHECK(rewards::format_reward("[Extraction] x\n[Observation] a\n"
                                     "[Reasoning] r\n[Conclusion] Safe") == 0.0);
    }
    SUBCASE("missing extraction") {
        CHECK(rewards::format_reward("[Observation] a\n[Reasoning] r\n"
                                     "[Conclusion] Safe") == 0.0);
    }
    SUBCASE("duplicate block") {
        CHECK(rewards::format_reward("[Observation] a\n[Observation] b\n"
                                     "[Extraction] x\n[Reasoning] r\n"
                                     "[Conclusion] Safe") == 0.0);
    }
    SUBCASE("unknown conclusion token") {
        CHECK(rewards::format_reward("[Observation] a\n[Extraction] x\n"
                                     "[Reasoning] r\n[Conclusion] maybe bad") == 0.0);
    }
}

TEST_CASE("classification_reward") {
    CHECK(rewards::classification_reward(kGoodResponse, "off-platform diversion") ==
          1.0);
    CHECK(rewards::classification_reward(kGoodResponse, "porn") == 0.0);
    CHECK(rewards::classification_reward("[Conclusion] Safe", "safe") == 1.0);
    CHECK(rewards::classification_reward("[Conclusion] Safe", "porn") == 0.0);
    CHECK(rewards::classification_reward("no blocks at all", "porn") == 0.0);

    SUBCASE("binary mode grades only the violation decision") {
        CHECK(rewards::classification_reward(kGoodResponse, "porn",
                                             /*binary=*/true) == 1.0);
        CHECK(rewards::classification_reward("[Conclusion] Safe", "porn",
                                             /*binary=*/true) == 0.0);
    }
}

TEST_CASE("total_reward decomposition") {
    rewards::GroupSample sample;
    sample.gold_label = "off-platform diversion";
    sample.gold_violating_text = "yyKhxa";

    SUBCASE("perfect response scores 3") {
        sample.response = kGoodResponse;
        const auto breakdown = rewards::total_reward(sample);
        CHECK(breakdown.r_cls == 1.0);
        CHECK(breakdown.r_fmt == 1.0);
        CHECK(breakdown.r_ocr == 1.0);
        CHECK(breakdown.total == 3.0);
    }
    SUBCASE("half-right OCR gives 2.5") {
        sample.gold_violating_text = "abcd";
        sample.response =
            "[Observation] poster\n[Extraction] abcx\n[Reasoning] hidden\n"
            "[Conclusion] Determination: Violation (off-platform diversion).";
        const auto breakdown = rewards::total_reward(sample);
        CHECK(breakdown.r_cls == 1.0);
        CHECK(breakdown.r_fmt == 1.0);
        CHECK(breakdown.r_ocr == doctest::Approx(0.5));
        CHECK(breakdown.total == doctest::Approx(2.5));
    }
    SUBCASE("garbage response scores 0") {
        sample.response = "zzz qqq 000";
        const auto breakdown = rewards::total_reward(sample);
        CHECK(breakdown.total == 0.0);
    }
    SUBCASE("total equals component sum") {
        std::mt19937_64 rng(7);
        for (int i = 0; i < 200; ++i) {
            sample.response = random_string(rng, 40);
            const auto b = rewards::total_reward(sample);
            CHECK(b.total == b.r_cls + b.r_fmt + b.r_ocr);
        }
    }
}

TEST_CASE("group_advantages") {
    rewards::GrpoConfig cfg;
    SUBCASE("degenerate group is all zeros") {
        cfg.group_size = 4;
        const auto a = rewards::group_advantages({1, 1, 1, 1}, cfg);
        for (double x : a) {
            CHECK(x == 0.0);
        }
    }
    SUBCASE("[1,0] standardizes to ~[+1,-1]") {
        cfg.group_size = 2;
        const auto a = rewards::group_advantages({1, 0}, cfg);
        CHECK(a[0] == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(a[1] == doctest::Approx(-1.0).epsilon(1e-6));
    }
    SUBCASE("[3,1,2] hand case") {
        cfg.group_size = 3;
        const auto a = rewards::group_advantages({3, 1, 2}, cfg);
        CHECK(a[0] == doctest::Approx(1.2247).epsilon(1e-3));
        CHECK(a[1] == doctest::Approx(-1.2247).epsilon(1e-3));
        CHECK(a[2] == doctest::Approx(0.0));
    }
    SUBCASE("size mismatch throws") {
        cfg.group_size = 4;
        CHECK_THROWS_AS(rewards::group_advantages({1, 2}, cfg),
                        rewards::GroupSizeMismatch);
    }
    SUBCASE("mean zero, unit-ish std, permutation equivariance") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(0.0, 3.0);
        for (int trial = 0; trial < 200; ++trial) {
            std::uniform_int_distribution<std::size_t> size_dist(2, 16);
            cfg.group_size = size_dist(rng);
            std::vector<double> rewards_vec(cfg.group_size);
            for (auto& r : rewards_vec) {
                r = u(rng);
            }
            const auto a = rewards::group_advantages(rewards_vec, cfg);
            double mean = 0.0;
            for (double x : a) mean += x;
            mean /= static_cast<double>(a.size());
            CHECK(std::abs(mean) < 1e-9);

            // Permutation equivariance: reverse the group. Summation order
            // changes the last float bits, hence the tolerance.
            std::vector<double> rev(rewards_vec.rbegin(), rewards_vec.rend());
            const auto a_rev = rewards::group_advantages(rev, cfg);
            for (std::size_t i = 0; i < a.size(); ++i) {
                CHECK(a[i] == doctest::Approx(a_rev[a.size() - 1 - i]).epsilon(1e-9));
            }
        }
    }
}
