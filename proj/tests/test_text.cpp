#include <doctest.h>

#include "forge/text.hpp"

using namespace forge;

TEST_CASE("utf8 round trip") {
    const std::string s = "mixed ascii 微信 and ｆｕｌｌｗｉｄｔｈ";
    CHECK(text::encode_utf8(text::decode_utf8(s)) == s);
}

TEST_CASE("invalid utf8 decodes to replacement, never throws") {
    const std::string bad = "ok\xff\xfe then \xe4\xb8";  // stray + truncated
    const auto cps = text::decode_utf8(bad);
    CHECK(cps.size() > 4);
    CHECK(std::count(cps.begin(), cps.end(), char32_t{0xfffd}) >= 3);
}

TEST_CASE("compat fold maps fullwidth to ascii") {
    CHECK(text::compat_fold("ＡＢＣ１２３") == "ABC123");
    CHECK(text::compat_fold(std::string_view("\xe3\x80\x80")) == " ");  // U+3000
    CHECK(text::compat_fold("微信") == "微信");
}

TEST_CASE("tokenizer splits whitespace and per-CJK-character") {
    const auto tokens = text::tokenize("hello 微信群 world");
    REQUIRE(tokens.size() == 5);
    CHECK(tokens[0] == "hello");
    CHECK(tokens[1] == "微");
    CHECK(tokens[2] == "信");
    CHECK(tokens[3] == "群");
    CHECK(tokens[4] == "world");
}

TEST_CASE("tokenizer handles mixed runs without separators") {
    const auto tokens = text::tokenize("abc微def");
    REQUIRE(tokens.size() == 3);
    CHECK(tokens[0] == "abc");
    CHECK(tokens[1] == "微");
    CHECK(tokens[2] == "def");
}

TEST_CASE("token_count") {
    CHECK(text::token_count("") == 0);
    CHECK(text::token_count("   ") == 0);
    CHECK(text::token_count("one two three") == 3);
}
