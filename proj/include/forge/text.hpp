#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace forge::text {

/// Decodes UTF-8 into codepoints. Invalid byte sequences decode to U+FFFD
/// one byte at a time, so decoding is total.
std::vector<char32_t> decode_utf8(std::string_view s);

/// Encodes a codepoint sequence back to UTF-8.
std::string encode_utf8(const std::vector<char32_t>& cps);
std::string encode_utf8(char32_t cp);

/// True for codepoints tokenized one-per-character (CJK ideographs, kana,
/// and the compatibility ideograph block).
bool is_cjk(char32_t cp);

bool is_space(char32_t cp);

/// Compatibility fold used before character bagging and perplexity
/// tokenization: full-width ASCII variants (U+FF01..U+FF5E) map to their
/// half-width forms and the ideographic space U+3000 maps to U+0020.
char32_t compat_fold(char32_t cp);
std::string compat_fold(std::string_view s);

/// Pipeline tokenizer: whitespace-separated runs, with every CJK codepoint
/// inside a run split into its own token. Applied after compat_fold.
std::vector<std::string> tokenize(std::string_view s);

/// Number of tokens under tokenize(); used for prompt/analysis length floors.
std::size_t token_count(std::string_view s);

/// Lower-cases ASCII letters only (answer parsing is ASCII-keyword based).
std::string ascii_lower(std::string_view s);

}  // namespace forge::text
