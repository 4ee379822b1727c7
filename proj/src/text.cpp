#include "forge/text.hpp"

#include <array>

namespace forge::text {

std::vector<char32_t> decode_utf8(std::string_view s) {
    std::vector<char32_t> out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        const auto b0 = static_cast<unsigned char>(s[i]);
        std::size_t len = 0;
        char32_t cp = 0;
        if (b0 < 0x80) {
            len = 1;
            cp = b0;
        } else if ((b0 & 0xe0) == 0xc0) {
            len = 2;
            cp = b0 & 0x1f;
        } else if ((b0 & 0xf0) == 0xe0) {
            len = 3;
            cp = b0 & 0x0f;
        } else if ((b0 & 0xf8) == 0xf0) {
            len = 4;
            cp = b0 & 0x07;
        }
        bool ok = len > 0 && i + len <= s.size();
        for (std::size_t k = 1; ok && k < len; ++k) {
            const auto bk = static_cast<unsigned char>(s[i + k]);
            if ((bk & 0xc0) != 0x80) {
                ok = false;
            } else {
                cp = (cp << 6) | (bk & 0x3f);
            }
        }
        // Reject overlongs and surrogate-range scalars.
        if (ok) {
            if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
                (len == 4 && cp < 0x10000) || cp > 0x10ffff ||
                (cp >= 0xd800 && cp <= 0xdfff)) {
                ok = false;
            }
        }
        if (ok) {
            out.push_back(cp);
            i += len;
        } else {
            out.push_back(0xfffd);
            i += 1;
        }
    }
    return out;
}

std::string encode_utf8(char32_t cp) {
    std::string out;
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else {
        out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    }
    return out;
}

std::string encode_utf8(const std::vector<char32_t>& cps) {
    std::string out;
    out.reserve(cps.size() * 3);
    for (char32_t cp : cps) {
        out += encode_utf8(cp);
    }
    return out;
}

bool is_cjk(char32_t cp) {
    return (cp >= 0x4e00 && cp <= 0x9fff) ||   // CJK Unified Ideographs
           (cp >= 0x3400 && cp <= 0x4dbf) ||   // Extension A
           (cp >= 0xf900 && cp <= 0xfaff) ||   // Compatibility Ideographs
           (cp >= 0x3040 && cp <= 0x30ff) ||   // Hiragana + Katakana
           (cp >= 0x20000 && cp <= 0x2a6df);   // Extension B
}

bool is_space(char32_t cp) {
    return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' ||
           cp == U'\f' || cp == U'\v' || cp == 0x3000 || cp == 0x00a0;
}

char32_t compat_fold(char32_t cp) {
    if (cp >= 0xff01 && cp <= 0xff5e) {
        return cp - 0xff01 + 0x21;  // full-width ASCII block
    }
    if (cp == 0x3000) {
        return 0x20;  // ideographic space
    }
    return cp;
}

std::string compat_fold(std::string_view s) {
    auto cps = decode_utf8(s);
    for (auto& cp : cps) {
        cp = compat_fold(cp);
    }
    return encode_utf8(cps);
}

std::vector<std::string> tokenize(std::string_view s) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    };
    for (char32_t raw : decode_utf8(s)) {
        const char32_t cp = compat_fold(raw);
        if (is_space(cp)) {
            flush();
        } else if (is_cjk(cp)) {
            flush();
            tokens.push_back(encode_utf8(cp));
        } else {
            current += encode_utf8(cp);
        }
    }
    flush();
    return tokens;
}

std::size_t token_count(std::string_view s) {
    return tokenize(s).size();
}

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') {
            c = static_cast<char>(c - 'A' + 'a');
        }
    }
    return out;
}

}  // namespace forge::text
