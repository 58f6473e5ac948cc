#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace scopeprobe {

// Unicode NFC normalization (ICU-backed). All stimulus text goes through
// this on load so Chinese materials tokenize identically across runs.
std::string to_nfc(const std::string& utf8);

// Strip ASCII whitespace from both ends.
std::string trim(std::string_view s);

// Decode one UTF-8 codepoint starting at `i`; advances `i` past it.
// Malformed bytes decode as U+FFFD, one byte at a time.
char32_t decode_utf8(std::string_view s, std::size_t& i);

// True for codepoints tokenized as single-character tokens: CJK unified
// ideographs (incl. ext. A), CJK compatibility ideographs, CJK symbols
// and punctuation, and fullwidth forms.
bool is_cjk(char32_t cp);

// Deterministic tokenizer shared by every reference backend: splits on
// whitespace (ASCII + U+3000); CJK codepoints are singleton tokens; any
// other run of non-space codepoints forms one token.
std::vector<std::string> tokenize(const std::string& utf8);

// Join tokens with single spaces.
std::string join_tokens(const std::vector<std::string>& tokens);

}  // namespace scopeprobe
