#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace semsum::text {

/// Lowercased maximal runs of ASCII alphanumerics.
std::vector<std::string> tokenize(std::string_view s);

/// Whitespace-delimited words, punctuation attached.
std::vector<std::string> split_words(std::string_view s);

std::size_t word_count(std::string_view s);

/// Sentences end at '.', '!' or '?' followed by whitespace (or end of text),
/// and at newlines. Returned sentences are trimmed and non-empty.
std::vector<std::string> split_sentences(std::string_view s);

/// FNV-1a, 64 bit.
std::uint64_t fnv1a64(std::string_view s) noexcept;

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::string trim(std::string_view s);

}  // namespace semsum::text
