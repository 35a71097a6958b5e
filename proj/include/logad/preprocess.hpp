#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "logad/ingest.hpp"

namespace logad {

namespace placeholder {
inline constexpr std::string_view kNonZero = "$nz";
inline constexpr std::string_view kZero = "$zero";
inline constexpr std::string_view kHost = "$host";
inline constexpr std::string_view kUnknown = "$unk";
}  // namespace placeholder

using TokenSequence = std::vector<std::string>;

struct StopWordList {
  std::set<std::string, std::less<>> words;

  bool contains(std::string_view w) const { return words.find(w) != words.end(); }
};

// The list compiled in from resources/stopwords.txt.
const StopWordList& builtin_stop_words();

// One lowercase word per line; blank lines and lines starting with '#' are skipped.
StopWordList load_stop_words(const std::filesystem::path& path);
StopWordList parse_stop_words(std::string_view text);

bool is_placeholder(std::string_view token);

// Splits at every run of characters outside [A-Za-z0-9/]. A '$' immediately
// followed by a placeholder name ("$nz", "$zero", "$host", "$unk") at a token
// boundary is kept as one token, so normalized text re-tokenizes to itself.
std::vector<std::string> tokenize(std::string_view text);

// Returns "" when nothing survives the special-character strip.
std::string normalize_token(std::string_view token);

TokenSequence preprocess_text(std::string_view text, const StopWordList& stops);
TokenSequence preprocess_entry(const LogEntry& entry, const StopWordList& stops);

std::string join_tokens(const TokenSequence& tokens);

}  // namespace logad
