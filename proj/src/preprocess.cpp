#include "logad/preprocess.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

#include "logad/error.hpp"

namespace logad {

namespace detail {
extern const char kBuiltinStopWords[];
}

namespace {

bool is_token_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '/';
}

constexpr std::array<std::string_view, 4> kPlaceholders = {
    placeholder::kNonZero, placeholder::kZero, placeholder::kHost, placeholder::kUnknown};

// Length of the placeholder starting at text[i], or 0.
std::size_t placeholder_at(std::string_view text, std::size_t i) {
  for (std::string_view p : kPlaceholders) {
    if (text.substr(i, p.size()) == p &&
        (i + p.size() == text.size() || !is_token_char(text[i + p.size()]))) {
      return p.size();
    }
  }
  return 0;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }
bool ends_with(std::string_view s, std::string_view p) {
  return s.size() >= p.size() && s.substr(s.size() - p.size()) == p;
}

}  // namespace

bool is_placeholder(std::string_view token) {
  return std::find(kPlaceholders.begin(), kPlaceholders.end(), token) != kPlaceholders.end();
}

StopWordList parse_stop_words(std::string_view text) {
  StopWordList list;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
    std::size_t first = 0;
    while (first < line.size() && std::isspace(static_cast<unsigned char>(line[first]))) ++first;
    line.erase(0, first);
    if (line.empty() || line.front() == '#') continue;
    list.words.insert(to_lower(line));
  }
  return list;
}

const StopWordList& builtin_stop_words() {
  static const StopWordList list = parse_stop_words(detail::kBuiltinStopWords);
  return list;
}

StopWordList load_stop_words(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open stop-word file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_stop_words(buf.str());
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '$' && (i == 0 || !is_token_char(text[i - 1]))) {
      if (const std::size_t len = placeholder_at(text, i)) {
        tokens.emplace_back(text.substr(i, len));
        i += len;
        continue;
      }
    }
    if (!is_token_char(text[i])) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < text.size() && is_token_char(text[i])) ++i;
    tokens.emplace_back(text.substr(start, i - start));
  }
  return tokens;
}

std::string normalize_token(std::string_view token) {
  if (is_placeholder(token)) return std::string(token);

  std::string kept;
  kept.reserve(token.size());
  for (char c : token) {
    if (is_token_char(c)) kept += c;
  }
  if (kept.empty()) return {};

  const std::string lower = to_lower(kept);
  if (starts_with(lower, "xfel") || ends_with(lower, "svr") || ends_with(lower, "server")) {
    return std::string(placeholder::kHost);
  }
  if (std::all_of(lower.begin(), lower.end(), [](unsigned char c) { return std::isdigit(c) != 0; })) {
    const bool zero = std::all_of(lower.begin(), lower.end(), [](char c) { return c == '0'; });
    return std::string(zero ? placeholder::kZero : placeholder::kNonZero);
  }
  return lower;
}

TokenSequence preprocess_text(std::string_view text, const StopWordList& stops) {
  TokenSequence out;
  for (const std::string& raw : tokenize(text)) {
    std::string token = normalize_token(raw);
    if (token.empty() || stops.contains(token)) continue;
    out.push_back(std::move(token));
  }
  return out;
}

TokenSequence preprocess_entry(const LogEntry& entry, const StopWordList& stops) {
  return preprocess_text(entry.text, stops);
}

std::string join_tokens(const TokenSequence& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

}  // namespace logad
