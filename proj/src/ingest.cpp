#include "logad/ingest.hpp"

#include <time.h>

#include <cctype>
#include <cstring>

namespace logad {

namespace {

constexpr std::string_view kReplacement = "\xEF\xBF\xBD";

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// Length of the valid UTF-8 sequence starting at s[i], or 0 if invalid.
std::size_t utf8_sequence_length(std::string_view s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) return 1;
  std::size_t len = 0;
  unsigned char lo = 0x80, hi = 0xBF;
  if (b0 >= 0xC2 && b0 <= 0xDF) {
    len = 2;
  } else if (b0 >= 0xE0 && b0 <= 0xEF) {
    len = 3;
    if (b0 == 0xE0) lo = 0xA0;
    if (b0 == 0xED) hi = 0x9F;  // no surrogates
  } else if (b0 >= 0xF0 && b0 <= 0xF4) {
    len = 4;
    if (b0 == 0xF0) lo = 0x90;
    if (b0 == 0xF4) hi = 0x8F;
  } else {
    return 0;
  }
  if (i + len > s.size()) return 0;
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    const unsigned char kl = (k == 1) ? lo : 0x80;
    const unsigned char kh = (k == 1) ? hi : 0xBF;
    if (b < kl || b > kh) return 0;
  }
  return len;
}

}  // namespace

std::string sanitize_utf8(std::string_view bytes) {
  std::string out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  while (i < bytes.size()) {
    const std::size_t len = utf8_sequence_length(bytes, i);
    if (len == 0) {
      out += kReplacement;
      ++i;
    } else {
      out.append(bytes.substr(i, len));
      i += len;
    }
  }
  return out;
}

RawLogText make_raw_log(std::string source_id, std::string_view bytes) {
  return RawLogText{std::move(source_id), sanitize_utf8(bytes)};
}

std::vector<TimestampPattern> default_timestamp_patterns() {
  return {{"%Y-%m-%d %H:%M:%S"}, {"%Y-%m-%dT%H:%M:%S"}, {"%b %d %H:%M:%S"}};
}

std::optional<std::pair<Timestamp, std::size_t>> match_timestamp(
    std::string_view line, const std::vector<TimestampPattern>& patterns) {
  // Indented lines are continuations, never timestamps.
  if (line.empty() || is_space(line.front())) return std::nullopt;
  const std::string buf(line);  // strptime needs a terminated string
  for (const auto& pattern : patterns) {
    std::tm tm{};
    const char* end = ::strptime(buf.c_str(), pattern.format.c_str(), &tm);
    if (end == nullptr) continue;
    std::size_t consumed = static_cast<std::size_t>(end - buf.c_str());
    // Optional fractional seconds: ".123" or ",123".
    if (consumed + 1 < buf.size() && (buf[consumed] == '.' || buf[consumed] == ',') &&
        std::isdigit(static_cast<unsigned char>(buf[consumed + 1]))) {
      ++consumed;
      while (consumed < buf.size() && std::isdigit(static_cast<unsigned char>(buf[consumed]))) ++consumed;
    }
    // The prefix must end at a token boundary.
    if (consumed < buf.size() && !is_space(buf[consumed]) && buf[consumed] != ':' &&
        buf[consumed] != ']' && buf[consumed] != '|') {
      continue;
    }
    Timestamp ts;
    ts.text = std::string(trim(line.substr(0, consumed)));
    ts.fields = tm;
    return std::make_pair(std::move(ts), consumed);
  }
  return std::nullopt;
}

std::vector<LogEntry> split_entries(const RawLogText& raw, const std::vector<TimestampPattern>& patterns) {
  std::vector<LogEntry> entries;
  std::string_view rest = raw.content;
  while (!rest.empty()) {
    const std::size_t nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    rest = (nl == std::string_view::npos) ? std::string_view{} : rest.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (auto match = match_timestamp(line, patterns)) {
      LogEntry entry;
      entry.source_id = raw.source_id;
      entry.index = entries.size();
      entry.timestamp = std::move(match->first);
      std::string_view body = line.substr(match->second);
      entry.text = std::string(trim(body));
      entries.push_back(std::move(entry));
      continue;
    }

    const std::string_view body = trim(line);
    if (body.empty()) continue;
    if (entries.empty()) {
      LogEntry entry;
      entry.source_id = raw.source_id;
      entry.index = 0;
      entry.text = std::string(body);
      entries.push_back(std::move(entry));
    } else {
      std::string& text = entries.back().text;
      if (!text.empty()) text += ' ';
      text += body;
    }
  }
  return entries;
}

}  // namespace logad
