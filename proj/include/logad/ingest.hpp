#pragma once

#include <ctime>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace logad {

struct RawLogText {
  std::string source_id;
  std::string content;  // valid UTF-8
};

// Builds a RawLogText from arbitrary bytes; invalid UTF-8 sequences become U+FFFD.
RawLogText make_raw_log(std::string source_id, std::string_view bytes);

std::string sanitize_utf8(std::string_view bytes);

struct Timestamp {
  std::string text;  // prefix as it appeared in the log
  std::tm fields{};  // fields the pattern did not mention stay zero
};

struct LogEntry {
  std::string source_id;
  std::size_t index = 0;
  std::optional<Timestamp> timestamp;
  std::string text;
};

// strptime-style line-prefix formats.
struct TimestampPattern {
  std::string format;
};

// ISO-8601 (space or 'T' separated) and classic syslog.
std::vector<TimestampPattern> default_timestamp_patterns();

// Matches a timestamp pattern at the start of `line`. On success returns the
// parsed timestamp and the number of bytes consumed (including an optional
// fractional-seconds suffix).
std::optional<std::pair<Timestamp, std::size_t>> match_timestamp(
    std::string_view line, const std::vector<TimestampPattern>& patterns);

std::vector<LogEntry> split_entries(const RawLogText& raw,
                                    const std::vector<TimestampPattern>& patterns);

}  // namespace logad
