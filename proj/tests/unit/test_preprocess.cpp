#include <doctest.h>

#include <algorithm>
#include <cctype>

#include "logad/error.hpp"
#include "logad/preprocess.hpp"
#include "logad/random.hpp"
#include "test_logs.hpp"

using namespace logad;

TEST_CASE("tokenize splits on characters outside [A-Za-z0-9/]") {
  CHECK(tokenize("ErrorCount=3") == std::vector<std::string>{"ErrorCount", "3"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("a/b c") == std::vector<std::string>{"a/b", "c"});
  CHECK(tokenize("  --==  ").empty());
  CHECK(tokenize("clnt_create: error!") == std::vector<std::string>{"clnt", "create", "error"});
  CHECK(tokenize("caf\xC3\xA9 bar") == std::vector<std::string>{"caf", "bar"});
}

TEST_CASE("tokenize keeps placeholders whole") {
  CHECK(tokenize("errorcount $nz $zero $host $unk") ==
        std::vector<std::string>{"errorcount", "$nz", "$zero", "$host", "$unk"});
  // Not placeholders: '$' glued to a word, or an unknown name.
  CHECK(tokenize("a$nz $nzx $foo") == std::vector<std::string>{"a", "nz", "nzx", "foo"});
}

TEST_CASE("normalize_token rules") {
  CHECK(normalize_token("3") == "$nz");
  CHECK(normalize_token("0") == "$zero");
  CHECK(normalize_token("000") == "$zero");
  CHECK(normalize_token("0010") == "$nz");
  CHECK(normalize_token("xfelcpulla12s") == "$host");
  CHECK(normalize_token("XFELSVR01") == "$host");
  CHECK(normalize_token("dbsvr") == "$host");
  CHECK(normalize_token("MyServer") == "$host");
  CHECK(normalize_token("Linux") == "linux");
  CHECK(normalize_token("12s") == "12s");
  CHECK(normalize_token("/var/log") == "/var/log");
  CHECK(normalize_token("a-b!") == "ab");
  CHECK(normalize_token("!!") == "");
  CHECK(normalize_token("$nz") == "$nz");
}

TEST_CASE("preprocess_entry examples") {
  const auto& stops = builtin_stop_words();
  CHECK(preprocess_text("RemoteErrors: ErrorCount=3", stops) ==
        TokenSequence{"remoteerrors", "errorcount", "$nz"});
  CHECK(preprocess_text("the of and", stops).empty());
  CHECK(preprocess_text("rpccheck nullproc error", stops) == TokenSequence{"rpccheck", "nullproc", "error"});
  LogEntry entry;
  entry.text = "Connected to xfelsvr03 after 0 retries";
  CHECK(preprocess_entry(entry, stops) == TokenSequence{"connected", "$host", "$zero", "retries"});
}

TEST_CASE("case-study listing lines normalize exactly") {
  for (const auto& line : testing::golden_lines()) {
    CAPTURE(line.raw);
    CHECK(join_tokens(preprocess_text(line.raw, builtin_stop_words())) == line.normalized);
  }
}

TEST_CASE("built-in stop words match the shipped resource") {
  const StopWordList file = load_stop_words(std::string(LOGAD_RESOURCE_DIR) + "/stopwords.txt");
  CHECK(file.words == builtin_stop_words().words);
  CHECK(builtin_stop_words().words.size() > 100);
  // Negations carry meaning in watchdog messages ("no process", "pid not match").
  CHECK_FALSE(builtin_stop_words().contains("no"));
  CHECK_FALSE(builtin_stop_words().contains("not"));
  CHECK(builtin_stop_words().contains("the"));
  CHECK(builtin_stop_words().contains("does"));
}

TEST_CASE("stop-word parsing and loading") {
  const StopWordList list = parse_stop_words("# comment\nFoo\n\n  bar  \n");
  CHECK(list.words == std::set<std::string, std::less<>>{"foo", "bar"});
  CHECK_THROWS_AS(load_stop_words("/nonexistent/stopwords.txt"), Error);
}

TEST_CASE("preprocessing properties on random text") {
  const char* pieces[] = {"Error", "RPC", "=", "0", "00", "42", " ", ", ", "the", "XFELdaq", "mysvr", "/tmp/x",
                          "$nz", "$", "Not", "No", "a-b", "\xC3\xA9", "\t", "12s", "Server", ":", "(", ")"};
  const auto& stops = builtin_stop_words();
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    Rng rng(seed);
    std::string text;
    for (int i = 0; i < 25; ++i) text += pieces[rng.index(std::size(pieces))];
    CAPTURE(text);
    const TokenSequence tokens = preprocess_text(text, stops);
    for (const auto& t : tokens) {
      CHECK_FALSE(t.empty());
      CHECK_FALSE(stops.contains(t));
      const bool charset_ok = std::all_of(t.begin(), t.end(), [](unsigned char c) {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '/' || c == '$';
      });
      CHECK(charset_ok);
    }
    CHECK(preprocess_text(join_tokens(tokens), stops) == tokens);

    for (const auto& raw : tokenize(text)) {
      if (std::all_of(raw.begin(), raw.end(), [](unsigned char c) { return std::isdigit(c) != 0; })) {
        const std::string n = normalize_token(raw);
        CHECK((n == "$zero" || n == "$nz"));
      }
    }
  }
}
