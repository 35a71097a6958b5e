#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "logad/pipeline.hpp"
#include "test_logs.hpp"

namespace fs = std::filesystem;
using namespace logad;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("logad_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args) {
  const std::string cmd = std::string(LOGAD_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

int run_capture(const std::string& args, const std::string& out_file) {
  const std::string cmd = std::string(LOGAD_CLI_PATH) + " " + args + " >" + out_file + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("cli: train and score") {
  TempDir dir;
  write_file(dir / "node7.log", testing::synthetic_watchdog_log(90, 4, 80));
  CHECK(run_capture("train " + dir / "node7.log" + " --model " + dir / "m.json --epochs 5 --dim 8 --holdout 20",
                    dir / "train.out") == 0);
  const std::string stats = read_file(dir / "train.out");
  CHECK(stats.find("source: node7") != std::string::npos);
  CHECK(stats.find("unique tokens: ") != std::string::npos);

  CHECK(run("score " + dir / "node7.log" + " --model " + dir / "m.json -o " + dir / "r.csv --series " + dir / "s.csv") == 0);
  const std::string report = read_file(dir / "r.csv");
  CHECK(report.rfind("index,timestamp,normalized_text,score\n", 0) == 0);
  CHECK(std::count(report.begin(), report.end(), '\n') == 21);
  CHECK(read_file(dir / "s.csv").rfind("index,score\n", 0) == 0);

  CHECK(run("score " + dir / "node7.log" + " --model " + dir / "m.json --format json -o " + dir / "r.json") == 0);
  CHECK(read_file(dir / "r.json").front() == '{');
  CHECK(run("score " + dir / "node7.log" + " --model " + dir / "m.json --strategy window --window 30 -o " + dir / "w.csv") == 0);
  CHECK(run("score " + dir / "node7.log" + " --model " + dir / "m.json --strategy warm -o " + dir / "ws.csv") == 0);

  // Empty test segment.
  CHECK(run("score " + dir / "node7.log" + " --model " + dir / "m.json --split 90 -o " + dir / "e.csv") == 0);
  CHECK(read_file(dir / "e.csv") == "index,timestamp,normalized_text,score\n");
}

TEST_CASE("cli: training on a three-token corpus") {
  TempDir dir;
  write_file(dir / "t.log",
             "2023-05-01 00:00:00 alpha beta\n2023-05-01 00:00:01 beta gamma\n2023-05-01 00:00:02 gamma alpha\n");
  CHECK(run_capture("train " + dir / "t.log --model " + dir / "m.json --epochs 2 --holdout 1", dir / "out") == 0);
  CHECK(read_file(dir / "out").find("unique tokens: 4\n") != std::string::npos);
}

TEST_CASE("cli: exit codes") {
  TempDir dir;
  write_file(dir / "a.log", testing::synthetic_watchdog_log(60, 5, 55));
  CHECK(run("train " + dir / "a.log --model " + dir / "m.json --config " + dir / "missing.json") == 2);
  write_file(dir / "bad.json", "{\"embedding\": {\"nope\": 1}}");
  CHECK(run("train " + dir / "a.log --model " + dir / "m.json --config " + dir / "bad.json") == 2);
  CHECK(run("train " + dir / "missing.log --model " + dir / "m.json") == 1);
  // 30 entries cannot cover the default holdout of 50.
  write_file(dir / "short.log", testing::synthetic_watchdog_log(30, 5, 25));
  CHECK(run("train " + dir / "short.log --model " + dir / "m.json") == 2);
  CHECK(run("train " + dir / "a.log --model " + dir / "m.json --strategy sideways") == 2);
}

TEST_CASE("cli: data and model errors") {
  TempDir dir;
  write_file(dir / "a.log", testing::synthetic_watchdog_log(60, 5, 55));
  write_file(dir / "stop.log", "2023-05-01 00:00:00 the\n2023-05-01 00:00:01 of\n2023-05-01 00:00:02 and\n");
  CHECK(run("train " + dir / "stop.log --model " + dir / "m.json --holdout 1") == 3);
  write_file(dir / "junk.json", "{\"format\": \"something-else\"}");
  CHECK(run("score " + dir / "a.log --model " + dir / "junk.json") == 3);
  CHECK(run("score " + dir / "a.log --model " + dir / "absent.json") == 1);
  CHECK(run("frobnicate") == 2);
}

TEST_CASE("cli: demo-minimal") {
  TempDir dir;
  CHECK(run("demo-minimal") == 0);
  CHECK(run("demo-minimal --contaminated") == 0);
  CHECK(run_capture("demo-minimal --variant swapped", dir / "one.out") == 0);
  const std::string text = read_file(dir / "one.out");
  std::size_t rows = 0;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && std::isdigit(static_cast<unsigned char>(line.front()))) ++rows;
  }
  CHECK(rows == 8);
}
