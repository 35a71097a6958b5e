#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "logad/embedding.hpp"
#include "logad/hmm.hpp"
#include "logad/ingest.hpp"
#include "logad/preprocess.hpp"
#include "logad/scorer.hpp"

namespace logad {

enum class ReportFormat { Csv, Json };

struct PipelineConfig {
  std::vector<std::string> timestamp_formats;  // empty means the defaults
  std::string stop_words_path;                 // empty means the built-in list
  EmbedConfig embed;
  FitConfig fit;
  ScoreStrategy strategy = FullHistory{};
  std::size_t holdout = 50;                    // trailing entries kept out of training
  std::optional<double> train_fraction;        // overrides holdout when set
  ReportFormat format = ReportFormat::Csv;

  std::vector<TimestampPattern> timestamp_patterns() const;
  void validate() const;
};

// kind is one of "full", "window", "warm"; throws Config otherwise.
ScoreStrategy parse_strategy(const std::string& kind, std::size_t window, std::size_t refit_period,
                             std::size_t refit_iterations);
ReportFormat parse_format(const std::string& name);

// Number of leading training entries for a log of n entries. Throws Config
// when fewer than two entries would be left for training.
std::size_t training_split(std::size_t n_entries, const PipelineConfig& cfg);

inline constexpr int kModelFormatVersion = 1;

struct ModelFile {
  int version = kModelFormatVersion;
  std::string source_id;
  PipelineConfig config;
  StopWordList stop_words;
  EmbeddingTable embedding;
  HmmParams hmm;

  bool operator==(const ModelFile& other) const;
};

std::string serialize_model(const ModelFile& model);
ModelFile deserialize_model(const std::string& text);
void save_model(const ModelFile& model, const std::filesystem::path& path);
ModelFile load_model(const std::filesystem::path& path);

// Reads a JSON config file; unknown keys are rejected.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(const std::string& json_text);

struct PreparedLog {
  std::vector<LogEntry> entries;
  std::vector<TokenSequence> tokens;
};

PreparedLog prepare_log(const RawLogText& raw, const std::vector<TimestampPattern>& patterns,
                        const StopWordList& stops);

struct CorpusStats {
  std::size_t entries = 0;
  std::size_t training_entries = 0;
  std::size_t unique_tokens = 0;    // vocabulary size including "$unk"
  std::size_t unique_messages = 0;  // distinct normalized entries
};

struct TrainOutcome {
  ModelFile model;
  CorpusStats stats;
  std::vector<double> em_log_likelihoods;
  bool degenerate_fit = false;
};

TrainOutcome train_pipeline(const RawLogText& raw, const PipelineConfig& cfg);

struct ReportRow {
  std::size_t index = 0;
  std::string timestamp;
  std::string normalized_text;
  double score = 0.0;
  double cumulative_loglik = 0.0;
};

struct ScoreReport {
  std::string source_id;
  std::string strategy;
  std::size_t split = 0;
  std::vector<ReportRow> rows;
  ScoreSeries series;
};

// Scores the held-out tail of `raw` with a trained model. FullHistory uses the
// stored HMM; the other strategies refit with the model's fit settings.
ScoreReport score_pipeline(const RawLogText& raw, const ModelFile& model,
                           const ScoreStrategy& strategy, std::optional<std::size_t> split_override = {});

std::string format_csv(const ScoreReport& report);
std::string format_json(const ScoreReport& report);
std::string format_series_csv(const ScoreReport& report);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace logad
