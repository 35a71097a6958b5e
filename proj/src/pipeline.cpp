#include "logad/pipeline.hpp"

#include <cstdio>
#include <set>
#include <sstream>

#include <json.hpp>

#include "logad/error.hpp"

namespace logad {

namespace {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

ObservationSequence embed_all(const std::vector<TokenSequence>& tokens, const EmbeddingTable& table) {
  ObservationSequence obs;
  obs.reserve(tokens.size());
  for (const auto& t : tokens) obs.push_back(embed_entry(t, table));
  return obs;
}

}  // namespace

PreparedLog prepare_log(const RawLogText& raw, const std::vector<TimestampPattern>& patterns, const StopWordList& stops) {
  PreparedLog out;
  out.entries = split_entries(raw, patterns);
  out.tokens.reserve(out.entries.size());
  for (const auto& e : out.entries) out.tokens.push_back(preprocess_entry(e, stops));
  return out;
}

TrainOutcome train_pipeline(const RawLogText& raw, const PipelineConfig& cfg) {
  cfg.validate();
  TrainOutcome outcome;
  ModelFile& model = outcome.model;
  model.source_id = raw.source_id;
  model.config = cfg;
  model.stop_words = cfg.stop_words_path.empty() ? builtin_stop_words() : load_stop_words(cfg.stop_words_path);

  const PreparedLog log = prepare_log(raw, cfg.timestamp_patterns(), model.stop_words);
  if (log.entries.empty()) throw Error(ErrorKind::EmptyCorpus, "no log entries found in " + raw.source_id);
  const std::size_t split = training_split(log.entries.size(), cfg);

  model.embedding = train_cbow(log.tokens, cfg.embed);
  const ObservationSequence obs = embed_all(log.tokens, model.embedding);

  const FitResult fit = fit_baum_welch(ObservationSequence(obs.begin(), obs.begin() + static_cast<std::ptrdiff_t>(split)), cfg.fit);
  model.hmm = fit.params;
  outcome.em_log_likelihoods = fit.log_likelihoods;
  outcome.degenerate_fit = fit.degenerate;

  std::set<std::string> messages;
  for (const auto& t : log.tokens) messages.insert(join_tokens(t));
  outcome.stats = CorpusStats{log.entries.size(), split, model.embedding.vocab.size(), messages.size()};
  return outcome;
}

ScoreReport score_pipeline(const RawLogText& raw, const ModelFile& model, const ScoreStrategy& strategy,
                           std::optional<std::size_t> split_override) {
  validate_strategy(strategy);
  const PreparedLog log = prepare_log(raw, model.config.timestamp_patterns(), model.stop_words);
  const ObservationSequence obs = embed_all(log.tokens, model.embedding);
  const std::size_t n = obs.size();
  const std::size_t split = split_override ? *split_override : training_split(n, model.config);
  if (split > n) throw Error(ErrorKind::SplitOutOfRange, "split beyond the end of the log");
  if (model.hmm.dim() != model.embedding.dim) throw Error(ErrorKind::DimensionMismatch, "model HMM and embedding dimensions differ");

  ScoreReport report;
  report.source_id = raw.source_id;
  report.strategy = strategy_name(strategy);
  report.split = split;
  if (split == n || std::holds_alternative<FullHistory>(strategy)) {
    report.series = score_with_params(obs, split, model.hmm);
    report.series.strategy = strategy;
  } else {
    FitConfig fit_cfg = model.config.fit;
    fit_cfg.initial_params.reset();
    report.series = score_sequence(obs, split, strategy, fit_cfg);
  }
  report.series.source_id = raw.source_id;

  for (const auto& e : report.series.entries) {
    const LogEntry& entry = log.entries[e.index];
    report.rows.push_back(ReportRow{e.index, entry.timestamp ? entry.timestamp->text : std::string{},
                                    join_tokens(log.tokens[e.index]), e.score, e.cumulative_loglik});
  }
  return report;
}

std::string format_csv(const ScoreReport& report) {
  std::string out = "index,timestamp,normalized_text,score\n";
  for (const auto& r : report.rows) {
    out += std::to_string(r.index) + ',' + csv_field(r.timestamp) + ',' + csv_field(r.normalized_text) + ',' +
           format_double(r.score) + '\n';
  }
  return out;
}

std::string format_json(const ScoreReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"index", r.index},
                    {"timestamp", r.timestamp},
                    {"normalized_text", r.normalized_text},
                    {"score", r.score},
                    {"cumulative_loglik", r.cumulative_loglik}});
  }
  const nlohmann::json j = {
      {"source_id", report.source_id}, {"strategy", report.strategy}, {"split", report.split}, {"entries", rows}};
  return j.dump(2) + "\n";
}

std::string format_series_csv(const ScoreReport& report) {
  std::string out = "index,score\n";
  for (const auto& r : report.rows) out += std::to_string(r.index) + ',' + format_double(r.score) + '\n';
  return out;
}

}  // namespace logad
