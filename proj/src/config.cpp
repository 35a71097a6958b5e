#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "logad/error.hpp"
#include "logad/pipeline.hpp"
#include "serialization.hpp"

namespace logad {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorKind::Config, where + " must be an object");
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* key : allowed) ok = ok || item.key() == key;
    if (!ok) throw Error(ErrorKind::Config, "unknown key '" + item.key() + "' in " + where);
  }
}

template <class T>
void read_if(const json& obj, const char* key, T& out) {
  if (auto it = obj.find(key); it != obj.end()) out = it->get<T>();
}

}  // namespace

std::vector<TimestampPattern> PipelineConfig::timestamp_patterns() const {
  if (timestamp_formats.empty()) return default_timestamp_patterns();
  std::vector<TimestampPattern> out;
  for (const auto& f : timestamp_formats) out.push_back({f});
  return out;
}

void PipelineConfig::validate() const {
  embed.validate();
  fit.validate();
  validate_strategy(strategy);
  if (train_fraction && !(*train_fraction > 0.0 && *train_fraction <= 1.0)) {
    throw Error(ErrorKind::Config, "train fraction must lie in (0, 1]");
  }
  for (const auto& f : timestamp_formats) {
    if (f.empty()) throw Error(ErrorKind::Config, "empty timestamp format");
  }
}

std::size_t training_split(std::size_t n_entries, const PipelineConfig& cfg) {
  std::size_t split = 0;
  if (cfg.train_fraction) {
    split = static_cast<std::size_t>(std::floor(static_cast<double>(n_entries) * *cfg.train_fraction));
  } else {
    split = n_entries > cfg.holdout ? n_entries - cfg.holdout : 0;
  }
  if (split < 2) {
    throw Error(ErrorKind::Config, "the train/test split leaves " + std::to_string(split) +
                                       " training entries of " + std::to_string(n_entries) + "; need at least 2");
  }
  return split;
}

json config_to_json(const PipelineConfig& cfg) {
  json strategy;
  if (std::holds_alternative<FullHistory>(cfg.strategy)) {
    strategy = {{"kind", "full"}};
  } else if (const auto* w = std::get_if<SlidingWindow>(&cfg.strategy)) {
    strategy = {{"kind", "window"}, {"window", w->window}};
  } else {
    const auto& r = std::get<WarmStart>(cfg.strategy);
    strategy = {{"kind", "warm"}, {"refit_period", r.refit_period}, {"refit_iterations", r.refit_iterations}};
  }
  json j = {
      {"timestamp_formats", cfg.timestamp_formats},
      {"stop_words", cfg.stop_words_path},
      {"embedding",
       {{"dim", cfg.embed.dim},
        {"window", cfg.embed.window},
        {"negatives", cfg.embed.negatives},
        {"epochs", cfg.embed.epochs},
        {"learning_rate", cfg.embed.learning_rate},
        {"min_learning_rate", cfg.embed.min_learning_rate},
        {"min_count", cfg.embed.min_count},
        {"seed", cfg.embed.seed}}},
      {"hmm",
       {{"states", cfg.fit.n_states},
        {"max_iterations", cfg.fit.max_iterations},
        {"tolerance", cfg.fit.tolerance},
        {"var_floor", cfg.fit.var_floor},
        {"seed", cfg.fit.seed}}},
      {"strategy", strategy},
      {"holdout", cfg.holdout},
      {"format", cfg.format == ReportFormat::Json ? "json" : "csv"},
  };
  if (cfg.train_fraction) j["train_fraction"] = *cfg.train_fraction;
  return j;
}

PipelineConfig config_from_json(const json& j) {
  PipelineConfig cfg;
  try {
    reject_unknown(j, {"timestamp_formats", "stop_words", "embedding", "hmm", "strategy", "holdout",
                       "train_fraction", "format"},
                   "config");
    read_if(j, "timestamp_formats", cfg.timestamp_formats);
    read_if(j, "stop_words", cfg.stop_words_path);
    read_if(j, "holdout", cfg.holdout);
    if (auto it = j.find("train_fraction"); it != j.end() && !it->is_null()) cfg.train_fraction = it->get<double>();

    if (auto it = j.find("embedding"); it != j.end()) {
      const json& e = *it;
      reject_unknown(e, {"dim", "window", "negatives", "epochs", "learning_rate", "min_learning_rate", "min_count", "seed"},
                     "embedding");
      read_if(e, "dim", cfg.embed.dim);
      read_if(e, "window", cfg.embed.window);
      read_if(e, "negatives", cfg.embed.negatives);
      read_if(e, "epochs", cfg.embed.epochs);
      read_if(e, "learning_rate", cfg.embed.learning_rate);
      read_if(e, "min_learning_rate", cfg.embed.min_learning_rate);
      read_if(e, "min_count", cfg.embed.min_count);
      read_if(e, "seed", cfg.embed.seed);
    }
    if (auto it = j.find("hmm"); it != j.end()) {
      const json& h = *it;
      reject_unknown(h, {"states", "max_iterations", "tolerance", "var_floor", "seed"}, "hmm");
      read_if(h, "states", cfg.fit.n_states);
      read_if(h, "max_iterations", cfg.fit.max_iterations);
      read_if(h, "tolerance", cfg.fit.tolerance);
      read_if(h, "var_floor", cfg.fit.var_floor);
      read_if(h, "seed", cfg.fit.seed);
    }
    if (auto it = j.find("strategy"); it != j.end()) {
      const json& s = *it;
      reject_unknown(s, {"kind", "window", "refit_period", "refit_iterations"}, "strategy");
      const std::string kind = s.value("kind", "full");
      cfg.strategy = parse_strategy(kind, s.value("window", SlidingWindow{}.window),
                                    s.value("refit_period", WarmStart{}.refit_period),
                                    s.value("refit_iterations", WarmStart{}.refit_iterations));
    }
    if (auto it = j.find("format"); it != j.end()) cfg.format = parse_format(it->get<std::string>());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Config, std::string("malformed config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ScoreStrategy parse_strategy(const std::string& kind, std::size_t window, std::size_t refit_period,
                             std::size_t refit_iterations) {
  if (kind == "full") return FullHistory{};
  if (kind == "window") return SlidingWindow{window};
  if (kind == "warm") return WarmStart{refit_period, refit_iterations};
  throw Error(ErrorKind::Config, "unknown strategy '" + kind + "' (expected full, window or warm)");
}

ReportFormat parse_format(const std::string& name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "json") return ReportFormat::Json;
  throw Error(ErrorKind::Config, "unknown report format '" + name + "'");
}

PipelineConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Config, std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Config, "cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace logad
