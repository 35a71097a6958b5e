#include "logad/scorer.hpp"

#include <algorithm>
#include <string>

#include "logad/error.hpp"

namespace logad {

namespace {

ObservationSequence slice(const ObservationSequence& obs, std::size_t lo, std::size_t hi) {
  return ObservationSequence(obs.begin() + static_cast<std::ptrdiff_t>(lo), obs.begin() + static_cast<std::ptrdiff_t>(hi));
}

// Keeps the forward state in step with the current parameters: rebuilt over
// the history whenever a refit replaces them.
class StreamingScorer {
 public:
  StreamingScorer(const ObservationSequence& obs, ScoreSeries& series) : obs_(obs), series_(series) {}

  void use(HmmParams params, bool degenerate) {
    series_.fits.push_back(std::move(params));
    series_.degenerate_fit = series_.degenerate_fit || degenerate;
    state_valid_ = false;
  }

  void score(std::size_t i) {
    const HmmParams& params = series_.fits.back();
    if (!state_valid_ || state_.length() != i) {
      state_ = forward_state(params, slice(obs_, 0, i));
      state_valid_ = true;
    }
    ScoredEntry e = score_entry(state_, params, obs_[i], i);
    e.fit_index = series_.fits.size() - 1;
    series_.entries.push_back(e);
  }

 private:
  const ObservationSequence& obs_;
  ScoreSeries& series_;
  ForwardState state_;
  bool state_valid_ = false;
};

FitResult fit_range(const ObservationSequence& obs, std::size_t lo, std::size_t hi, const FitConfig& cfg) {
  return fit_baum_welch(slice(obs, lo, hi), cfg);
}

FitResult warm_refit(const ObservationSequence& obs, std::size_t hi, const HmmParams& previous,
                     const FitConfig& cfg, const WarmStart& warm) {
  FitConfig warm_cfg = cfg;
  warm_cfg.initial_params = previous;
  warm_cfg.max_iterations = warm.refit_iterations;
  return fit_range(obs, 0, hi, warm_cfg);
}

}  // namespace

void validate_strategy(const ScoreStrategy& strategy) {
  if (const auto* w = std::get_if<SlidingWindow>(&strategy); w && w->window < 2) {
    throw Error(ErrorKind::Config, "sliding window length must be at least 2");
  }
  if (const auto* r = std::get_if<WarmStart>(&strategy); r && (r->refit_period < 1 || r->refit_iterations < 1)) {
    throw Error(ErrorKind::Config, "warm-start refit period and iterations must be at least 1");
  }
}

std::string strategy_name(const ScoreStrategy& strategy) {
  struct Visitor {
    std::string operator()(const FullHistory&) const { return "full"; }
    std::string operator()(const SlidingWindow& w) const { return "window(" + std::to_string(w.window) + ")"; }
    std::string operator()(const WarmStart& r) const {
      return "warm(" + std::to_string(r.refit_period) + "," + std::to_string(r.refit_iterations) + ")";
    }
  };
  return std::visit(Visitor{}, strategy);
}

ScoredEntry score_entry(ForwardState& state, const HmmParams& params, std::span<const double> o, std::size_t index) {
  const double step = state.extend(params, o);
  return ScoredEntry{index, -step, state.cumulative_log_likelihood(), 0};
}

std::vector<ScoredEntry> score_all(const HmmParams& params, const ObservationSequence& obs) {
  ForwardState state(params);
  std::vector<ScoredEntry> out;
  out.reserve(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) out.push_back(score_entry(state, params, obs[i], i));
  return out;
}

ScoreSeries score_with_params(const ObservationSequence& obs, std::size_t split, const HmmParams& params) {
  if (split > obs.size()) throw Error(ErrorKind::SplitOutOfRange, "split beyond the end of the sequence");
  ScoreSeries series;
  series.strategy = FullHistory{};
  series.split = split;
  StreamingScorer scorer(obs, series);
  scorer.use(params, false);
  for (std::size_t i = split; i < obs.size(); ++i) scorer.score(i);
  return series;
}

ScoreSeries score_sequence(const ObservationSequence& obs, std::size_t split, const ScoreStrategy& strategy,
                           const FitConfig& fit_cfg) {
  validate_strategy(strategy);
  if (split < 2 || split >= obs.size()) {
    throw Error(ErrorKind::SplitOutOfRange, "split " + std::to_string(split) + " outside [2, " +
                                                std::to_string(obs.size()) + ")");
  }
  ScoreSeries series;
  series.strategy = strategy;
  series.split = split;
  StreamingScorer scorer(obs, series);

  if (std::holds_alternative<FullHistory>(strategy)) {
    FitResult fit = fit_range(obs, 0, split, fit_cfg);
    scorer.use(std::move(fit.params), fit.degenerate);
    for (std::size_t i = split; i < obs.size(); ++i) scorer.score(i);
  } else if (const auto* w = std::get_if<SlidingWindow>(&strategy)) {
    for (std::size_t i = split; i < obs.size(); ++i) {
      const std::size_t lo = i > w->window ? i - w->window : 0;
      FitResult fit = fit_range(obs, lo, i, fit_cfg);
      scorer.use(std::move(fit.params), fit.degenerate);
      scorer.score(i);
    }
  } else {
    const auto& warm = std::get<WarmStart>(strategy);
    FitResult fit = fit_range(obs, 0, split, fit_cfg);
    scorer.use(fit.params, fit.degenerate);
    for (std::size_t i = split; i < obs.size(); ++i) {
      const std::size_t j = i - split;
      if (j > 0 && j % warm.refit_period == 0) {
        fit = warm_refit(obs, i, series.fits.back(), fit_cfg, warm);
        scorer.use(fit.params, fit.degenerate);
      }
      scorer.score(i);
    }
  }
  return series;
}

ScoreSeries score_with_contaminated_training(const ObservationSequence& obs, const ScoreStrategy& strategy,
                                             const FitConfig& fit_cfg) {
  validate_strategy(strategy);
  const std::size_t n = obs.size();
  if (n < 3) throw Error(ErrorKind::TooShort, "contaminated scoring needs at least 3 entries");
  const std::size_t min_fit = std::max<std::size_t>(2, fit_cfg.n_states);

  ScoreSeries series;
  series.strategy = strategy;
  series.split = 0;
  StreamingScorer scorer(obs, series);

  if (std::holds_alternative<FullHistory>(strategy)) {
    FitResult fit = fit_range(obs, 0, n, fit_cfg);
    scorer.use(std::move(fit.params), fit.degenerate);
    for (std::size_t i = 0; i < n; ++i) scorer.score(i);
  } else if (const auto* w = std::get_if<SlidingWindow>(&strategy)) {
    // Window of W entries ending at (and including) the scored entry.
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t end = i + 1;
      const std::size_t lo = end > w->window ? end - w->window : 0;
      const std::size_t hi = std::min(n, std::max(end, lo + min_fit));
      FitResult fit = fit_range(obs, lo, hi, fit_cfg);
      scorer.use(std::move(fit.params), fit.degenerate);
      scorer.score(i);
    }
  } else {
    const auto& warm = std::get<WarmStart>(strategy);
    const std::size_t first = std::min(n, min_fit);
    FitResult fit = fit_range(obs, 0, first, fit_cfg);
    scorer.use(fit.params, fit.degenerate);
    for (std::size_t i = 0; i < n; ++i) {
      if (i + 1 > first && i % warm.refit_period == 0) {
        fit = warm_refit(obs, i + 1, series.fits.back(), fit_cfg, warm);
        scorer.use(fit.params, fit.degenerate);
      }
      scorer.score(i);
    }
  }
  return series;
}

}  // namespace logad
