#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "logad/hmm.hpp"

namespace logad {

struct FullHistory {};

struct SlidingWindow {
  std::size_t window = 50;  // W >= 2
};

struct WarmStart {
  std::size_t refit_period = 1;     // R >= 1
  std::size_t refit_iterations = 5;
};

using ScoreStrategy = std::variant<FullHistory, SlidingWindow, WarmStart>;

void validate_strategy(const ScoreStrategy& strategy);
std::string strategy_name(const ScoreStrategy& strategy);

struct ScoredEntry {
  std::size_t index = 0;
  double score = 0.0;             // -log p(o_i | o_1..o_{i-1})
  double cumulative_loglik = 0.0; // log p(o_1..o_i)
  std::size_t fit_index = 0;      // which entry of ScoreSeries::fits scored this entry
};

struct ScoreSeries {
  std::string source_id;
  std::vector<ScoredEntry> entries;
  ScoreStrategy strategy;
  std::size_t split = 0;
  std::vector<HmmParams> fits;  // parameters in the order they were used
  bool degenerate_fit = false;
};

// Scores one new observation against the filtering state and advances it.
ScoredEntry score_entry(ForwardState& state, const HmmParams& params, std::span<const double> o,
                        std::size_t index);

// Scores every position of `obs` under fixed parameters.
std::vector<ScoredEntry> score_all(const HmmParams& params, const ObservationSequence& obs);

// Scores entries [split, n). The history used for each score is the whole
// prefix; only the data used to estimate parameters depends on the strategy.
ScoreSeries score_sequence(const ObservationSequence& obs, std::size_t split,
                           const ScoreStrategy& strategy, const FitConfig& fit_cfg);

// FullHistory with externally supplied parameters (no fitting).
ScoreSeries score_with_params(const ObservationSequence& obs, std::size_t split, const HmmParams& params);

// Scores every entry with fits that include the scored entries themselves.
ScoreSeries score_with_contaminated_training(const ObservationSequence& obs,
                                             const ScoreStrategy& strategy,
                                             const FitConfig& fit_cfg);

}  // namespace logad
