#pragma once

#include <functional>
#include <string>
#include <vector>

#include "logad/hmm.hpp"
#include "logad/scorer.hpp"

namespace logad::synth {

enum class Variant { Regular, Swapped, NovelEvent };

const char* to_string(Variant v);

struct MinimalScenario {
  Variant variant = Variant::Regular;
  std::size_t length = 8;  // >= 4
  EntryVector o1{1.0, 0.0, 0.0, 0.0};
  EntryVector o2{0.0, 1.0, 0.0, 0.0};
  EntryVector anomaly{0.7, 0.7, 0.0, 0.0};
};

// Alternating o1, o2 with the variant applied at the tail.
ObservationSequence gen_minimal(const MinimalScenario& scenario);

// Symbol label ("o1", "o2", "oa") of each position.
std::vector<std::string> minimal_labels(const MinimalScenario& scenario);

struct MinimalRun {
  Variant variant = Variant::Regular;
  std::vector<std::string> labels;
  std::vector<ScoredEntry> scores;  // one per position
  HmmParams params;
};

// Fits on every entry but the last (or on all entries when `contaminated`)
// and scores each position under the fitted parameters.
MinimalRun run_minimal(const MinimalScenario& scenario, bool contaminated, const FitConfig& cfg);

inline constexpr double kMaxPaths = 1e6;

// Exact log-likelihood by enumerating all N^T state paths. Throws TooLarge
// when N^T exceeds kMaxPaths.
double brute_force_loglik(const HmmParams& params, const ObservationSequence& obs);

// Central differences, one coordinate at a time.
std::vector<double> finite_diff_gradient(const std::function<double(const std::vector<double>&)>& loss,
                                         std::vector<double> x, double step);

// Random valid parameters (Dirichlet-ish probabilities, variances in [0.2, 2]).
HmmParams random_params(std::size_t n_states, std::size_t dim, std::uint64_t seed);

}  // namespace logad::synth
