#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "logad/matrix.hpp"

namespace logad {

using ObservationSequence = std::vector<EntryVector>;

// Gaussian-emission HMM with diagonal covariance.
struct HmmParams {
  std::vector<double> initial;  // N
  Matrix transition;            // N x N, row-stochastic
  Matrix means;                 // N x H
  Matrix variances;             // N x H, every entry >= var_floor
  double var_floor = 1e-3;

  std::size_t n_states() const { return initial.size(); }
  std::size_t dim() const { return means.cols; }

  // Throws InvalidArgument describing the first violated invariant.
  void validate(double tol = 1e-9) const;

  bool operator==(const HmmParams&) const = default;
};

// log N(o; mean_j, diag(var_j)).
double emission_log_density(const HmmParams& params, std::size_t state, std::span<const double> o);

// log p(o_1..o_T) by the log-space forward recursion.
double log_likelihood(const HmmParams& params, const ObservationSequence& obs);

// Filtering state after a prefix of observations. An empty state (no
// observations yet) predicts the first step from the initial distribution.
class ForwardState {
 public:
  ForwardState() = default;
  explicit ForwardState(const HmmParams& params);

  // Consumes one observation; returns log p(o | previous observations).
  double extend(const HmmParams& params, std::span<const double> o);

  // log p(o | previous observations) without consuming it.
  double predictive_log_density(const HmmParams& params, std::span<const double> o) const;

  // p(state_t = j | o_1..o_t); the initial distribution when length() == 0.
  const std::vector<double>& posterior() const { return posterior_; }
  double cumulative_log_likelihood() const { return cumulative_; }
  std::size_t length() const { return length_; }

 private:
  std::vector<double> log_prior(const HmmParams& params) const;

  std::vector<double> posterior_;
  std::vector<double> log_posterior_;
  double cumulative_ = 0.0;
  std::size_t length_ = 0;
};

ForwardState forward_state(const HmmParams& params, const ObservationSequence& obs_prefix);

struct FitConfig {
  std::size_t n_states = 2;
  std::size_t max_iterations = 100;
  double tolerance = 1e-4;  // on log-likelihood gain
  double var_floor = 1e-3;
  std::uint64_t seed = 42;
  std::optional<HmmParams> initial_params;  // warm start

  void validate() const;
};

struct FitResult {
  HmmParams params;
  std::vector<double> log_likelihoods;  // one per E-step
  bool converged = false;
  bool degenerate = false;  // every observation identical with n_states > 1
};

// Seeded initialization: farthest-point means, global variances, jittered
// uniform initial and transition probabilities.
HmmParams initialize_params(const ObservationSequence& obs, const FitConfig& cfg);

// Baum-Welch. Throws TooShort for fewer than max(2, n_states) observations
// and DimensionMismatch for ragged input.
FitResult fit_baum_welch(const ObservationSequence& obs, const FitConfig& cfg);

ObservationSequence sample(const HmmParams& params, std::size_t length, std::uint64_t seed);

// Same, also returning the hidden state path.
ObservationSequence sample(const HmmParams& params, std::size_t length, std::uint64_t seed,
                           std::vector<std::size_t>* states);

}  // namespace logad
