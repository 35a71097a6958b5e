#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "logad/error.hpp"
#include "logad/hmm.hpp"
#include "logad/synth.hpp"

using namespace logad;

namespace {

HmmParams small_model() {
  HmmParams p;
  p.initial = {0.6, 0.4};
  p.transition = Matrix(2, 2);
  p.transition.data = {0.7, 0.3, 0.2, 0.8};
  p.means = Matrix(2, 1);
  p.means.data = {0.0, 2.0};
  p.variances = Matrix(2, 1);
  p.variances.data = {1.0, 0.5};
  return p;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

HmmParams permute(const HmmParams& p, const std::vector<std::size_t>& perm) {
  HmmParams q = p;
  const std::size_t n = p.n_states();
  for (std::size_t i = 0; i < n; ++i) {
    q.initial[i] = p.initial[perm[i]];
    for (std::size_t j = 0; j < n; ++j) q.transition(i, j) = p.transition(perm[i], perm[j]);
    for (std::size_t d = 0; d < p.dim(); ++d) {
      q.means(i, d) = p.means(perm[i], d);
      q.variances(i, d) = p.variances(perm[i], d);
    }
  }
  return q;
}

HmmParams two_state_truth(std::size_t dim) {
  HmmParams p;
  p.initial = {0.5, 0.5};
  p.transition = Matrix(2, 2);
  p.transition.data = {0.9, 0.1, 0.2, 0.8};
  p.means = Matrix(2, dim, 0.0);
  for (std::size_t d = 0; d < dim; ++d) p.means(1, d) = 1.5;
  p.variances = Matrix(2, dim, 0.25);
  return p;
}

}  // namespace

TEST_CASE("single state, single observation is the Gaussian log-pdf") {
  HmmParams p;
  p.initial = {1.0};
  p.transition = Matrix(1, 1, 1.0);
  p.means = Matrix(1, 2);
  p.means.data = {0.0, 1.0};
  p.variances = Matrix(1, 2);
  p.variances.data = {1.0, 4.0};
  const ObservationSequence obs{{1.0, 1.0}};
  // Reference value computed independently (scipy multivariate_normal.logpdf).
  CHECK(log_likelihood(p, obs) == doctest::Approx(-3.0310242469692907).epsilon(1e-12));
  CHECK(emission_log_density(p, 0, obs[0]) == doctest::Approx(-3.0310242469692907).epsilon(1e-12));
}

TEST_CASE("two-state likelihood matches path enumeration") {
  const HmmParams p = small_model();
  const ObservationSequence obs{{0.1}, {1.9}, {1.0}};
  // Reference computed independently by summing all 8 paths in Python.
  CHECK(rel_err(log_likelihood(p, obs), -4.448504083564271) <= 1e-9);
  CHECK(rel_err(log_likelihood(p, obs), synth::brute_force_loglik(p, obs)) <= 1e-9);
}

TEST_CASE("log_likelihood agrees with the brute-force oracle on random instances") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const std::size_t n = 1 + seed % 3;
    const std::size_t len = 1 + (seed / 3) % 6;
    const std::size_t dim = (seed % 2) ? 3 : 1;
    const HmmParams p = synth::random_params(n, dim, seed);
    const ObservationSequence obs = sample(p, len, seed + 1000);
    CAPTURE(seed);
    CHECK(rel_err(log_likelihood(p, obs), synth::brute_force_loglik(p, obs)) <= 1e-9);
  }
}

TEST_CASE("chain rule: forward state increments match full recomputation") {
  const HmmParams p = synth::random_params(3, 4, 5);
  const ObservationSequence obs = sample(p, 40, 6);
  ForwardState state(p);
  double prev = 0.0;
  for (std::size_t t = 0; t < obs.size(); ++t) {
    const double step = state.extend(p, obs[t]);
    const ObservationSequence prefix(obs.begin(), obs.begin() + static_cast<std::ptrdiff_t>(t + 1));
    const double full = log_likelihood(p, prefix);
    CHECK(std::abs(state.cumulative_log_likelihood() - full) <= 1e-9);
    CHECK(std::abs((prev + step) - full) <= 1e-9);
    prev = full;
    const double sum = std::accumulate(state.posterior().begin(), state.posterior().end(), 0.0);
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("forward_state of one observation") {
  const HmmParams p = small_model();
  const ObservationSequence obs{{0.3}};
  const ForwardState s = forward_state(p, obs);
  std::vector<double> w(2);
  for (std::size_t j = 0; j < 2; ++j) w[j] = p.initial[j] * std::exp(emission_log_density(p, j, obs[0]));
  const double z = w[0] + w[1];
  CHECK(s.posterior()[0] == doctest::Approx(w[0] / z).epsilon(1e-12));
  CHECK(s.posterior()[1] == doctest::Approx(w[1] / z).epsilon(1e-12));
  CHECK(s.length() == 1);

  ForwardState extended = s;
  extended.extend(p, EntryVector{1.7});
  CHECK(std::abs(extended.cumulative_log_likelihood() - log_likelihood(p, {{0.3}, {1.7}})) <= 1e-9);
  CHECK(s.predictive_log_density(p, EntryVector{1.7}) ==
        doctest::Approx(extended.cumulative_log_likelihood() - s.cumulative_log_likelihood()).epsilon(1e-12));

  const ForwardState empty(p);
  CHECK(empty.length() == 0);
  CHECK(empty.cumulative_log_likelihood() == 0.0);
}

TEST_CASE("dimension mismatches are reported") {
  const HmmParams p = small_model();
  auto expect_mismatch = [](auto&& fn) {
    try {
      fn();
      FAIL("expected DimensionMismatch");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::DimensionMismatch);
    }
  };
  expect_mismatch([&] { log_likelihood(p, {{1.0, 2.0}}); });
  expect_mismatch([&] { forward_state(p, {{1.0}, {1.0, 2.0}}); });
  expect_mismatch([&] { ForwardState(p).extend(p, EntryVector{1.0, 2.0}); });
  expect_mismatch([&] { fit_baum_welch({{1.0}, {1.0, 2.0}, {3.0}}, FitConfig{}); });
  CHECK_THROWS_AS(log_likelihood(p, {}), Error);
}

TEST_CASE("relabeling states leaves the likelihood unchanged") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const HmmParams p = synth::random_params(3, 2, seed);
    const ObservationSequence obs = sample(p, 25, seed + 7);
    const double base = log_likelihood(p, obs);
    for (const auto& perm : std::vector<std::vector<std::size_t>>{{1, 0, 2}, {2, 0, 1}, {2, 1, 0}}) {
      CHECK(std::abs(log_likelihood(permute(p, perm), obs) - base) <= 1e-12 * std::max(1.0, std::abs(base)));
    }
  }
}

TEST_CASE("HmmParams::validate") {
  HmmParams p = small_model();
  CHECK_NOTHROW(p.validate());
  p.transition(0, 0) = 0.8;
  CHECK_THROWS_AS(p.validate(), Error);
  p = small_model();
  p.variances(1, 0) = 1e-4;
  CHECK_THROWS_AS(p.validate(), Error);
  p = small_model();
  p.initial = {1.2, -0.2};
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("Baum-Welch log-likelihood never decreases") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const HmmParams truth = synth::random_params(3, 4, seed);
    const ObservationSequence obs = sample(truth, 150, seed + 50);
    FitConfig cfg;
    cfg.n_states = 3;
    cfg.seed = seed;
    const FitResult fit = fit_baum_welch(obs, cfg);
    REQUIRE(fit.log_likelihoods.size() >= 2);
    for (std::size_t i = 1; i < fit.log_likelihoods.size(); ++i) {
      CHECK(fit.log_likelihoods[i] >= fit.log_likelihoods[i - 1] - 1e-8);
    }
    CHECK_NOTHROW(fit.params.validate());
  }
}

TEST_CASE("invariants hold after every EM iteration") {
  const ObservationSequence obs = sample(two_state_truth(3), 80, 4);
  for (std::size_t iters = 1; iters <= 6; ++iters) {
    FitConfig cfg;
    cfg.max_iterations = iters;
    cfg.tolerance = 1e-300;
    const FitResult fit = fit_baum_welch(obs, cfg);
    CHECK(fit.log_likelihoods.size() == iters);
    CHECK_NOTHROW(fit.params.validate());
  }
}

TEST_CASE("one-state fit is the sample mean and variance") {
  const ObservationSequence obs{{1.0, 5.0}, {2.0, 5.0}, {4.0, 5.0}, {7.0, 5.0}};
  FitConfig cfg;
  cfg.n_states = 1;
  const FitResult fit = fit_baum_welch(obs, cfg);
  CHECK(fit.params.means(0, 0) == doctest::Approx(3.5).epsilon(1e-12));
  CHECK(fit.params.means(0, 1) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(std::abs(fit.params.variances(0, 0) - 5.25) <= 1e-9);
  CHECK(fit.params.variances(0, 1) == cfg.var_floor);
  CHECK(fit.params.initial[0] == 1.0);
  CHECK(fit.params.transition(0, 0) == 1.0);
  CHECK_FALSE(fit.degenerate);
}

TEST_CASE("well-separated two-state data is recovered") {
  const HmmParams truth = two_state_truth(4);
  const ObservationSequence obs = sample(truth, 1000, 17);
  const FitResult fit = fit_baum_welch(obs, FitConfig{});
  const bool swapped = fit.params.means(0, 0) > fit.params.means(1, 0);
  for (std::size_t j = 0; j < 2; ++j) {
    const std::size_t k = swapped ? 1 - j : j;
    for (std::size_t d = 0; d < 4; ++d) CHECK(std::abs(fit.params.means(k, d) - truth.means(j, d)) < 0.1);
  }
}

TEST_CASE("fit errors and degenerate input") {
  try {
    fit_baum_welch({{1.0}}, FitConfig{});
    FAIL("expected TooShort");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TooShort);
  }
  FitConfig three;
  three.n_states = 3;
  CHECK_THROWS_AS(fit_baum_welch({{1.0}, {2.0}}, three), Error);

  const ObservationSequence same(10, EntryVector{0.5, -0.5});
  const FitResult fit = fit_baum_welch(same, FitConfig{});
  CHECK(fit.degenerate);
  for (double v : fit.params.variances.data) CHECK(v == FitConfig{}.var_floor);
  CHECK_NOTHROW(fit.params.validate());
}

TEST_CASE("warm start begins from the supplied parameters") {
  const ObservationSequence obs = sample(two_state_truth(2), 200, 9);
  const FitResult cold = fit_baum_welch(obs, FitConfig{});
  FitConfig warm;
  warm.initial_params = cold.params;
  warm.max_iterations = 1;
  const FitResult w = fit_baum_welch(obs, warm);
  REQUIRE(w.log_likelihoods.size() == 1);
  CHECK(w.log_likelihoods[0] == doctest::Approx(log_likelihood(cold.params, obs)).epsilon(1e-12));

  FitConfig wrong = warm;
  wrong.n_states = 3;
  CHECK_THROWS_AS(fit_baum_welch(obs, wrong), Error);
}

TEST_CASE("sample") {
  HmmParams p;
  p.initial = {1.0};
  p.transition = Matrix(1, 1, 1.0);
  p.means = Matrix(1, 3);
  p.means.data = {1.0, -2.0, 0.5};
  p.variances = Matrix(1, 3, 1e-3);
  const ObservationSequence obs = sample(p, 1000, 3);
  REQUIRE(obs.size() == 1000);
  for (const auto& o : obs) {
    for (std::size_t d = 0; d < 3; ++d) CHECK(std::abs(o[d] - p.means(0, d)) <= 6.0 * std::sqrt(1e-3));
  }
  CHECK(sample(p, 1, 3).size() == 1);
  CHECK(sample(small_model(), 50, 8) == sample(small_model(), 50, 8));
  CHECK_FALSE(sample(small_model(), 50, 8) == sample(small_model(), 50, 9));

  std::vector<std::size_t> states;
  sample(small_model(), 20, 8, &states);
  CHECK(states.size() == 20);
  CHECK_THROWS_AS(sample(p, 0, 1), Error);
}
