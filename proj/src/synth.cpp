#include "logad/synth.hpp"

#include <cmath>
#include <numbers>

#include "logad/error.hpp"
#include "logad/numeric.hpp"
#include "logad/random.hpp"

namespace logad::synth {

namespace {

// Written independently of hmm.cpp so it can serve as an oracle.
double gaussian_log_pdf(std::span<const double> o, std::span<const double> mean, std::span<const double> var) {
  double acc = 0.0;
  for (std::size_t d = 0; d < o.size(); ++d) {
    const double z = o[d] - mean[d];
    acc += -0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * std::log(var[d]) - 0.5 * z * z / var[d];
  }
  return acc;
}

}  // namespace

const char* to_string(Variant v) {
  switch (v) {
    case Variant::Regular: return "regular";
    case Variant::Swapped: return "swapped";
    case Variant::NovelEvent: return "novel";
  }
  return "?";
}

std::vector<std::string> minimal_labels(const MinimalScenario& scenario) {
  if (scenario.length < 4) throw Error(ErrorKind::InvalidArgument, "minimal scenario needs length >= 4");
  const std::size_t len = scenario.length;
  std::vector<std::string> labels(len);
  for (std::size_t t = 0; t < len; ++t) labels[t] = (t % 2 == 0) ? "o1" : "o2";
  switch (scenario.variant) {
    case Variant::Regular: break;
    case Variant::Swapped: std::swap(labels[len - 2], labels[len - 1]); break;
    case Variant::NovelEvent: labels[len - 1] = "oa"; break;
  }
  return labels;
}

ObservationSequence gen_minimal(const MinimalScenario& scenario) {
  if (scenario.o1.size() != scenario.o2.size() || scenario.o1.size() != scenario.anomaly.size()) {
    throw Error(ErrorKind::DimensionMismatch, "scenario symbols differ in dimension");
  }
  ObservationSequence obs;
  for (const auto& label : minimal_labels(scenario)) {
    obs.push_back(label == "o1" ? scenario.o1 : label == "o2" ? scenario.o2 : scenario.anomaly);
  }
  return obs;
}

double brute_force_loglik(const HmmParams& params, const ObservationSequence& obs) {
  const std::size_t n = params.n_states();
  const std::size_t len = obs.size();
  if (len == 0) throw Error(ErrorKind::TooShort, "empty observation sequence");
  if (std::pow(static_cast<double>(n), static_cast<double>(len)) > kMaxPaths) {
    throw Error(ErrorKind::TooLarge, "N^T exceeds the enumeration guard");
  }
  for (const auto& o : obs) {
    if (o.size() != params.dim()) throw Error(ErrorKind::DimensionMismatch, "observation dimension differs from model");
  }

  Matrix emit(len, n);
  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t j = 0; j < n; ++j) emit(t, j) = gaussian_log_pdf(obs[t], params.means.row(j), params.variances.row(j));
  }

  // Odometer over state paths.
  std::vector<std::size_t> path(len, 0);
  double total = kNegInf;
  while (true) {
    double lp = std::log(params.initial[path[0]]) + emit(0, path[0]);
    for (std::size_t t = 1; t < len; ++t) lp += std::log(params.transition(path[t - 1], path[t])) + emit(t, path[t]);
    total = log_add(total, lp);

    std::size_t pos = 0;
    while (pos < len && ++path[pos] == n) path[pos++] = 0;
    if (pos == len) break;
  }
  return total;
}

std::vector<double> finite_diff_gradient(const std::function<double(const std::vector<double>&)>& loss,
                                         std::vector<double> x, double step) {
  if (!(step > 0.0)) throw Error(ErrorKind::InvalidArgument, "finite-difference step must be positive");
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + step;
    const double up = loss(x);
    x[i] = orig - step;
    const double down = loss(x);
    x[i] = orig;
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

HmmParams random_params(std::size_t n_states, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  HmmParams p;
  p.var_floor = 1e-3;
  auto random_distribution = [&](std::span<double> row) {
    double sum = 0.0;
    for (double& x : row) sum += (x = 0.05 + rng.uniform());
    for (double& x : row) x /= sum;
  };
  p.initial.assign(n_states, 0.0);
  random_distribution(p.initial);
  p.transition = Matrix(n_states, n_states);
  for (std::size_t i = 0; i < n_states; ++i) random_distribution(p.transition.row(i));
  p.means = Matrix(n_states, dim);
  p.variances = Matrix(n_states, dim);
  for (double& m : p.means.data) m = rng.uniform(-2.0, 2.0);
  for (double& v : p.variances.data) v = rng.uniform(0.2, 2.0);
  return p;
}

}  // namespace logad::synth

namespace logad::synth {

MinimalRun run_minimal(const MinimalScenario& scenario, bool contaminated, const FitConfig& cfg) {
  MinimalRun run;
  run.variant = scenario.variant;
  run.labels = minimal_labels(scenario);
  const ObservationSequence obs = gen_minimal(scenario);
  if (contaminated) {
    ScoreSeries series = score_with_contaminated_training(obs, FullHistory{}, cfg);
    run.params = series.fits.front();
    run.scores = std::move(series.entries);
  } else {
    const ObservationSequence train(obs.begin(), obs.end() - 1);
    run.params = fit_baum_welch(train, cfg).params;
    run.scores = score_all(run.params, obs);
  }
  return run;
}

}  // namespace logad::synth
