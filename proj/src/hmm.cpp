#include "logad/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "logad/error.hpp"
#include "logad/numeric.hpp"
#include "logad/random.hpp"

namespace logad {

namespace {

void check_observations(const HmmParams& params, const ObservationSequence& obs) {
  for (const auto& o : obs) {
    if (o.size() != params.dim()) {
      throw Error(ErrorKind::DimensionMismatch, "observation has dimension " + std::to_string(o.size()) +
                                                    ", model expects " + std::to_string(params.dim()));
    }
  }
}

// log_b(t, j) for every observation and state.
Matrix emission_table(const HmmParams& params, const ObservationSequence& obs) {
  Matrix log_b(obs.size(), params.n_states());
  for (std::size_t t = 0; t < obs.size(); ++t) {
    for (std::size_t j = 0; j < params.n_states(); ++j) log_b(t, j) = emission_log_density(params, j, obs[t]);
  }
  return log_b;
}

Matrix log_matrix(const Matrix& m) {
  Matrix out(m.rows, m.cols);
  for (std::size_t i = 0; i < m.data.size(); ++i) out.data[i] = safe_log(m.data[i]);
  return out;
}

void normalize(std::span<double> p) {
  double sum = 0.0;
  for (double x : p) sum += x;
  for (double& x : p) x /= sum;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return s;
}

struct ForwardBackward {
  Matrix log_alpha;
  Matrix log_beta;
  double log_likelihood = 0.0;
};

ForwardBackward forward_backward(const HmmParams& params, const Matrix& log_b, const Matrix& log_a) {
  const std::size_t n = params.n_states();
  const std::size_t len = log_b.rows;
  ForwardBackward fb{Matrix(len, n), Matrix(len, n, 0.0), 0.0};
  std::vector<double> terms(n);

  for (std::size_t j = 0; j < n; ++j) fb.log_alpha(0, j) = safe_log(params.initial[j]) + log_b(0, j);
  for (std::size_t t = 1; t < len; ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) terms[i] = fb.log_alpha(t - 1, i) + log_a(i, j);
      fb.log_alpha(t, j) = log_sum_exp(terms) + log_b(t, j);
    }
  }
  for (std::size_t t = len - 1; t-- > 0;) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) terms[j] = log_a(i, j) + log_b(t + 1, j) + fb.log_beta(t + 1, j);
      fb.log_beta(t, i) = log_sum_exp(terms);
    }
  }
  fb.log_likelihood = log_sum_exp(fb.log_alpha.row(len - 1));
  return fb;
}

void maximization_step(HmmParams& params, const ObservationSequence& obs, const Matrix& log_b,
                       const Matrix& log_a, const ForwardBackward& fb) {
  const std::size_t n = params.n_states();
  const std::size_t dim = params.dim();
  const std::size_t len = obs.size();
  const double ll = fb.log_likelihood;

  Matrix gamma(len, n);
  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t j = 0; j < n; ++j) gamma(t, j) = std::exp(fb.log_alpha(t, j) + fb.log_beta(t, j) - ll);
  }

  for (std::size_t j = 0; j < n; ++j) params.initial[j] = gamma(0, j);
  normalize(params.initial);

  Matrix xi(n, n, 0.0);
  for (std::size_t t = 0; t + 1 < len; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        xi(i, j) += std::exp(fb.log_alpha(t, i) + log_a(i, j) + log_b(t + 1, j) + fb.log_beta(t + 1, j) - ll);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) row_sum += xi(i, j);
    if (row_sum > 0.0) {
      for (std::size_t j = 0; j < n; ++j) params.transition(i, j) = xi(i, j) / row_sum;
    }
  }

  for (std::size_t j = 0; j < n; ++j) {
    double weight = 0.0;
    for (std::size_t t = 0; t < len; ++t) weight += gamma(t, j);
    // A state with no responsibility keeps its emission parameters.
    if (!(weight > 0.0)) continue;
    auto mean = params.means.row(j);
    std::fill(mean.begin(), mean.end(), 0.0);
    for (std::size_t t = 0; t < len; ++t) {
      for (std::size_t d = 0; d < dim; ++d) mean[d] += gamma(t, j) * obs[t][d];
    }
    for (double& m : mean) m /= weight;
    auto var = params.variances.row(j);
    std::fill(var.begin(), var.end(), 0.0);
    for (std::size_t t = 0; t < len; ++t) {
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = obs[t][d] - mean[d];
        var[d] += gamma(t, j) * diff * diff;
      }
    }
    for (double& v : var) v = std::max(v / weight, params.var_floor);
  }
}

}  // namespace

void HmmParams::validate(double tol) const {
  const std::size_t n = n_states();
  auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidArgument, "invalid HMM parameters: " + what); };
  if (n == 0) fail("no states");
  if (transition.rows != n || transition.cols != n) fail("transition matrix is not N x N");
  if (means.rows != n || variances.rows != n || variances.cols != means.cols) fail("emission shapes disagree");
  if (means.cols == 0) fail("zero observation dimension");
  if (!(var_floor > 0.0)) fail("variance floor must be positive");

  auto check_distribution = [&](std::span<const double> p, const char* name) {
    double sum = 0.0;
    for (double x : p) {
      if (!(x >= 0.0 && x <= 1.0)) fail(std::string(name) + " has an entry outside [0, 1]");
      sum += x;
    }
    if (std::abs(sum - 1.0) > tol) fail(std::string(name) + " does not sum to 1");
  };
  check_distribution(initial, "initial distribution");
  for (std::size_t i = 0; i < n; ++i) check_distribution(transition.row(i), "transition row");
  for (double m : means.data) {
    if (!std::isfinite(m)) fail("non-finite mean");
  }
  for (double v : variances.data) {
    if (!std::isfinite(v) || v < var_floor) fail("variance below the floor");
  }
}

double emission_log_density(const HmmParams& params, std::size_t state, std::span<const double> o) {
  const auto mean = params.means.row(state);
  const auto var = params.variances.row(state);
  double acc = 0.0;
  for (std::size_t d = 0; d < o.size(); ++d) {
    const double diff = o[d] - mean[d];
    acc += std::log(2.0 * std::numbers::pi * var[d]) + diff * diff / var[d];
  }
  return -0.5 * acc;
}

double log_likelihood(const HmmParams& params, const ObservationSequence& obs) {
  if (obs.empty()) throw Error(ErrorKind::TooShort, "log-likelihood of an empty sequence");
  check_observations(params, obs);
  const std::size_t n = params.n_states();
  const Matrix log_a = log_matrix(params.transition);

  std::vector<double> alpha(n), next(n), terms(n);
  for (std::size_t j = 0; j < n; ++j) alpha[j] = safe_log(params.initial[j]) + emission_log_density(params, j, obs[0]);
  for (std::size_t t = 1; t < obs.size(); ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) terms[i] = alpha[i] + log_a(i, j);
      next[j] = log_sum_exp(terms) + emission_log_density(params, j, obs[t]);
    }
    alpha.swap(next);
  }
  return log_sum_exp(alpha);
}

ForwardState::ForwardState(const HmmParams& params)
    : posterior_(params.initial), log_posterior_(params.initial.size()) {
  for (std::size_t j = 0; j < posterior_.size(); ++j) log_posterior_[j] = safe_log(posterior_[j]);
}

std::vector<double> ForwardState::log_prior(const HmmParams& params) const {
  const std::size_t n = params.n_states();
  if (posterior_.size() != n) throw Error(ErrorKind::DimensionMismatch, "forward state built for a different model");
  if (length_ == 0) return log_posterior_;
  std::vector<double> prior(n), terms(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) terms[i] = log_posterior_[i] + safe_log(params.transition(i, j));
    prior[j] = log_sum_exp(terms);
  }
  return prior;
}

double ForwardState::predictive_log_density(const HmmParams& params, std::span<const double> o) const {
  if (o.size() != params.dim()) throw Error(ErrorKind::DimensionMismatch, "observation dimension differs from model");
  auto joint = log_prior(params);
  for (std::size_t j = 0; j < joint.size(); ++j) joint[j] += emission_log_density(params, j, o);
  return log_sum_exp(joint);
}

double ForwardState::extend(const HmmParams& params, std::span<const double> o) {
  if (o.size() != params.dim()) throw Error(ErrorKind::DimensionMismatch, "observation dimension differs from model");
  auto joint = log_prior(params);
  for (std::size_t j = 0; j < joint.size(); ++j) joint[j] += emission_log_density(params, j, o);
  const double step = log_sum_exp(joint);
  for (std::size_t j = 0; j < joint.size(); ++j) {
    log_posterior_[j] = joint[j] - step;
    posterior_[j] = std::exp(log_posterior_[j]);
  }
  cumulative_ += step;
  ++length_;
  return step;
}

ForwardState forward_state(const HmmParams& params, const ObservationSequence& obs_prefix) {
  check_observations(params, obs_prefix);
  ForwardState state(params);
  for (const auto& o : obs_prefix) state.extend(params, o);
  return state;
}

void FitConfig::validate() const {
  if (n_states == 0 || max_iterations == 0 || !(tolerance > 0.0) || !(var_floor > 0.0)) {
    throw Error(ErrorKind::Config, "fit settings must all be positive");
  }
}

HmmParams initialize_params(const ObservationSequence& obs, const FitConfig& cfg) {
  const std::size_t n = cfg.n_states;
  const std::size_t dim = obs.front().size();
  const std::size_t len = obs.size();
  Rng rng(cfg.seed);

  HmmParams params;
  params.var_floor = cfg.var_floor;
  params.means = Matrix(n, dim);
  params.variances = Matrix(n, dim);

  // Farthest-point seeding.
  std::vector<std::size_t> chosen{static_cast<std::size_t>(rng.index(len))};
  std::vector<double> nearest(len);
  for (std::size_t t = 0; t < len; ++t) nearest[t] = squared_distance(obs[t], obs[chosen[0]]);
  while (chosen.size() < n) {
    std::size_t best = 0;
    for (std::size_t t = 1; t < len; ++t) {
      if (nearest[t] > nearest[best]) best = t;
    }
    chosen.push_back(best);
    for (std::size_t t = 0; t < len; ++t) nearest[t] = std::min(nearest[t], squared_distance(obs[t], obs[best]));
  }
  for (std::size_t j = 0; j < n; ++j) std::copy(obs[chosen[j]].begin(), obs[chosen[j]].end(), params.means.row(j).begin());

  std::vector<double> mean(dim, 0.0), var(dim, 0.0);
  for (const auto& o : obs) {
    for (std::size_t d = 0; d < dim; ++d) mean[d] += o[d];
  }
  for (double& m : mean) m /= static_cast<double>(len);
  for (const auto& o : obs) {
    for (std::size_t d = 0; d < dim; ++d) var[d] += (o[d] - mean[d]) * (o[d] - mean[d]);
  }
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t d = 0; d < dim; ++d) params.variances(j, d) = std::max(var[d] / static_cast<double>(len), cfg.var_floor);
  }

  auto jittered_uniform = [&](std::span<double> p) {
    for (double& x : p) x = 1.0 + 0.01 * rng.uniform(-1.0, 1.0);
    normalize(p);
  };
  params.initial.assign(n, 0.0);
  jittered_uniform(params.initial);
  params.transition = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) jittered_uniform(params.transition.row(i));
  return params;
}

FitResult fit_baum_welch(const ObservationSequence& obs, const FitConfig& cfg) {
  cfg.validate();
  if (obs.size() < 2 || obs.size() < cfg.n_states) {
    throw Error(ErrorKind::TooShort, "need at least max(2, n_states) observations, got " + std::to_string(obs.size()));
  }
  const std::size_t dim = obs.front().size();
  if (dim == 0) throw Error(ErrorKind::DimensionMismatch, "observations have dimension 0");
  for (const auto& o : obs) {
    if (o.size() != dim) throw Error(ErrorKind::DimensionMismatch, "observations have differing dimensions");
  }

  FitResult result;
  result.degenerate = cfg.n_states > 1 && std::all_of(obs.begin(), obs.end(), [&](const EntryVector& o) { return o == obs.front(); });

  if (cfg.initial_params) {
    result.params = *cfg.initial_params;
    if (result.params.n_states() != cfg.n_states || result.params.dim() != dim) {
      throw Error(ErrorKind::DimensionMismatch, "warm-start parameters do not match the fit shape");
    }
    result.params.var_floor = cfg.var_floor;
    for (double& v : result.params.variances.data) v = std::max(v, cfg.var_floor);
  } else {
    result.params = initialize_params(obs, cfg);
  }
  HmmParams& params = result.params;

  for (std::size_t iter = 0; iter < cfg.max_iterations; ++iter) {
    const Matrix log_b = emission_table(params, obs);
    const Matrix log_a = log_matrix(params.transition);
    const ForwardBackward fb = forward_backward(params, log_b, log_a);
    result.log_likelihoods.push_back(fb.log_likelihood);
    if (iter > 0) {
      const double gain = fb.log_likelihood - result.log_likelihoods[iter - 1];
      if (gain < cfg.tolerance) {
        result.converged = true;
        break;
      }
    }
    maximization_step(params, obs, log_b, log_a, fb);
  }
  return result;
}

ObservationSequence sample(const HmmParams& params, std::size_t length, std::uint64_t seed) {
  return sample(params, length, seed, nullptr);
}

ObservationSequence sample(const HmmParams& params, std::size_t length, std::uint64_t seed,
                           std::vector<std::size_t>* states) {
  if (length == 0) throw Error(ErrorKind::InvalidArgument, "sample length must be at least 1");
  Rng rng(seed);
  auto draw = [&rng](std::span<const double> p) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
      acc += p[j];
      if (u < acc) return j;
    }
    return p.size() - 1;
  };

  ObservationSequence obs;
  obs.reserve(length);
  if (states) states->clear();
  std::size_t state = draw(params.initial);
  for (std::size_t t = 0; t < length; ++t) {
    if (t > 0) state = draw(params.transition.row(state));
    if (states) states->push_back(state);
    EntryVector o(params.dim());
    for (std::size_t d = 0; d < o.size(); ++d) {
      o[d] = rng.normal(params.means(state, d), std::sqrt(params.variances(state, d)));
    }
    obs.push_back(std::move(o));
  }
  return obs;
}

}  // namespace logad
