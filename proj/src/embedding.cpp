#include "logad/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "logad/error.hpp"
#include "logad/random.hpp"

namespace logad {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// -log sigmoid(x)
double softplus_neg(double x) {
  return x > 0.0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> context_mean(const EmbeddingTable& table, std::span<const TokenId> context) {
  std::vector<double> h(table.dim, 0.0);
  for (TokenId c : context) {
    const auto row = table.input.row(c);
    for (std::size_t d = 0; d < table.dim; ++d) h[d] += row[d];
  }
  const double inv = 1.0 / static_cast<double>(context.size());
  for (double& x : h) x *= inv;
  return h;
}

void check_triple(const EmbeddingTable& table, std::span<const TokenId> context, TokenId target,
                  std::span<const TokenId> negatives) {
  if (context.empty()) throw Error(ErrorKind::InvalidArgument, "CBOW context is empty");
  const std::size_t v = table.vocab.size();
  auto bad = [v](TokenId id) { return id >= v; };
  if (bad(target) || std::any_of(context.begin(), context.end(), bad) ||
      std::any_of(negatives.begin(), negatives.end(), bad)) {
    throw Error(ErrorKind::InvalidArgument, "token id out of vocabulary range");
  }
}

}  // namespace

Vocabulary::Vocabulary() : tokens_{std::string(placeholder::kUnknown)}, counts_{0} {
  ids_.emplace(tokens_.front(), kUnknownId);
}

Vocabulary Vocabulary::from_rows(std::vector<std::pair<std::string, std::uint64_t>> rows) {
  if (rows.empty() || rows.front().first != placeholder::kUnknown) {
    throw Error(ErrorKind::Format, "vocabulary must start with $unk");
  }
  Vocabulary vocab;
  vocab.tokens_.clear();
  vocab.counts_.clear();
  vocab.ids_.clear();
  for (auto& [token, count] : rows) {
    const auto id = static_cast<TokenId>(vocab.tokens_.size());
    if (!vocab.ids_.emplace(token, id).second) {
      throw Error(ErrorKind::Format, "duplicate vocabulary token " + token);
    }
    vocab.tokens_.push_back(std::move(token));
    vocab.counts_.push_back(count);
  }
  return vocab;
}

TokenId Vocabulary::id(std::string_view token) const {
  const auto it = ids_.find(token);
  return it == ids_.end() ? kUnknownId : it->second;
}

bool Vocabulary::contains(std::string_view token) const { return ids_.find(token) != ids_.end(); }

std::vector<TokenId> Vocabulary::encode(const TokenSequence& tokens) const {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

Vocabulary build_vocab(const std::vector<TokenSequence>& corpus, std::uint64_t min_count) {
  std::map<std::string, std::uint64_t, std::less<>> counts;
  for (const auto& seq : corpus) {
    for (const auto& t : seq) ++counts[t];
  }

  Vocabulary vocab;
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (auto& [token, count] : counts) {
    if (token == placeholder::kUnknown || count < min_count) {
      vocab.counts_[kUnknownId] += count;
    } else {
      kept.emplace_back(token, count);
    }
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  for (auto& [token, count] : kept) {
    const auto id = static_cast<TokenId>(vocab.tokens_.size());
    vocab.ids_.emplace(token, id);
    vocab.tokens_.push_back(std::move(token));
    vocab.counts_.push_back(count);
  }
  return vocab;
}

void EmbedConfig::validate() const {
  if (dim == 0 || window == 0 || negatives == 0 || epochs == 0 || min_count == 0 ||
      !(learning_rate > 0.0) || !(min_learning_rate > 0.0)) {
    throw Error(ErrorKind::Config, "embedding settings must all be positive");
  }
}

EmbeddingTable init_table(Vocabulary vocab, std::size_t dim, std::uint64_t seed) {
  EmbeddingTable table;
  const std::size_t v = vocab.size();
  table.vocab = std::move(vocab);
  table.dim = dim;
  table.input = Matrix(v, dim);
  table.output = Matrix(v, dim, 0.0);
  Rng rng(seed);
  const double half = 0.5 / static_cast<double>(dim);
  for (double& x : table.input.data) x = rng.uniform(-half, half);
  return table;
}

NoiseDistribution::NoiseDistribution(const Vocabulary& vocab) : cdf_(vocab.size(), 0.0) {
  double acc = 0.0;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    acc += std::pow(static_cast<double>(vocab.count(static_cast<TokenId>(i))), 0.75);
    cdf_[i] = acc;
  }
  if (acc <= 0.0) throw Error(ErrorKind::EmptyCorpus, "noise distribution has no mass");
  for (double& c : cdf_) c /= acc;
}

TokenId NoiseDistribution::from_uniform(double u) const {
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const auto idx = static_cast<std::size_t>(it - cdf_.begin());
  return static_cast<TokenId>(std::min(idx, cdf_.size() - 1));
}

double cbow_loss(const EmbeddingTable& table, std::span<const TokenId> context, TokenId target,
                 std::span<const TokenId> negatives) {
  check_triple(table, context, target, negatives);
  const auto h = context_mean(table, context);
  double loss = softplus_neg(dot(table.output.row(target), h));
  for (TokenId n : negatives) loss += softplus_neg(-dot(table.output.row(n), h));
  return loss;
}

CbowGradient cbow_gradient(const EmbeddingTable& table, std::span<const TokenId> context,
                           TokenId target, std::span<const TokenId> negatives) {
  check_triple(table, context, target, negatives);
  const std::size_t v = table.vocab.size();
  const std::size_t dim = table.dim;
  CbowGradient grad{Matrix(v, dim), Matrix(v, dim)};
  const auto h = context_mean(table, context);
  std::vector<double> grad_h(dim, 0.0);

  auto accumulate = [&](TokenId id, double label) {
    const auto u = table.output.row(id);
    const double g = sigmoid(dot(u, h)) - label;
    auto out = grad.output.row(id);
    for (std::size_t d = 0; d < dim; ++d) {
      out[d] += g * h[d];
      grad_h[d] += g * u[d];
    }
  };
  accumulate(target, 1.0);
  for (TokenId n : negatives) accumulate(n, 0.0);

  const double inv = 1.0 / static_cast<double>(context.size());
  for (TokenId c : context) {
    auto in = grad.input.row(c);
    for (std::size_t d = 0; d < dim; ++d) in[d] += grad_h[d] * inv;
  }
  return grad;
}

double cbow_step(EmbeddingTable& table, std::span<const TokenId> context, TokenId target,
                 std::span<const TokenId> negatives, double learning_rate) {
  const std::size_t dim = table.dim;
  const auto h = context_mean(table, context);
  std::vector<double> grad_h(dim, 0.0);
  double loss = 0.0;

  auto update = [&](TokenId id, double label) {
    auto u = table.output.row(id);
    const double s = dot(u, h);
    loss += label > 0.5 ? softplus_neg(s) : softplus_neg(-s);
    const double g = sigmoid(s) - label;
    for (std::size_t d = 0; d < dim; ++d) {
      grad_h[d] += g * u[d];
      u[d] -= learning_rate * g * h[d];
    }
  };
  update(target, 1.0);
  for (TokenId n : negatives) update(n, 0.0);

  const double scale = learning_rate / static_cast<double>(context.size());
  for (TokenId c : context) {
    auto in = table.input.row(c);
    for (std::size_t d = 0; d < dim; ++d) in[d] -= scale * grad_h[d];
  }
  return loss;
}

CbowTrainResult train_cbow_detailed(const std::vector<TokenSequence>& corpus, const EmbedConfig& cfg) {
  cfg.validate();
  Vocabulary vocab = build_vocab(corpus, cfg.min_count);

  std::vector<std::vector<TokenId>> encoded;
  encoded.reserve(corpus.size());
  std::size_t positions = 0;
  for (const auto& seq : corpus) {
    encoded.push_back(vocab.encode(seq));
    positions += seq.size();
  }
  if (positions == 0) throw Error(ErrorKind::EmptyCorpus, "every token sequence is empty");

  CbowTrainResult result{init_table(std::move(vocab), cfg.dim, cfg.seed), {}, 0};
  EmbeddingTable& table = result.table;
  const NoiseDistribution noise(table.vocab);
  Rng rng(cfg.seed + 1);

  const double total = static_cast<double>(cfg.epochs) * static_cast<double>(positions);
  double processed = 0.0;
  std::vector<TokenId> context;
  std::vector<TokenId> negatives;
  context.reserve(2 * cfg.window);
  negatives.reserve(cfg.negatives);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    std::size_t epoch_updates = 0;
    for (const auto& seq : encoded) {
      const std::size_t n = seq.size();
      for (std::size_t t = 0; t < n; ++t, processed += 1.0) {
        context.clear();
        const std::size_t lo = t >= cfg.window ? t - cfg.window : 0;
        const std::size_t hi = std::min(n - 1, t + cfg.window);
        for (std::size_t c = lo; c <= hi; ++c) {
          if (c != t) context.push_back(seq[c]);
        }
        if (context.empty()) continue;

        const TokenId target = seq[t];
        negatives.clear();
        for (std::size_t k = 0; k < cfg.negatives; ++k) {
          const TokenId neg = noise.draw(rng);
          if (neg != target) negatives.push_back(neg);
        }
        const double lr = cfg.learning_rate -
                          (cfg.learning_rate - cfg.min_learning_rate) * (processed / total);
        epoch_loss += cbow_step(table, context, target, negatives, std::max(lr, cfg.min_learning_rate));
        ++epoch_updates;
      }
    }
    result.updates += epoch_updates;
    result.epoch_loss.push_back(epoch_updates ? epoch_loss / static_cast<double>(epoch_updates) : 0.0);
  }
  return result;
}

EmbeddingTable train_cbow(const std::vector<TokenSequence>& corpus, const EmbedConfig& cfg) {
  return train_cbow_detailed(corpus, cfg).table;
}

EntryVector embed_entry(const TokenSequence& tokens, const EmbeddingTable& table) {
  if (tokens.empty()) {
    const auto row = table.input.row(kUnknownId);
    return EntryVector(row.begin(), row.end());
  }
  EntryVector v(table.dim, 0.0);
  for (const auto& t : tokens) {
    const auto row = table.input.row(table.vocab.id(t));
    for (std::size_t d = 0; d < table.dim; ++d) v[d] += row[d];
  }
  const double inv = 1.0 / static_cast<double>(tokens.size());
  for (double& x : v) x *= inv;
  return v;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::DimensionMismatch, "cosine of unequal-length vectors");
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

std::vector<Neighbor> nearest_neighbors(std::span<const double> query, const EmbeddingTable& table,
                                        std::size_t k) {
  if (k == 0) throw Error(ErrorKind::InvalidArgument, "k must be at least 1");
  if (query.size() != table.dim) throw Error(ErrorKind::DimensionMismatch, "query dimension differs from table");
  if (dot(query, query) == 0.0) throw Error(ErrorKind::ZeroVector, "query vector has zero norm");

  const std::size_t v = table.vocab.size();
  std::vector<std::pair<double, TokenId>> scored;
  scored.reserve(v);
  for (std::size_t i = 0; i < v; ++i) {
    scored.emplace_back(cosine_similarity(query, table.input.row(i)), static_cast<TokenId>(i));
  }
  const std::size_t top = std::min(k, v);
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(top), scored.end(),
                    [](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first > b.first;
                      return a.second < b.second;
                    });
  std::vector<Neighbor> out;
  out.reserve(top);
  for (std::size_t i = 0; i < top; ++i) {
    out.push_back({table.vocab.token(scored[i].second), scored[i].first});
  }
  return out;
}

}  // namespace logad
