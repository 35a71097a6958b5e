#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "logad/matrix.hpp"
#include "logad/preprocess.hpp"

namespace logad {

using TokenId = std::uint32_t;

inline constexpr TokenId kUnknownId = 0;

class Vocabulary {
 public:
  // Vocabulary holding only "$unk".
  Vocabulary();

  // Rebuilds a vocabulary from persisted (token, count) rows; row 0 must be "$unk".
  static Vocabulary from_rows(std::vector<std::pair<std::string, std::uint64_t>> rows);

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  std::uint64_t count(TokenId id) const { return counts_.at(id); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }

  // Unknown tokens map to kUnknownId.
  TokenId id(std::string_view token) const;
  bool contains(std::string_view token) const;

  std::vector<TokenId> encode(const TokenSequence& tokens) const;

  bool operator==(const Vocabulary&) const = default;

 private:
  friend Vocabulary build_vocab(const std::vector<TokenSequence>&, std::uint64_t);

  std::vector<std::string> tokens_;
  std::vector<std::uint64_t> counts_;
  std::map<std::string, TokenId, std::less<>> ids_;
};

// Tokens seen fewer than min_count times fold into "$unk". Ids are assigned by
// descending count, then lexicographically; "$unk" is always id 0.
Vocabulary build_vocab(const std::vector<TokenSequence>& corpus, std::uint64_t min_count);

struct EmbeddingTable {
  Vocabulary vocab;
  Matrix input;   // V x H, the embeddings proper
  Matrix output;  // V x H, negative-sampling output weights
  std::size_t dim = 0;

  bool operator==(const EmbeddingTable&) const = default;
};

struct EmbedConfig {
  std::size_t dim = 16;
  std::size_t window = 2;  // context radius
  std::size_t negatives = 5;
  std::size_t epochs = 50;
  double learning_rate = 0.025;
  double min_learning_rate = 1e-4;
  std::uint64_t min_count = 1;
  std::uint64_t seed = 42;

  void validate() const;
};

// Table with the standard initialization: input rows uniform in
// [-0.5/H, 0.5/H], output rows zero.
EmbeddingTable init_table(Vocabulary vocab, std::size_t dim, std::uint64_t seed);

// Sampling distribution proportional to count^0.75, stored as a CDF.
class NoiseDistribution {
 public:
  explicit NoiseDistribution(const Vocabulary& vocab);
  template <class Gen>
  TokenId draw(Gen& rng) const { return from_uniform(rng.uniform()); }
  TokenId from_uniform(double u) const;

 private:
  std::vector<double> cdf_;
};

// Loss for one (context, target, negatives) triple:
//   -log sigma(u_t . h) - sum_n log sigma(-u_n . h),  h = mean of context input rows.
double cbow_loss(const EmbeddingTable& table, std::span<const TokenId> context, TokenId target,
                 std::span<const TokenId> negatives);

struct CbowGradient {
  Matrix input;   // d loss / d input rows
  Matrix output;  // d loss / d output rows
};

CbowGradient cbow_gradient(const EmbeddingTable& table, std::span<const TokenId> context,
                           TokenId target, std::span<const TokenId> negatives);

// One SGD step on the triple; returns the loss before the update.
double cbow_step(EmbeddingTable& table, std::span<const TokenId> context, TokenId target,
                 std::span<const TokenId> negatives, double learning_rate);

struct CbowTrainResult {
  EmbeddingTable table;
  std::vector<double> epoch_loss;  // mean pre-update loss per epoch
  std::size_t updates = 0;
};

// Vocabulary is built with cfg.min_count. Throws EmptyCorpus when every
// sequence is empty.
CbowTrainResult train_cbow_detailed(const std::vector<TokenSequence>& corpus, const EmbedConfig& cfg);
EmbeddingTable train_cbow(const std::vector<TokenSequence>& corpus, const EmbedConfig& cfg);

// Mean of input rows; empty sequence maps to the "$unk" row.
EntryVector embed_entry(const TokenSequence& tokens, const EmbeddingTable& table);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

struct Neighbor {
  std::string token;
  double similarity = 0.0;
};

std::vector<Neighbor> nearest_neighbors(std::span<const double> query, const EmbeddingTable& table,
                                        std::size_t k);

}  // namespace logad
