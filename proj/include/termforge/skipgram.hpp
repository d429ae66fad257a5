#pragma once

// Skip-gram word vectors trained with negative sampling, and their
// composition into noun-phrase vectors.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "termforge/corpus.hpp"
#include "termforge/couples.hpp"
#include "termforge/feature_space.hpp"
#include "termforge/matrix.hpp"

namespace termforge {

struct SkipgramConfig {
  std::size_t dim = 100;
  std::size_t window = 5;     // context tokens on each side
  std::size_t negatives = 5;  // noise samples per positive pair
  std::size_t epochs = 5;
  std::size_t min_count = 2;
  double learning_rate = 0.025;
  double min_learning_rate = 1e-4;
  std::uint64_t seed = 1;
  // 1 = deterministic single-threaded training. More workers run lock-free
  // (Hogwild) updates over sentences and are not reproducible bit for bit.
  int workers = 1;

  void validate() const;
};

struct EmbeddingTable {
  std::vector<std::string> words;  // row order
  std::map<std::string, std::size_t, std::less<>> index;
  Matrix vectors;                  // words.size() x dim

  std::size_t dim() const noexcept { return vectors.cols(); }
  std::optional<std::size_t> find(std::string_view word) const;

  bool operator==(const EmbeddingTable&) const = default;
};

// (center, context) position pairs of one sentence with a fixed window.
std::vector<std::pair<std::size_t, std::size_t>> context_pairs(std::size_t length, std::size_t window);

/// Negative-sampling loss for one (center, context, negatives) micro-batch:
///   -log sigmoid(u_o . v_c) - sum_k log sigmoid(-u_k . v_c)
/// where v_c is the center's input vector, u_o the context's output vector and
/// u_k the negatives' output vectors.
double sgns_loss(std::span<const double> center, std::span<const double> context,
                 const std::vector<std::span<const double>>& negatives);

struct SgnsGradient {
  std::vector<double> center;
  std::vector<double> context;
  std::vector<std::vector<double>> negatives;
};

// Analytic gradient of sgns_loss with respect to each vector.
SgnsGradient sgns_gradient(std::span<const double> center, std::span<const double> context,
                           const std::vector<std::span<const double>>& negatives);

/// Trains on the lemmas of every sentence (punctuation tokens skipped).
/// Vocabulary: lemmas with frequency >= min_count, ordered by descending
/// frequency then lexicographically. Negatives are drawn from the unigram
/// distribution raised to 0.75. The learning rate decays linearly from
/// learning_rate to min_learning_rate over all training pairs.
/// Throws Error when the vocabulary is empty.
EmbeddingTable train_skipgram(const Corpus& corpus, const SkipgramConfig& config);

/// NP vectors: a one-word NP takes its word's row, a multiword NP the mean of
/// its in-vocabulary words' rows. NPs without any in-vocabulary word are left
/// out and listed in `dropped`.
Representation np_vectors(const EmbeddingTable& table, const std::vector<NounPhrase>& nps);

// Header "rows dim", then "<word> v1 ... vd" per line.
void write_embeddings(const EmbeddingTable& table, const std::filesystem::path& path);
EmbeddingTable read_embeddings(const std::filesystem::path& path);

}  // namespace termforge
