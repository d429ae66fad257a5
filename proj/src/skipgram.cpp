#include "termforge/skipgram.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <omp.h>

#include "termforge/error.hpp"
#include "termforge/text_io.hpp"

namespace termforge {

namespace {

double open_unit(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t p = 0; p < a.size(); ++p) acc += a[p] * b[p];
  return acc;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log(sigmoid(x)) without overflow for large |x|.
double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

// Samples word ids proportionally to count^0.75.
class NoiseDistribution {
 public:
  explicit NoiseDistribution(const std::vector<std::size_t>& counts) {
    double acc = 0.0;
    for (auto c : counts) {
      acc += std::pow(static_cast<double>(c), 0.75);
      cumulative_.push_back(acc);
    }
  }

  std::size_t sample(std::mt19937_64& rng) const {
    const double u = open_unit(rng) * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                                 cumulative_.size() - 1);
  }

 private:
  std::vector<double> cumulative_;
};

struct Trainer {
  const SkipgramConfig& config;
  const NoiseDistribution& noise;
  Matrix& input;
  Matrix& output;
  std::size_t total_pairs;
  std::atomic<std::size_t> processed{0};

  void sentence(const std::vector<std::size_t>& ids, std::mt19937_64& rng) {
    std::vector<std::span<const double>> neg_rows;
    std::vector<std::size_t> neg_ids;
    for (const auto& [c, o] : context_pairs(ids.size(), config.window)) {
      const std::size_t center = ids[c];
      const std::size_t context = ids[o];
      const double progress =
          static_cast<double>(processed.fetch_add(1, std::memory_order_relaxed)) /
          static_cast<double>(total_pairs);
      const double lr = std::max(config.min_learning_rate,
                                 config.learning_rate -
                                     (config.learning_rate - config.min_learning_rate) * progress);
      neg_rows.clear();
      neg_ids.clear();
      for (std::size_t k = 0; k < config.negatives; ++k) {
        const auto w = noise.sample(rng);
        if (w == context) continue;
        neg_ids.push_back(w);
        neg_rows.push_back(output.row(w));
      }
      const auto g = sgns_gradient(input.row(center), output.row(context), neg_rows);
      auto apply = [lr](std::span<double> x, const std::vector<double>& grad) {
        for (std::size_t p = 0; p < x.size(); ++p) x[p] -= lr * grad[p];
      };
      apply(output.row(context), g.context);
      for (std::size_t k = 0; k < neg_ids.size(); ++k) apply(output.row(neg_ids[k]), g.negatives[k]);
      apply(input.row(center), g.center);
    }
  }
};

}  // namespace

void SkipgramConfig::validate() const {
  if (dim < 1 || window < 1 || negatives < 1 || epochs < 1) {
    throw Error("skip-gram: dim, window, negatives and epochs must all be at least 1");
  }
  if (!(learning_rate > 0.0) || min_learning_rate < 0.0) throw Error("skip-gram: bad learning rate");
  if (workers < 1) throw Error("skip-gram: workers must be at least 1");
}

std::optional<std::size_t> EmbeddingTable::find(std::string_view word) const {
  const auto it = index.find(word);
  if (it == index.end()) return std::nullopt;
  return it->second;
}

std::vector<std::pair<std::size_t, std::size_t>> context_pairs(std::size_t length, std::size_t window) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t c = 0; c < length; ++c) {
    const std::size_t lo = c >= window ? c - window : 0;
    const std::size_t hi = std::min(length - 1, c + window);
    for (std::size_t o = lo; o <= hi; ++o) {
      if (o != c) pairs.emplace_back(c, o);
    }
  }
  return pairs;
}

double sgns_loss(std::span<const double> center, std::span<const double> context,
                 const std::vector<std::span<const double>>& negatives) {
  double loss = -log_sigmoid(dot(context, center));
  for (const auto& u : negatives) loss -= log_sigmoid(-dot(u, center));
  return loss;
}

SgnsGradient sgns_gradient(std::span<const double> center, std::span<const double> context,
                           const std::vector<std::span<const double>>& negatives) {
  const std::size_t d = center.size();
  SgnsGradient g{std::vector<double>(d, 0.0), std::vector<double>(d), {}};
  const double pos = sigmoid(dot(context, center)) - 1.0;
  for (std::size_t p = 0; p < d; ++p) {
    g.context[p] = pos * center[p];
    g.center[p] += pos * context[p];
  }
  for (const auto& u : negatives) {
    const double s = sigmoid(dot(u, center));
    std::vector<double> gu(d);
    for (std::size_t p = 0; p < d; ++p) {
      gu[p] = s * center[p];
      g.center[p] += s * u[p];
    }
    g.negatives.push_back(std::move(gu));
  }
  return g;
}

EmbeddingTable train_skipgram(const Corpus& corpus, const SkipgramConfig& config) {
  config.validate();

  std::map<std::string, std::size_t> freq;
  for (const auto& doc : corpus.documents) {
    for (const auto& s : doc.sentences) {
      for (const auto& t : s.tokens) {
        if (t.upos != "PUNCT") ++freq[t.lemma];
      }
    }
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (const auto& [w, n] : freq) {
    if (n >= config.min_count) kept.emplace_back(w, n);
  }
  if (kept.empty()) {
    throw Error("skip-gram: no lemma occurs at least min_count = " + std::to_string(config.min_count) +
                " times");
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  EmbeddingTable table;
  std::vector<std::size_t> counts;
  for (const auto& [w, n] : kept) {
    table.index.emplace(w, table.words.size());
    table.words.push_back(w);
    counts.push_back(n);
  }

  std::vector<std::vector<std::size_t>> sentences;
  std::size_t pairs_per_epoch = 0;
  for (const auto& doc : corpus.documents) {
    for (const auto& s : doc.sentences) {
      std::vector<std::size_t> ids;
      for (const auto& t : s.tokens) {
        if (t.upos == "PUNCT") continue;
        if (auto id = table.find(t.lemma)) ids.push_back(*id);
      }
      if (ids.size() < 2) continue;
      pairs_per_epoch += context_pairs(ids.size(), config.window).size();
      sentences.push_back(std::move(ids));
    }
  }

  std::mt19937_64 rng(config.seed);
  Matrix input(table.words.size(), config.dim);
  Matrix output(table.words.size(), config.dim, 0.0);
  for (auto& x : input.data()) x = (open_unit(rng) - 0.5) / static_cast<double>(config.dim);

  const NoiseDistribution noise(counts);
  Trainer trainer{config, noise, input, output, std::max<std::size_t>(1, pairs_per_epoch * config.epochs)};

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.workers == 1) {
      for (const auto& ids : sentences) trainer.sentence(ids, rng);
      continue;
    }
    const auto n = static_cast<std::ptrdiff_t>(sentences.size());
#pragma omp parallel num_threads(config.workers)
    {
      std::mt19937_64 local(config.seed ^ (0x9E3779B97F4A7C15ULL * (epoch + 1)) ^
                            static_cast<std::uint64_t>(omp_get_thread_num() + 1));
#pragma omp for schedule(dynamic, 16)
      for (std::ptrdiff_t i = 0; i < n; ++i) trainer.sentence(sentences[static_cast<std::size_t>(i)], local);
    }
  }

  table.vectors = std::move(input);
  return table;
}

Representation np_vectors(const EmbeddingTable& table, const std::vector<NounPhrase>& nps) {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> dropped;
  for (const auto& np : nps) {
    std::istringstream words(np.text());
    std::string w;
    std::vector<double> sum(table.dim(), 0.0);
    std::size_t found = 0;
    while (words >> w) {
      if (const auto id = table.find(w)) {
        const auto r = table.vectors.row(*id);
        for (std::size_t p = 0; p < sum.size(); ++p) sum[p] += r[p];
        ++found;
      }
    }
    if (found == 0) {
      dropped.push_back(np.text());
      continue;
    }
    for (auto& x : sum) x /= static_cast<double>(found);
    labels.push_back(np.text());
    rows.push_back(std::move(sum));
  }
  Matrix m(rows.size(), table.dim());
  for (std::size_t i = 0; i < rows.size(); ++i) std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  auto rep = make_representation(std::move(labels), std::move(m), Provenance::NpW2v);
  rep.dropped.insert(rep.dropped.end(), dropped.begin(), dropped.end());
  return rep;
}

void write_embeddings(const EmbeddingTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << table.words.size() << ' ' << table.dim() << '\n';
  for (std::size_t i = 0; i < table.words.size(); ++i) {
    out << table.words[i];
    for (double x : table.vectors.row(i)) out << ' ' << format_real(x);
    out << '\n';
  }
}

EmbeddingTable read_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::size_t rows = 0, dim = 0;
  std::string line;
  if (!std::getline(in, line) || !(std::istringstream(line) >> rows >> dim)) {
    throw ParseError(1, "expected header 'rows dim'", path.string());
  }
  EmbeddingTable table;
  table.vectors = Matrix(rows, dim);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) throw Error(path.string() + ": fewer rows than declared");
    std::istringstream fields(line);
    std::string word, tok;
    fields >> word;
    if (!table.index.emplace(word, i).second) {
      throw ParseError(i + 2, "duplicate word '" + word + "'", path.string());
    }
    table.words.push_back(word);
    for (std::size_t p = 0; p < dim; ++p) {
      if (!(fields >> tok)) throw ParseError(i + 2, "too few values", path.string());
      table.vectors(i, p) = parse_real(tok);
    }
  }
  return table;
}

}  // namespace termforge
