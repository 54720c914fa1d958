#pragma once

#include "naa/common.hpp"
#include "naa/embedding_io.hpp"
#include "naa/noise_em.hpp"

#include <json.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace naa {

enum class Metric { cosine, euclidean };

/// Exact brute-force retrieval over a target embedding set. For the cosine
/// metric the columns are stored unit-normalized; zero columns are excluded
/// from every search and listed in excluded().
class NnIndex {
 public:
  explicit NnIndex(const EmbeddingSet& target, Metric metric = Metric::cosine);

  const EmbeddingSet& target() const { return *target_; }
  Metric metric() const { return metric_; }
  const Matrix& columns() const { return columns_; }
  const std::vector<char>& valid() const { return valid_; }
  const std::vector<Index>& excluded() const { return excluded_; }

 private:
  const EmbeddingSet* target_;
  Metric metric_;
  Matrix columns_;
  std::vector<char> valid_;
  std::vector<Index> excluded_;
};

struct Neighbor {
  Index index = -1;
  std::string token;
  double score = 0.0;  // cosine similarity, or minus squared distance
};

/// Top-k targets by score, ties broken by ascending target index.
std::vector<Neighbor> nearest_neighbor(const NnIndex& index, const Vector& query, int k);

/// Nearest target per column of `queries` (-1 for a zero query).
std::vector<Index> nearest_targets(const NnIndex& index, const Matrix& queries);

struct PrecisionAt1 {
  double p_at_1 = 0.0;
  std::size_t n_queries = 0;
  std::size_t n_correct = 0;
};

/// Queries are the distinct source words of `test`; a query is correct when
/// its nearest mapped neighbor is any of its gold targets.
PrecisionAt1 precision_at_1(const Matrix& Q, const Lexicon& test, const EmbeddingSet& src,
                            const EmbeddingSet& tgt, Metric metric = Metric::cosine);

struct EvalReport {
  std::optional<double> p_at_1;
  std::size_t n_queries = 0;
  std::optional<double> test_error;
  int iterations = 0;
  double noise_rate = 0.0;
};

struct ShiftEntry {
  std::string token;
  double distance = 0.0;  // 1 - cos(Q x, y), in [0, 2]
  std::optional<bool> aligned;
};

struct ShiftRanking {
  std::vector<ShiftEntry> entries;  // descending distance
  std::size_t dropped_low_frequency = 0;
  std::size_t dropped_missing_frequency = 0;
  std::size_t dropped_empty = 0;
};

struct FrequencyFilter {
  const FrequencyTable* src = nullptr;
  const FrequencyTable* tgt = nullptr;
  double threshold = 0.0;
};

/// Post-alignment cosine distance for every pair of an identity lexicon.
/// With a filter, tokens below the threshold in either table (or missing
/// from one) are dropped. Labels come from `resp` when given.
ShiftRanking rank_semantic_shift(const Matrix& Q, const Lexicon& identity, const EmbeddingSet& src,
                                 const EmbeddingSet& tgt,
                                 const std::optional<FrequencyFilter>& filter = std::nullopt,
                                 const Responsibilities* resp = nullptr);

/// Pairs each of the first `size_cap` source words (vocabulary order stands
/// in for frequency) with its nearest target under Q.
Lexicon refine_lexicon(const Matrix& Q, const EmbeddingSet& src, const EmbeddingSet& tgt,
                       int size_cap, Metric metric = Metric::cosine);

nlohmann::json to_json(const EvalReport& report);
nlohmann::json to_json(const ShiftRanking& ranking);
std::string to_tsv(const EvalReport& report);
std::string to_tsv(const ShiftRanking& ranking);

}  // namespace naa
