#pragma once

#include "naa/common.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace naa {

/// A vocabulary paired with a d x n matrix whose column i embeds tokens()[i].
///
/// Construction validates that tokens are unique, the column count matches the
/// vocabulary and every entry is finite; the object is immutable afterwards.
class EmbeddingSet {
 public:
  EmbeddingSet() = default;
  EmbeddingSet(std::vector<std::string> tokens, Matrix vectors);

  Index dim() const { return vectors_.rows(); }
  Index size() const { return vectors_.cols(); }
  bool empty() const { return tokens_.empty(); }

  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::string& token(Index i) const { return tokens_[static_cast<std::size_t>(i)]; }
  const Matrix& vectors() const { return vectors_; }
  auto column(Index i) const { return vectors_.col(i); }

  std::optional<Index> find(std::string_view token) const;

 private:
  std::vector<std::string> tokens_;
  Matrix vectors_;
  std::unordered_map<std::string, Index> index_;
};

struct LexiconPair {
  Index src = 0;
  Index tgt = 0;
  friend bool operator==(const LexiconPair&, const LexiconPair&) = default;
};

/// Ordered supervision pairs. A source index may appear with several targets
/// (multiple translations); identical pairs never appear twice.
struct Lexicon {
  std::vector<LexiconPair> pairs;
  std::vector<std::string> src_tokens;
  std::vector<std::string> tgt_tokens;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
  void push_back(LexiconPair pair, std::string src_token, std::string tgt_token);
};

/// Token -> relative corpus frequency in [0, 1].
class FrequencyTable {
 public:
  FrequencyTable() = default;
  explicit FrequencyTable(std::unordered_map<std::string, double> freqs);

  std::optional<double> lookup(std::string_view token) const;
  std::size_t size() const { return freqs_.size(); }

 private:
  std::unordered_map<std::string, double> freqs_;
};

using StopList = std::unordered_set<std::string>;

struct EmbeddingLoadOptions {
  std::optional<std::size_t> limit;
  bool normalize = false;
};

struct EmbeddingLoadResult {
  EmbeddingSet embeddings;
  std::size_t skipped = 0;
  bool had_header = false;
};

/// Reads `token v1 ... vd` lines, with an optional word2vec `n d` header.
/// Rows of the wrong width, with non-finite values, or repeating an earlier
/// token are skipped and counted. Throws FormatError when no row survives or
/// more than half the rows disagree with d.
EmbeddingLoadResult load_embeddings(const std::filesystem::path& path,
                                    const EmbeddingLoadOptions& options = {});

void save_embeddings(const std::filesystem::path& path, const EmbeddingSet& set,
                     bool write_header = false);

struct LexiconLoadResult {
  Lexicon lexicon;
  std::size_t skipped = 0;     // malformed lines or OOV tokens
  std::size_t duplicates = 0;  // exact repeats of an earlier pair
};

/// Reads `source<TAB>target` lines (two space-separated fields are accepted
/// when a line has no tab). File order is preserved.
LexiconLoadResult load_lexicon(const std::filesystem::path& path, const EmbeddingSet& src,
                               const EmbeddingSet& tgt);

/// Pairs every token found in both vocabularies with itself, in source order.
Lexicon build_identity_lexicon(const EmbeddingSet& src, const EmbeddingSet& tgt,
                               const StopList* stoplist = nullptr);

StopList load_stoplist(const std::filesystem::path& path);
FrequencyTable load_frequency_table(const std::filesystem::path& path);

struct PairMatrices {
  Matrix X;  // column t = source vector of pair t
  Matrix Y;  // column t = target vector of pair t
};

PairMatrices gather_pairs(const Lexicon& lexicon, const EmbeddingSet& src, const EmbeddingSet& tgt);

}  // namespace naa
