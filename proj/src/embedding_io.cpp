#include "naa/embedding_io.hpp"

#include "naa/text_format.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <utility>

namespace naa {

namespace {

std::ifstream open_for_reading(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read file: " + path.string());
  return in;
}

struct ParsedRow {
  std::string token;
  std::vector<double> values;
};

}  // namespace

EmbeddingSet::EmbeddingSet(std::vector<std::string> tokens, Matrix vectors)
    : tokens_(std::move(tokens)), vectors_(std::move(vectors)) {
  if (static_cast<Index>(tokens_.size()) != vectors_.cols()) {
    throw DataError("embedding set: " + std::to_string(tokens_.size()) + " tokens but " +
                    std::to_string(vectors_.cols()) + " columns");
  }
  if (!vectors_.allFinite()) throw DataError("embedding set: non-finite entry");
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<Index>(i)).second) {
      throw DataError("embedding set: duplicate token '" + tokens_[i] + "'");
    }
  }
}

std::optional<Index> EmbeddingSet::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void Lexicon::push_back(LexiconPair pair, std::string src_token, std::string tgt_token) {
  pairs.push_back(pair);
  src_tokens.push_back(std::move(src_token));
  tgt_tokens.push_back(std::move(tgt_token));
}

FrequencyTable::FrequencyTable(std::unordered_map<std::string, double> freqs)
    : freqs_(std::move(freqs)) {
  for (const auto& [token, f] : freqs_) {
    if (!(f >= 0.0 && f <= 1.0)) {
      throw DataError("frequency of '" + token + "' outside [0,1]");
    }
  }
}

std::optional<double> FrequencyTable::lookup(std::string_view token) const {
  auto it = freqs_.find(std::string(token));
  if (it == freqs_.end()) return std::nullopt;
  return it->second;
}

EmbeddingLoadResult load_embeddings(const std::filesystem::path& path,
                                    const EmbeddingLoadOptions& options) {
  auto in = open_for_reading(path);

  EmbeddingLoadResult result;
  std::optional<std::size_t> dim;
  std::vector<ParsedRow> rows;
  std::unordered_set<std::string> seen;
  std::size_t data_lines = 0;
  std::size_t width_mismatches = 0;
  bool first_line = true;

  std::string line;
  while (std::getline(in, line)) {
    const auto fields = text::split_whitespace(line);
    if (fields.empty()) continue;

    if (first_line) {
      first_line = false;
      if (fields.size() == 2) {
        auto n = text::parse_integer(fields[0]);
        auto d = text::parse_integer(fields[1]);
        if (n && d && *n >= 0 && *d > 0) {
          result.had_header = true;
          dim = static_cast<std::size_t>(*d);
          continue;
        }
      }
    }

    ++data_lines;
    if (!dim) dim = fields.size() - 1;
    if (fields.size() - 1 != *dim || *dim == 0) {
      ++width_mismatches;
      ++result.skipped;
      continue;
    }

    ParsedRow row;
    row.token = std::string(fields[0]);
    row.values.reserve(*dim);
    bool ok = true;
    for (std::size_t k = 1; k < fields.size(); ++k) {
      auto v = text::parse_real(fields[k]);
      if (!v || !std::isfinite(*v)) {
        ok = false;
        break;
      }
      row.values.push_back(*v);
    }
    if (!ok || !seen.insert(row.token).second) {
      ++result.skipped;
      continue;
    }
    rows.push_back(std::move(row));
    if (options.limit && rows.size() >= *options.limit) break;
  }

  if (data_lines > 0 && 2 * width_mismatches > data_lines) {
    throw FormatError("inconsistent vector width on " + std::to_string(width_mismatches) + " of " +
                      std::to_string(data_lines) + " rows in " + path.string());
  }
  if (rows.empty()) throw FormatError("zero valid rows in " + path.string());

  const auto d = static_cast<Index>(*dim);
  Matrix vectors(d, static_cast<Index>(rows.size()));
  std::vector<std::string> tokens;
  tokens.reserve(rows.size());
  for (std::size_t j = 0; j < rows.size(); ++j) {
    vectors.col(static_cast<Index>(j)) = Eigen::Map<const Vector>(rows[j].values.data(), d);
    tokens.push_back(std::move(rows[j].token));
  }
  if (options.normalize) {
    for (Index j = 0; j < vectors.cols(); ++j) {
      const double norm = vectors.col(j).norm();
      if (norm > 0.0) vectors.col(j) /= norm;
    }
  }
  result.embeddings = EmbeddingSet(std::move(tokens), std::move(vectors));
  return result;
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingSet& set, bool write_header) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path.string());
  if (write_header) out << set.size() << ' ' << set.dim() << '\n';
  for (Index j = 0; j < set.size(); ++j) {
    out << set.token(j);
    for (Index i = 0; i < set.dim(); ++i) out << ' ' << text::format_real(set.vectors()(i, j));
    out << '\n';
  }
  if (!out) throw DataError("write failed: " + path.string());
}

LexiconLoadResult load_lexicon(const std::filesystem::path& path, const EmbeddingSet& src,
                               const EmbeddingSet& tgt) {
  auto in = open_for_reading(path);
  LexiconLoadResult result;
  std::set<std::pair<Index, Index>> seen;

  std::string line;
  while (std::getline(in, line)) {
    const std::string_view view = text::strip_cr(line);
    if (text::trim(view).empty()) continue;

    std::string_view source;
    std::string_view target;
    if (const auto tab = view.find('\t'); tab != std::string_view::npos) {
      source = text::trim(view.substr(0, tab));
      target = text::trim(view.substr(tab + 1));
    } else {
      const auto fields = text::split_whitespace(view);
      if (fields.size() == 2) {
        source = fields[0];
        target = fields[1];
      }
    }
    if (source.empty() || target.empty()) {
      ++result.skipped;
      continue;
    }

    const auto s = src.find(source);
    const auto t = tgt.find(target);
    if (!s || !t) {
      ++result.skipped;
      continue;
    }
    if (!seen.emplace(*s, *t).second) {
      ++result.duplicates;
      continue;
    }
    result.lexicon.push_back({*s, *t}, std::string(source), std::string(target));
  }

  if (result.lexicon.empty()) throw DataError("zero resolvable pairs in " + path.string());
  return result;
}

Lexicon build_identity_lexicon(const EmbeddingSet& src, const EmbeddingSet& tgt,
                               const StopList* stoplist) {
  Lexicon lexicon;
  for (Index i = 0; i < src.size(); ++i) {
    const auto& token = src.token(i);
    if (stoplist && stoplist->contains(token)) continue;
    if (auto j = tgt.find(token)) lexicon.push_back({i, *j}, token, token);
  }
  if (lexicon.empty()) throw DataError("identity lexicon: empty vocabulary intersection");
  return lexicon;
}

StopList load_stoplist(const std::filesystem::path& path) {
  auto in = open_for_reading(path);
  StopList stop;
  std::string line;
  while (std::getline(in, line)) {
    const auto token = text::trim(line);
    if (!token.empty()) stop.emplace(token);
  }
  return stop;
}

FrequencyTable load_frequency_table(const std::filesystem::path& path) {
  auto in = open_for_reading(path);
  std::unordered_map<std::string, double> freqs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = text::strip_cr(line);
    if (text::trim(view).empty()) continue;
    const auto tab = view.find('\t');
    std::optional<double> f;
    std::string_view token;
    if (tab != std::string_view::npos) {
      token = text::trim(view.substr(0, tab));
      f = text::parse_real(text::trim(view.substr(tab + 1)));
    }
    if (token.empty() || !f || !(*f >= 0.0 && *f <= 1.0)) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": expected token<TAB>frequency in [0,1]");
    }
    freqs.insert_or_assign(std::string(token), *f);
  }
  return FrequencyTable(std::move(freqs));
}

PairMatrices gather_pairs(const Lexicon& lexicon, const EmbeddingSet& src, const EmbeddingSet& tgt) {
  if (lexicon.empty()) throw DataError("gather_pairs: empty lexicon");
  if (src.dim() != tgt.dim()) {
    throw DataError("dimension mismatch: source d=" + std::to_string(src.dim()) +
                    ", target d=" + std::to_string(tgt.dim()));
  }
  const auto n = static_cast<Index>(lexicon.size());
  PairMatrices out{Matrix(src.dim(), n), Matrix(tgt.dim(), n)};
  for (Index t = 0; t < n; ++t) {
    const auto& p = lexicon.pairs[static_cast<std::size_t>(t)];
    if (p.src < 0 || p.src >= src.size() || p.tgt < 0 || p.tgt >= tgt.size()) {
      throw DataError("gather_pairs: pair " + std::to_string(t) + " out of range");
    }
    out.X.col(t) = src.column(p.src);
    out.Y.col(t) = tgt.column(p.tgt);
  }
  return out;
}

}  // namespace naa
