#include "naa/evaluation.hpp"

#include "naa/kernels.hpp"
#include "naa/text_format.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace naa {

namespace {

void check_map_shape(const Matrix& Q, const EmbeddingSet& src, const EmbeddingSet& tgt) {
  if (Q.rows() != Q.cols() || Q.cols() != src.dim() || Q.rows() != tgt.dim()) {
    throw DataError("translation matrix does not match embedding dimensions");
  }
}

// Cosine queries are normalized; zero columns are reported through `zero`.
Matrix prepare_queries(const Matrix& queries, Metric metric, std::vector<char>& zero) {
  Matrix out = queries;
  zero.assign(static_cast<std::size_t>(queries.cols()), 0);
  for (Index j = 0; j < out.cols(); ++j) {
    const double norm = out.col(j).norm();
    if (norm == 0.0) {
      zero[static_cast<std::size_t>(j)] = 1;
    } else if (metric == Metric::cosine) {
      out.col(j) /= norm;
    }
  }
  return out;
}

}  // namespace

NnIndex::NnIndex(const EmbeddingSet& target, Metric metric)
    : target_(&target), metric_(metric), columns_(target.vectors()),
      valid_(static_cast<std::size_t>(target.size()), 1) {
  if (metric_ != Metric::cosine) return;
  for (Index j = 0; j < columns_.cols(); ++j) {
    const double norm = columns_.col(j).norm();
    if (norm == 0.0) {
      valid_[static_cast<std::size_t>(j)] = 0;
      excluded_.push_back(j);
    } else {
      columns_.col(j) /= norm;
    }
  }
}

std::vector<Neighbor> nearest_neighbor(const NnIndex& index, const Vector& query, int k) {
  if (k < 1) throw DataError("nearest_neighbor: k must be >= 1");
  if (query.size() != index.columns().rows()) throw DataError("nearest_neighbor: dimension mismatch");
  if (!query.allFinite()) throw DataError("nearest_neighbor: non-finite query");
  const double norm = query.norm();
  if (norm == 0.0) throw DataError("nearest_neighbor: zero query vector");

  const Vector scores = index.metric() == Metric::cosine
                            ? kernels::dot_scores(index.columns(), index.valid(), query / norm)
                            : kernels::neg_sq_distance_scores(index.columns(), index.valid(), query);

  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(scores.size()));
  for (Index j = 0; j < scores.size(); ++j)
    if (index.valid()[static_cast<std::size_t>(j)]) order.push_back(j);

  const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                    [&](Index a, Index b) {
                      if (scores(a) != scores(b)) return scores(a) > scores(b);
                      return a < b;
                    });

  std::vector<Neighbor> out;
  out.reserve(take);
  for (std::size_t r = 0; r < take; ++r) {
    const Index j = order[r];
    out.push_back({j, index.target().token(j), scores(j)});
  }
  return out;
}

std::vector<Index> nearest_targets(const NnIndex& index, const Matrix& queries) {
  if (queries.rows() != index.columns().rows()) throw DataError("nearest_targets: dimension mismatch");
  std::vector<char> zero;
  const Matrix prepared = prepare_queries(queries, index.metric(), zero);
  auto best = kernels::best_match(index.columns(), index.valid(), prepared,
                                  index.metric() == Metric::cosine);
  for (std::size_t q = 0; q < best.size(); ++q)
    if (zero[q]) best[q] = -1;
  return best;
}

PrecisionAt1 precision_at_1(const Matrix& Q, const Lexicon& test, const EmbeddingSet& src,
                            const EmbeddingSet& tgt, Metric metric) {
  if (test.empty()) throw DataError("precision_at_1: empty test lexicon");
  check_map_shape(Q, src, tgt);

  std::vector<Index> sources;
  std::unordered_map<Index, std::vector<Index>> gold;
  for (const auto& p : test.pairs) {
    auto [it, inserted] = gold.try_emplace(p.src);
    if (inserted) sources.push_back(p.src);
    it->second.push_back(p.tgt);
  }

  const Matrix mapped = Q * src.vectors()(Eigen::all, sources);
  const NnIndex index(tgt, metric);
  const auto predicted = nearest_targets(index, mapped);

  PrecisionAt1 out;
  out.n_queries = sources.size();
  for (std::size_t q = 0; q < sources.size(); ++q) {
    const auto& targets = gold.at(sources[q]);
    if (predicted[q] >= 0 && std::find(targets.begin(), targets.end(), predicted[q]) != targets.end()) {
      ++out.n_correct;
    }
  }
  out.p_at_1 = static_cast<double>(out.n_correct) / static_cast<double>(out.n_queries);
  return out;
}

ShiftRanking rank_semantic_shift(const Matrix& Q, const Lexicon& identity, const EmbeddingSet& src,
                                 const EmbeddingSet& tgt, const std::optional<FrequencyFilter>& filter,
                                 const Responsibilities* resp) {
  check_map_shape(Q, src, tgt);
  if (resp && resp->size() != static_cast<Index>(identity.size())) {
    throw DataError("rank_semantic_shift: responsibilities / lexicon length mismatch");
  }
  if (filter && (!filter->src || !filter->tgt)) {
    throw UsageError("rank_semantic_shift: frequency filter needs both tables");
  }

  ShiftRanking ranking;
  const auto n = static_cast<Index>(identity.size());
  std::vector<double> distance(static_cast<std::size_t>(n), -1.0);

#pragma omp parallel for schedule(static)
  for (Index t = 0; t < n; ++t) {
    const auto& p = identity.pairs[static_cast<std::size_t>(t)];
    const Vector mapped = Q * src.column(p.src);
    const double denom = mapped.norm() * tgt.column(p.tgt).norm();
    if (denom == 0.0) continue;
    const double cos = mapped.dot(tgt.column(p.tgt)) / denom;
    distance[static_cast<std::size_t>(t)] = std::clamp(1.0 - cos, 0.0, 2.0);
  }

  for (Index t = 0; t < n; ++t) {
    const auto k = static_cast<std::size_t>(t);
    if (distance[k] < 0.0) {
      ++ranking.dropped_empty;
      continue;
    }
    const auto& token = identity.tgt_tokens[k];
    if (filter) {
      const auto fs = filter->src->lookup(identity.src_tokens[k]);
      const auto ft = filter->tgt->lookup(token);
      if (!fs || !ft) {
        ++ranking.dropped_missing_frequency;
        continue;
      }
      if (*fs < filter->threshold || *ft < filter->threshold) {
        ++ranking.dropped_low_frequency;
        continue;
      }
    }
    ShiftEntry e{token, distance[k], std::nullopt};
    if (resp) e.aligned = resp->h[k];
    ranking.entries.push_back(std::move(e));
  }

  std::stable_sort(ranking.entries.begin(), ranking.entries.end(),
                   [](const ShiftEntry& a, const ShiftEntry& b) { return a.distance > b.distance; });
  return ranking;
}

Lexicon refine_lexicon(const Matrix& Q, const EmbeddingSet& src, const EmbeddingSet& tgt,
                       int size_cap, Metric metric) {
  if (size_cap < 1) throw DataError("refine_lexicon: size cap must be >= 1");
  check_map_shape(Q, src, tgt);
  const Index count = std::min<Index>(size_cap, src.size());
  const Matrix mapped = Q * src.vectors().leftCols(count);
  const NnIndex index(tgt, metric);
  const auto best = nearest_targets(index, mapped);

  Lexicon lexicon;
  for (Index i = 0; i < count; ++i) {
    const Index j = best[static_cast<std::size_t>(i)];
    if (j < 0) continue;
    lexicon.push_back({i, j}, src.token(i), tgt.token(j));
  }
  return lexicon;
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json j;
  j["p_at_1"] = report.p_at_1 ? nlohmann::json(*report.p_at_1) : nlohmann::json(nullptr);
  j["n_queries"] = report.n_queries;
  j["test_error"] = report.test_error ? nlohmann::json(*report.test_error) : nlohmann::json(nullptr);
  j["iterations"] = report.iterations;
  j["noise_rate"] = report.noise_rate;
  return j;
}

nlohmann::json to_json(const ShiftRanking& ranking) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& e : ranking.entries) {
    rows.push_back({e.token, e.distance,
                    e.aligned ? nlohmann::json(label_name(*e.aligned)) : nlohmann::json(nullptr)});
  }
  return {{"rankings", rows},
          {"dropped_low_frequency", ranking.dropped_low_frequency},
          {"dropped_missing_frequency", ranking.dropped_missing_frequency},
          {"dropped_empty", ranking.dropped_empty}};
}

std::string to_tsv(const EvalReport& report) {
  std::ostringstream out;
  out << "p_at_1\tn_queries\ttest_error\titerations\tnoise_rate\n"
      << (report.p_at_1 ? text::format_real(*report.p_at_1) : "NA") << '\t' << report.n_queries << '\t'
      << (report.test_error ? text::format_real(*report.test_error) : "NA") << '\t'
      << report.iterations << '\t' << text::format_real(report.noise_rate) << '\n';
  return out.str();
}

std::string to_tsv(const ShiftRanking& ranking) {
  std::ostringstream out;
  out << "rank\ttoken\tdistance\tlabel\n";
  for (std::size_t r = 0; r < ranking.entries.size(); ++r) {
    const auto& e = ranking.entries[r];
    out << r + 1 << '\t' << e.token << '\t' << text::format_real(e.distance) << '\t'
        << (e.aligned ? label_name(*e.aligned) : "NA") << '\n';
  }
  return out.str();
}

}  // namespace naa
