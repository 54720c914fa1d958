#include "naa/experiments.hpp"

#include "naa/text_format.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>

namespace naa {

namespace {

std::mt19937_64 stream(std::uint64_t seed, std::uint32_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), tag};
  return std::mt19937_64(seq);
}

Matrix standard_normal(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix M(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) M(i, j) = normal(rng);
  return M;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path.string());
  return out;
}

nlohmann::json matrix_json(const Matrix& M) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index i = 0; i < M.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

MethodOutcome evaluate_method(Method method, const SyntheticProblem& problem, const SgdConfig& sgd,
                              const EmConfig& em) {
  auto fit = fit_method(method, problem.X, problem.Y, sgd, em);
  const auto clean = mask_to_columns(problem.clean_mask);
  MethodOutcome out;
  out.method = method;
  out.clean_error = alignment_error(fit.Q.Q, problem.X, problem.Y, clean);
  out.clean_error_mean = out.clean_error / static_cast<double>(clean.size());
  if (fit.em) out.labels = fit.em->responsibilities.h;
  out.Q = std::move(fit.Q);
  return out;
}

nlohmann::json variant_json(const Synthetic2dVariant& v) {
  const auto& pr = v.problem;
  const Matrix gold = pr.Q_gold.Q * pr.X;
  nlohmann::json points = nlohmann::json::array();
  for (Index t = 0; t < pr.X.cols(); ++t) {
    points.push_back({{"x", {pr.X(0, t), pr.X(1, t)}},
                      {"y", {pr.Y(0, t), pr.Y(1, t)}},
                      {"y_gold", {gold(0, t), gold(1, t)}},
                      {"clean", static_cast<bool>(pr.clean_mask[static_cast<std::size_t>(t)])}});
  }
  nlohmann::json methods = nlohmann::json::object();
  for (const auto& o : v.outcomes) {
    const Matrix pred = o.Q.Q * pr.X;
    nlohmann::json predicted = nlohmann::json::array();
    for (Index t = 0; t < pred.cols(); ++t) predicted.push_back({pred(0, t), pred(1, t)});
    nlohmann::json entry{{"clean_error", o.clean_error},
                         {"clean_error_mean", o.clean_error_mean},
                         {"Q", matrix_json(o.Q.Q)},
                         {"predicted", predicted}};
    if (o.labels) {
      nlohmann::json labels = nlohmann::json::array();
      for (bool h : *o.labels) labels.push_back(label_name(h));
      entry["labels"] = labels;
    }
    methods[std::string(method_name(o.method))] = std::move(entry);
  }
  return {{"p", pr.p}, {"Q_gold", matrix_json(pr.Q_gold.Q)}, {"points", points}, {"methods", methods}};
}

}  // namespace

std::string_view method_name(Method method) {
  switch (method) {
    case Method::op: return "op";
    case Method::sgd: return "sgd";
    case Method::em_hard: return "em-hard";
    case Method::em_soft: return "em-soft";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  if (name == "op") return Method::op;
  if (name == "sgd") return Method::sgd;
  if (name == "em-hard") return Method::em_hard;
  if (name == "em-soft") return Method::em_soft;
  throw UsageError("unknown method '" + std::string(name) + "' (expected op, sgd, em-hard, em-soft)");
}

bool is_em(Method method) { return method == Method::em_hard || method == Method::em_soft; }

FitResult fit_method(Method method, const Matrix& X, const Matrix& Y, const SgdConfig& sgd,
                     const EmConfig& em) {
  switch (method) {
    case Method::op: return {procrustes(X, Y), std::nullopt};
    case Method::sgd: return {sgd_align(X, Y, sgd), std::nullopt};
    case Method::em_hard:
    case Method::em_soft: {
      EmConfig cfg = em;
      cfg.mode = method == Method::em_hard ? EmMode::hard : EmMode::soft;
      auto result = em_fit(X, Y, cfg);
      TranslationMatrix Q = result.model.Q;
      return {std::move(Q), std::move(result)};
    }
  }
  throw UsageError("unknown method");
}

SyntheticProblem make_noisy_problem(Index n, Index d, double p, std::uint64_t seed) {
  if (n < 1 || d < 1) throw DataError("make_noisy_problem: n and d must be >= 1");
  if (!(p >= 0.0 && p < 1.0)) throw DataError("make_noisy_problem: p must lie in [0, 1)");
  const auto n_noisy = static_cast<Index>(std::llround(p * static_cast<double>(n)));
  if (n_noisy >= n) throw DataError("make_noisy_problem: p leaves no clean pairs at this n");

  SyntheticProblem pr;
  pr.p = p;
  pr.seed = seed;
  pr.Q_gold = random_orthogonal(d, seed);

  auto rng_x = stream(seed, 1);
  pr.X = standard_normal(d, n, rng_x);
  pr.Y = pr.Q_gold.Q * pr.X;
  pr.clean_mask.assign(static_cast<std::size_t>(n), true);

  auto rng_pick = stream(seed, 2);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng_pick);
  std::sort(order.begin(), order.begin() + n_noisy);

  auto rng_noise = stream(seed, 3);
  for (Index k = 0; k < n_noisy; ++k) {
    const Index t = order[static_cast<std::size_t>(k)];
    pr.clean_mask[static_cast<std::size_t>(t)] = false;
    pr.X.col(t) = standard_normal(d, 1, rng_noise);
    pr.Y.col(t) = standard_normal(d, 1, rng_noise);
  }
  return pr;
}

const MethodOutcome& Synthetic2dVariant::outcome(Method m) const {
  for (const auto& o : outcomes)
    if (o.method == m) return o;
  throw UsageError("method not run: " + std::string(method_name(m)));
}

SgdConfig synthetic_2d_sgd_defaults() {
  SgdConfig cfg;
  cfg.learning_rate = 1e-2;
  cfg.epochs = 5000;
  cfg.batch_size = 10;
  return cfg;
}

Synthetic2dReport synthetic_2d(std::uint64_t seed, const SgdConfig& sgd, const EmConfig& em) {
  constexpr Index n = 10;
  constexpr Index d = 2;
  Synthetic2dReport report;
  report.seed = seed;
  for (auto [variant, p] : {std::pair{&report.noise_free, 0.0}, std::pair{&report.noisy, 0.1}}) {
    variant->problem = make_noisy_problem(n, d, p, seed);
    for (Method m : {Method::op, Method::sgd, Method::em_hard}) {
      variant->outcomes.push_back(evaluate_method(m, variant->problem, sgd, em));
    }
  }
  return report;
}

nlohmann::json to_json(const Synthetic2dReport& report) {
  return {{"seed", report.seed},
          {"n", 10},
          {"d", 2},
          {"noise_free", variant_json(report.noise_free)},
          {"noisy", variant_json(report.noisy)}};
}

void NoiseCurveConfig::validate() const {
  if (n < 1 || d < 1 || test_n < 1) throw UsageError("noise curve: n, d, test_n must be >= 1");
  if (levels.empty() || seeds.empty() || methods.empty()) {
    throw UsageError("noise curve: levels, seeds and methods must be non-empty");
  }
  for (double p : levels) {
    if (!(p >= 0.0 && p < 1.0)) throw UsageError("noise curve: level " + text::format_real(p) + " outside [0,1)");
    if (std::llround(p * static_cast<double>(n)) >= n) {
      throw UsageError("noise curve: level " + text::format_real(p) + " leaves no clean pairs");
    }
  }
  sgd.validate();
  em.validate();
}

std::vector<NoiseCurveRow> noise_curve(const NoiseCurveConfig& config) {
  config.validate();
  const auto n_levels = static_cast<Index>(config.levels.size());
  const auto n_seeds = static_cast<Index>(config.seeds.size());
  const auto n_methods = static_cast<Index>(config.methods.size());
  const Index cells = n_levels * n_seeds;

  std::vector<NoiseCurveRow> rows(static_cast<std::size_t>(cells * n_methods));
  std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic, 1)
  for (Index cell = 0; cell < cells; ++cell) {
    try {
      const Index li = cell / n_seeds;
      const Index si = cell % n_seeds;
      const double p = config.levels[static_cast<std::size_t>(li)];
      const auto seed = config.seeds[static_cast<std::size_t>(si)];
      const auto problem = make_noisy_problem(config.n, config.d, p, seed);
      auto rng_test = stream(seed, 4);
      const Matrix X_test = standard_normal(config.d, config.test_n, rng_test);
      const Matrix Y_test = problem.Q_gold.Q * X_test;
      const auto clean = mask_to_columns(problem.clean_mask);

      for (Index mi = 0; mi < n_methods; ++mi) {
        const Method method = config.methods[static_cast<std::size_t>(mi)];
        const auto fit = fit_method(method, problem.X, problem.Y, config.sgd, config.em);
        NoiseCurveRow row{method,
                          p,
                          seed,
                          alignment_error(fit.Q.Q, problem.X, problem.Y, clean),
                          alignment_error(fit.Q.Q, X_test, Y_test),
                          static_cast<Index>(clean.size()),
                          config.test_n};
        rows[static_cast<std::size_t>((mi * n_levels + li) * n_seeds + si)] = row;
      }
    } catch (...) {
#pragma omp critical(naa_noise_curve_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

void write_noise_curve_csv(std::ostream& out, const std::vector<NoiseCurveRow>& rows) {
  out << "method,p,seed,train_error,test_error,train_error_mean,test_error_mean\n";
  for (const auto& r : rows) {
    out << method_name(r.method) << ',' << text::format_real(r.p) << ',' << r.seed << ','
        << text::format_real(r.train_error) << ',' << text::format_real(r.test_error) << ','
        << text::format_real(r.train_error / static_cast<double>(r.train_pairs)) << ','
        << text::format_real(r.test_error / static_cast<double>(r.test_pairs)) << '\n';
  }
}

AlignOutcome run_align(const AlignConfig& config) {
  if (config.responsibilities_only && !is_em(config.method)) {
    throw UsageError("clean-lexicon needs an EM method (em-hard or em-soft)");
  }
  if (config.refine_rounds < 0) throw UsageError("refine rounds must be >= 0");
  if (config.refine_rounds > 0 && config.refine_size < 1) throw UsageError("refine size must be >= 1");

  const EmbeddingLoadOptions load_opts{config.limit, config.normalize};
  const auto src = load_embeddings(config.src_path, load_opts);
  const auto tgt = load_embeddings(config.tgt_path, load_opts);
  auto lex = load_lexicon(config.lexicon_path, src.embeddings, tgt.embeddings);

  AlignOutcome outcome;
  outcome.lexicon = std::move(lex.lexicon);
  auto pairs = gather_pairs(outcome.lexicon, src.embeddings, tgt.embeddings);
  outcome.fit = fit_method(config.method, pairs.X, pairs.Y, config.sgd, config.em);

  for (int round = 0; round < config.refine_rounds; ++round) {
    outcome.lexicon = refine_lexicon(outcome.fit.Q.Q, src.embeddings, tgt.embeddings,
                                     config.refine_size, config.metric);
    pairs = gather_pairs(outcome.lexicon, src.embeddings, tgt.embeddings);
    outcome.fit = fit_method(config.method, pairs.X, pairs.Y, config.sgd, config.em);
  }

  EvalReport& report = outcome.report;
  std::size_t noise_pairs = 0;
  if (outcome.fit.em) {
    const auto& em = *outcome.fit.em;
    report.iterations = em.trace.iterations();
    report.noise_rate = 1.0 - em.model.alpha;
    noise_pairs = static_cast<std::size_t>(em.responsibilities.size() - em.responsibilities.n1);
  }

  if (config.test_lexicon_path) {
    const auto test = load_lexicon(*config.test_lexicon_path, src.embeddings, tgt.embeddings);
    const auto p1 = precision_at_1(outcome.fit.Q.Q, test.lexicon, src.embeddings, tgt.embeddings,
                                   config.metric);
    report.p_at_1 = p1.p_at_1;
    report.n_queries = p1.n_queries;
    const auto test_pairs = gather_pairs(test.lexicon, src.embeddings, tgt.embeddings);
    report.test_error = alignment_error(outcome.fit.Q.Q, test_pairs.X, test_pairs.Y);
  }

  outcome.details = {{"method", method_name(config.method)},
                     {"seed", config.seed},
                     {"pairs", outcome.lexicon.size()},
                     {"noise_pairs", noise_pairs},
                     {"lexicon_skipped", lex.skipped},
                     {"lexicon_duplicates", lex.duplicates},
                     {"src_vocab", src.embeddings.size()},
                     {"tgt_vocab", tgt.embeddings.size()},
                     {"dim", src.embeddings.dim()},
                     {"refine_rounds", config.refine_rounds}};
  if (outcome.fit.em) {
    outcome.details["converged"] = outcome.fit.em->trace.converged;
    outcome.details["alpha"] = outcome.fit.em->model.alpha;
  }
  if (outcome.fit.Q.warning) outcome.details["warning"] = *outcome.fit.Q.warning;

  std::filesystem::create_directories(config.output_dir);
  auto write_resp = [&] {
    const auto path = config.output_dir / "responsibilities.tsv";
    auto out = open_output(path);
    write_responsibilities_tsv(out, outcome.fit.em->responsibilities, outcome.lexicon);
    outcome.written.push_back(path);
  };

  if (config.responsibilities_only) {
    write_resp();
    return outcome;
  }

  save_translation_matrix(config.output_dir / "translation.txt", outcome.fit.Q);
  outcome.written.push_back(config.output_dir / "translation.txt");
  if (outcome.fit.em) {
    save_model(config.output_dir / "model.txt", outcome.fit.em->model);
    outcome.written.push_back(config.output_dir / "model.txt");
    write_resp();
  }

  nlohmann::json report_json = to_json(report);
  report_json["details"] = outcome.details;
  {
    auto out = open_output(config.output_dir / "report.json");
    out << report_json.dump(2) << '\n';
  }
  {
    auto out = open_output(config.output_dir / "report.tsv");
    out << to_tsv(report);
  }
  outcome.written.push_back(config.output_dir / "report.json");
  outcome.written.push_back(config.output_dir / "report.tsv");
  return outcome;
}

EvalReport run_evaluate(const std::filesystem::path& src_path, const std::filesystem::path& tgt_path,
                        const std::filesystem::path& matrix_path,
                        const std::filesystem::path& test_lexicon_path, bool normalize,
                        std::optional<std::size_t> limit, Metric metric) {
  const EmbeddingLoadOptions load_opts{limit, normalize};
  const auto src = load_embeddings(src_path, load_opts);
  const auto tgt = load_embeddings(tgt_path, load_opts);
  const auto tm = load_translation_matrix(matrix_path);
  const auto test = load_lexicon(test_lexicon_path, src.embeddings, tgt.embeddings);

  EvalReport report;
  const auto p1 = precision_at_1(tm.Q, test.lexicon, src.embeddings, tgt.embeddings, metric);
  report.p_at_1 = p1.p_at_1;
  report.n_queries = p1.n_queries;
  const auto pairs = gather_pairs(test.lexicon, src.embeddings, tgt.embeddings);
  report.test_error = alignment_error(tm.Q, pairs.X, pairs.Y);
  return report;
}

DiachronicOutcome run_diachronic(const DiachronicConfig& config) {
  const bool have_tables = config.src_freq_path && config.tgt_freq_path;
  if (config.src_freq_path.has_value() != config.tgt_freq_path.has_value()) {
    throw UsageError("diachronic: frequency tables must be given for both periods");
  }
  if (config.threshold && !have_tables) {
    throw UsageError("diachronic: --threshold requires --src-freq and --tgt-freq");
  }

  const EmbeddingLoadOptions load_opts{config.limit, config.normalize};
  const auto src = load_embeddings(config.src_path, load_opts);
  const auto tgt = load_embeddings(config.tgt_path, load_opts);
  std::optional<StopList> stop;
  if (config.stoplist_path) stop = load_stoplist(*config.stoplist_path);

  const Lexicon identity = build_identity_lexicon(src.embeddings, tgt.embeddings, stop ? &*stop : nullptr);
  const auto pairs = gather_pairs(identity, src.embeddings, tgt.embeddings);
  EmConfig em = config.em;
  em.mode = EmMode::hard;
  const auto fit = em_fit(pairs.X, pairs.Y, em);

  std::optional<FrequencyTable> src_freq;
  std::optional<FrequencyTable> tgt_freq;
  std::optional<FrequencyFilter> filter;
  if (have_tables) {
    src_freq = load_frequency_table(*config.src_freq_path);
    tgt_freq = load_frequency_table(*config.tgt_freq_path);
    filter = FrequencyFilter{&*src_freq, &*tgt_freq, config.threshold.value_or(kDefaultFrequencyThreshold)};
  }

  DiachronicOutcome out;
  out.ranking = rank_semantic_shift(fit.model.Q.Q, identity, src.embeddings, tgt.embeddings, filter,
                                    &fit.responsibilities);
  out.pairs = identity.size();
  out.noise_fraction = 1.0 - fit.model.alpha;
  out.iterations = fit.trace.iterations();
  for (const auto& e : out.ranking.entries)
    if (e.aligned && !*e.aligned) ++out.noisy_after_filter;
  if (config.top && out.ranking.entries.size() > *config.top) out.ranking.entries.resize(*config.top);

  out.summary = {{"pairs", out.pairs},
                 {"noise_fraction", out.noise_fraction},
                 {"noisy_after_filter", out.noisy_after_filter},
                 {"iterations", out.iterations},
                 {"converged", fit.trace.converged},
                 {"threshold", filter ? nlohmann::json(filter->threshold) : nlohmann::json(nullptr)}};

  std::filesystem::create_directories(config.output_dir);
  nlohmann::json doc = to_json(out.ranking);
  doc["summary"] = out.summary;
  {
    auto f = open_output(config.output_dir / "ranking.json");
    f << doc.dump(2) << '\n';
  }
  {
    auto f = open_output(config.output_dir / "ranking.tsv");
    f << to_tsv(out.ranking);
  }
  return out;
}

}  // namespace naa
