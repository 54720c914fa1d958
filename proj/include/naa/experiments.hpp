#pragma once

// End-to-end runs behind the CLI subcommands: synthetic noise experiments,
// lexicon alignment with evaluation, and diachronic shift ranking.

#include "naa/alignment.hpp"
#include "naa/embedding_io.hpp"
#include "naa/evaluation.hpp"
#include "naa/noise_em.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace naa {

enum class Method { op, sgd, em_hard, em_soft };

std::string_view method_name(Method method);
/// Accepts op, sgd, em-hard, em-soft. Throws UsageError otherwise.
Method parse_method(std::string_view name);
bool is_em(Method method);

struct FitResult {
  TranslationMatrix Q;
  std::optional<EmResult> em;
};

/// Runs one estimator; for the EM methods the mode in `em` is overridden.
FitResult fit_method(Method method, const Matrix& X, const Matrix& Y, const SgdConfig& sgd,
                     const EmConfig& em);

/// Columns of X are standard normal, Q_gold is Haar-random, clean columns
/// satisfy y = Q_gold x exactly. round(p n) randomly placed columns are
/// noisy: both x and y are fresh independent standard normals.
struct SyntheticProblem {
  Matrix X;
  Matrix Y;
  TranslationMatrix Q_gold;
  std::vector<bool> clean_mask;
  double p = 0.0;
  std::uint64_t seed = 0;
};

SyntheticProblem make_noisy_problem(Index n, Index d, double p, std::uint64_t seed);

// ---- 2-D single-noisy-pair experiment -------------------------------------

struct MethodOutcome {
  Method method = Method::op;
  TranslationMatrix Q;
  double clean_error = 0.0;       // sum over clean pairs
  double clean_error_mean = 0.0;  // per clean pair
  std::optional<std::vector<bool>> labels;
};

struct Synthetic2dVariant {
  SyntheticProblem problem;
  std::vector<MethodOutcome> outcomes;
  const MethodOutcome& outcome(Method m) const;
};

struct Synthetic2dReport {
  std::uint64_t seed = 0;
  Synthetic2dVariant noise_free;
  Synthetic2dVariant noisy;
};

/// The 10-point 2-D problem is small enough that SGD is run full-batch to
/// convergence: learning rate 1e-2, 5000 epochs, batch 10.
SgdConfig synthetic_2d_sgd_defaults();

Synthetic2dReport synthetic_2d(std::uint64_t seed, const SgdConfig& sgd = synthetic_2d_sgd_defaults(),
                               const EmConfig& em = {});
nlohmann::json to_json(const Synthetic2dReport& report);

// ---- noise curve ---------------------------------------------------------

struct NoiseCurveConfig {
  Index n = 1000;
  Index d = 50;
  Index test_n = 300;
  std::vector<double> levels{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<Method> methods{Method::op, Method::sgd, Method::em_hard};
  SgdConfig sgd;
  EmConfig em;

  void validate() const;
};

struct NoiseCurveRow {
  Method method = Method::op;
  double p = 0.0;
  std::uint64_t seed = 0;
  double train_error = 0.0;  // sum over clean training pairs
  double test_error = 0.0;   // sum over the clean held-out set
  Index train_pairs = 0;
  Index test_pairs = 0;
};

/// One row per (method, level, seed), sorted by method order, level, seed.
std::vector<NoiseCurveRow> noise_curve(const NoiseCurveConfig& config);
void write_noise_curve_csv(std::ostream& out, const std::vector<NoiseCurveRow>& rows);

// ---- align / clean-lexicon -------------------------------------------------

struct AlignConfig {
  std::filesystem::path src_path;
  std::filesystem::path tgt_path;
  std::filesystem::path lexicon_path;
  std::optional<std::filesystem::path> test_lexicon_path;
  Method method = Method::em_hard;
  SgdConfig sgd;
  EmConfig em;
  bool normalize = false;
  std::optional<std::size_t> limit;
  Metric metric = Metric::cosine;
  std::filesystem::path output_dir = ".";
  bool responsibilities_only = false;
  /// Nearest-neighbor lexicon re-induction rounds after the first fit.
  int refine_rounds = 0;
  int refine_size = 5000;
  std::uint64_t seed = 0;
};

struct AlignOutcome {
  EvalReport report;
  FitResult fit;
  Lexicon lexicon;  // the lexicon of the final fit
  nlohmann::json details;
  std::vector<std::filesystem::path> written;
};

/// Writes translation.txt, model.txt and responsibilities.tsv (EM methods),
/// report.json and report.tsv into output_dir; only responsibilities.tsv when
/// responsibilities_only is set.
AlignOutcome run_align(const AlignConfig& config);

/// Q from a saved translation matrix, scored on a test lexicon.
EvalReport run_evaluate(const std::filesystem::path& src_path, const std::filesystem::path& tgt_path,
                        const std::filesystem::path& matrix_path,
                        const std::filesystem::path& test_lexicon_path, bool normalize,
                        std::optional<std::size_t> limit, Metric metric);

// ---- diachronic ------------------------------------------------------------

struct DiachronicConfig {
  std::filesystem::path src_path;  // earlier period
  std::filesystem::path tgt_path;  // later period
  std::optional<std::filesystem::path> stoplist_path;
  std::optional<std::filesystem::path> src_freq_path;
  std::optional<std::filesystem::path> tgt_freq_path;
  std::optional<double> threshold;
  EmConfig em;
  bool normalize = false;
  std::optional<std::size_t> limit;
  std::optional<std::size_t> top;
  std::filesystem::path output_dir = ".";
};

struct DiachronicOutcome {
  ShiftRanking ranking;
  std::size_t pairs = 0;
  double noise_fraction = 0.0;
  std::size_t noisy_after_filter = 0;
  int iterations = 0;
  nlohmann::json summary;
};

/// Default frequency threshold applied when both tables are supplied.
inline constexpr double kDefaultFrequencyThreshold = 1e-5;

/// Writes ranking.json and ranking.tsv into output_dir.
DiachronicOutcome run_diachronic(const DiachronicConfig& config);

}  // namespace naa
