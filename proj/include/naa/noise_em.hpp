#pragma once

// Two-component mixture model for noisy lexicons and its EM fit.
//
// Each pair (x, y) is aligned with prior alpha, y ~ N(Qx, sigma2 I), or noise,
// y ~ N(mu_y, sigma_y2 I). All densities are handled in log space: at d = 300
// the linear-space Gaussians underflow long before the posteriors do.

#include "naa/alignment.hpp"
#include "naa/common.hpp"
#include "naa/embedding_io.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

namespace naa {

inline constexpr double kVarianceFloor = 1e-12;

struct AlignmentModel {
  TranslationMatrix Q;
  double sigma2 = 1.0;
  Vector mu_y;
  double sigma_y2 = 1.0;
  double alpha = 0.5;

  Index dim() const { return Q.dim(); }
  void validate() const;
};

struct Responsibilities {
  Vector w;            // posterior probability that pair t is aligned
  std::vector<bool> h; // w_t > 0.5
  Index n1 = 0;        // number of pairs with h_t set

  Index size() const { return w.size(); }
};

enum class EmMode { hard, soft };

struct EmConfig {
  /// Unset -> max(1/(2n), 1e-4).
  std::optional<double> epsilon;
  int max_iters = 100;
  EmMode mode = EmMode::hard;
  /// The fit itself is deterministic; the seed is carried into run reports.
  std::uint64_t seed = 0;

  void validate() const;
  double epsilon_for(Index n) const;
};

struct EmIteration {
  double alpha = 0.0;
  /// hard: complete-data log-likelihood under the E-step assignments;
  /// soft: marginal log-likelihood.
  double objective = 0.0;
  Index n1 = 0;
  /// The aligned or the noise component was empty and kept its previous
  /// parameters.
  bool degenerate = false;
};

struct EmTrace {
  std::vector<EmIteration> steps;
  bool converged = false;
  int iterations() const { return static_cast<int>(steps.size()); }
};

struct EmResult {
  AlignmentModel model;
  Responsibilities responsibilities;
  EmTrace trace;
};

/// -(d/2) ln(2 pi var) - sq_dist / (2 var).
double log_gaussian_iso(double sq_dist, Index dim, double var);
double log_gaussian_iso(const Vector& y, const Vector& mean, double var);

/// alpha e^a / (alpha e^a + (1 - alpha) e^b) for log densities a (aligned)
/// and b (noise), evaluated without leaving log space.
double posterior_from_logs(double alpha, double log_aligned, double log_noise);

double posterior(const AlignmentModel& model, const Vector& x, const Vector& y);

/// sum_t log f(y_t | x_t).
double log_likelihood(const AlignmentModel& model, const Matrix& X, const Matrix& Y);

/// sum over aligned t of [ln alpha + ln N(y_t; Q x_t, sigma2)] plus sum over
/// noise t of [ln(1-alpha) + ln N(y_t; mu_y, sigma_y2)], with 0 ln 0 = 0.
double complete_log_likelihood(const AlignmentModel& model, const Matrix& X, const Matrix& Y,
                               const std::vector<bool>& aligned);

/// Q from Procrustes on every pair, sigma2 from its residual, (mu_y, sigma_y2)
/// from the spread of Y, alpha = 1/2.
AlignmentModel initialize(const Matrix& X, const Matrix& Y);

Responsibilities e_step(const AlignmentModel& model, const Matrix& X, const Matrix& Y);

EmResult em_fit(const Matrix& X, const Matrix& Y, const EmConfig& config = {});

struct GenerativeSample {
  Matrix Y;
  std::vector<bool> z;  // true = drawn from the aligned component
};

GenerativeSample sample_generative(const AlignmentModel& model, const Matrix& X,
                                   std::uint64_t seed);

/// Q block, then one line each: sigma2, mu_y (d reals), sigma_y2, alpha.
void save_model(const std::filesystem::path& path, const AlignmentModel& model);
AlignmentModel load_model(const std::filesystem::path& path);

/// pair_index, src_token, tgt_token, w, Aligned|Noise; header row first.
void write_responsibilities_tsv(std::ostream& out, const Responsibilities& resp,
                                const Lexicon& lexicon);

const char* label_name(bool aligned);

}  // namespace naa
