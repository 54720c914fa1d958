#include "naa/noise_em.hpp"

#include "naa/kernels.hpp"
#include "naa/text_format.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <random>

namespace naa {

namespace {

double floored(double var) { return std::max(var, kVarianceFloor); }

// log(alpha e^a + (1 - alpha) e^b) with the alpha in {0, 1} cases exact.
double log_mixture(double alpha, double log_aligned, double log_noise) {
  if (alpha >= 1.0) return log_aligned;
  if (alpha <= 0.0) return log_noise;
  const double a = std::log(alpha) + log_aligned;
  const double b = std::log1p(-alpha) + log_noise;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

struct ComponentLogs {
  Vector aligned;
  Vector noise;
};

ComponentLogs component_logs(const AlignmentModel& m, const Vector& r_aligned, const Vector& r_noise) {
  const Index n = r_aligned.size();
  const Index d = m.dim();
  if (!(m.sigma2 > 0.0) || !(m.sigma_y2 > 0.0)) throw DataError("model: variances must be positive");
  ComponentLogs out{Vector(n), Vector(n)};
#pragma omp parallel for schedule(static)
  for (Index t = 0; t < n; ++t) {
    out.aligned(t) = log_gaussian_iso(r_aligned(t), d, m.sigma2);
    out.noise(t) = log_gaussian_iso(r_noise(t), d, m.sigma_y2);
  }
  return out;
}

double sum_log_likelihood(const AlignmentModel& m, const Vector& r_aligned, const Vector& r_noise) {
  const auto logs = component_logs(m, r_aligned, r_noise);
  long double total = 0.0L;
  for (Index t = 0; t < r_aligned.size(); ++t) {
    total += log_mixture(m.alpha, logs.aligned(t), logs.noise(t));
  }
  return static_cast<double>(total);
}

double sum_complete_log_likelihood(const AlignmentModel& m, const Vector& r_aligned,
                                   const Vector& r_noise, const std::vector<bool>& aligned) {
  const auto logs = component_logs(m, r_aligned, r_noise);
  const double log_alpha = std::log(m.alpha);
  const double log_beta = std::log1p(-m.alpha);
  long double total = 0.0L;
  for (Index t = 0; t < r_aligned.size(); ++t) {
    if (aligned[static_cast<std::size_t>(t)]) {
      total += log_alpha + logs.aligned(t);
    } else {
      total += log_beta + logs.noise(t);
    }
  }
  return static_cast<double>(total);
}

Responsibilities responsibilities_from(const AlignmentModel& m, const Vector& r_aligned,
                                       const Vector& r_noise) {
  const auto logs = component_logs(m, r_aligned, r_noise);
  const Index n = r_aligned.size();
  Responsibilities resp;
  resp.w.resize(n);
  resp.h.assign(static_cast<std::size_t>(n), false);
  for (Index t = 0; t < n; ++t) {
    resp.w(t) = posterior_from_logs(m.alpha, logs.aligned(t), logs.noise(t));
    const bool aligned = resp.w(t) > 0.5;
    resp.h[static_cast<std::size_t>(t)] = aligned;
    resp.n1 += aligned ? 1 : 0;
  }
  return resp;
}

void check_pairs(const Matrix& X, const Matrix& Y, const char* who) {
  detail::check_same_shape(X, Y, who);
  if (X.cols() < 2) throw DataError(std::string(who) + ": need at least 2 pairs");
}

}  // namespace

void AlignmentModel::validate() const {
  if (!(sigma2 > 0.0) || !(sigma_y2 > 0.0)) throw DataError("model: variances must be positive");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DataError("model: alpha outside [0,1]");
  if (Q.Q.rows() != Q.Q.cols() || mu_y.size() != Q.Q.rows()) {
    throw DataError("model: Q / mu_y dimension mismatch");
  }
}

void EmConfig::validate() const {
  if (epsilon && !(*epsilon > 0.0)) throw UsageError("EM config: epsilon must be positive");
  if (max_iters < 1) throw UsageError("EM config: max_iters must be >= 1");
}

double EmConfig::epsilon_for(Index n) const {
  if (epsilon) return *epsilon;
  return std::max(1.0 / (2.0 * static_cast<double>(n)), 1e-4);
}

double log_gaussian_iso(double sq_dist, Index dim, double var) {
  if (!(var > 0.0)) throw DataError("log_gaussian_iso: variance must be positive");
  return -0.5 * static_cast<double>(dim) * std::log(2.0 * std::numbers::pi * var) -
         sq_dist / (2.0 * var);
}

double log_gaussian_iso(const Vector& y, const Vector& mean, double var) {
  if (y.size() != mean.size()) throw DataError("log_gaussian_iso: dimension mismatch");
  return log_gaussian_iso((y - mean).squaredNorm(), y.size(), var);
}

double posterior_from_logs(double alpha, double log_aligned, double log_noise) {
  if (alpha >= 1.0) return 1.0;
  if (alpha <= 0.0) return 0.0;
  // logit = ln(alpha N_a) - ln((1-alpha) N_n)
  const double logit = (std::log(alpha) + log_aligned) - (std::log1p(-alpha) + log_noise);
  if (logit >= 0.0) return 1.0 / (1.0 + std::exp(-logit));
  const double e = std::exp(logit);
  return e / (1.0 + e);
}

double posterior(const AlignmentModel& model, const Vector& x, const Vector& y) {
  const double la = log_gaussian_iso(y, model.Q.Q * x, model.sigma2);
  const double ln = log_gaussian_iso(y, model.mu_y, model.sigma_y2);
  return posterior_from_logs(model.alpha, la, ln);
}

double log_likelihood(const AlignmentModel& model, const Matrix& X, const Matrix& Y) {
  detail::check_same_shape(X, Y, "log_likelihood");
  return sum_log_likelihood(model, kernels::column_sq_residuals(model.Q.Q, X, Y),
                            kernels::column_sq_distances(Y, model.mu_y));
}

double complete_log_likelihood(const AlignmentModel& model, const Matrix& X, const Matrix& Y,
                               const std::vector<bool>& aligned) {
  detail::check_same_shape(X, Y, "complete_log_likelihood");
  if (static_cast<Index>(aligned.size()) != X.cols()) {
    throw DataError("complete_log_likelihood: assignment length mismatch");
  }
  return sum_complete_log_likelihood(model, kernels::column_sq_residuals(model.Q.Q, X, Y),
                                     kernels::column_sq_distances(Y, model.mu_y), aligned);
}

AlignmentModel initialize(const Matrix& X, const Matrix& Y) {
  check_pairs(X, Y, "initialize");
  const auto n = static_cast<double>(X.cols());
  const auto d = static_cast<double>(X.rows());

  AlignmentModel m;
  m.Q = procrustes(X, Y);
  m.sigma2 = floored(alignment_error(m.Q.Q, X, Y) / (n * d));
  m.mu_y = Y.rowwise().mean();
  m.sigma_y2 = floored(kernels::column_sq_distances(Y, m.mu_y).sum() / (n * d));
  m.alpha = 0.5;
  return m;
}

Responsibilities e_step(const AlignmentModel& model, const Matrix& X, const Matrix& Y) {
  detail::check_same_shape(X, Y, "e_step");
  return responsibilities_from(model, kernels::column_sq_residuals(model.Q.Q, X, Y),
                               kernels::column_sq_distances(Y, model.mu_y));
}

EmResult em_fit(const Matrix& X, const Matrix& Y, const EmConfig& config) {
  check_pairs(X, Y, "em_fit");
  config.validate();

  const Index n = X.cols();
  const auto d = static_cast<double>(X.rows());
  const double eps = config.epsilon_for(n);
  const bool hard = config.mode == EmMode::hard;

  EmResult result;
  AlignmentModel& m = result.model;
  m = initialize(X, Y);

  Vector r_aligned = kernels::column_sq_residuals(m.Q.Q, X, Y);
  Vector r_noise = kernels::column_sq_distances(Y, m.mu_y);

  for (int iter = 0; iter < config.max_iters; ++iter) {
    // E step
    Responsibilities resp = responsibilities_from(m, r_aligned, r_noise);

    // M step
    Vector w_aligned(n);
    for (Index t = 0; t < n; ++t) {
      w_aligned(t) = hard ? (resp.h[static_cast<std::size_t>(t)] ? 1.0 : 0.0) : resp.w(t);
    }
    const Vector w_noise = (1.0 - w_aligned.array()).matrix();
    const double mass_aligned = w_aligned.sum();
    const double mass_noise = hard ? static_cast<double>(n - resp.n1) : w_noise.sum();
    bool degenerate = false;

    if (mass_aligned > 0.0) {
      m.Q = weighted_procrustes(X, Y, w_aligned);
      r_aligned = kernels::column_sq_residuals(m.Q.Q, X, Y);
      m.sigma2 = floored(w_aligned.dot(r_aligned) / (d * mass_aligned));
    } else {
      degenerate = true;
    }

    if (mass_noise > 0.0) {
      m.mu_y = (Y * w_noise) / mass_noise;
      r_noise = kernels::column_sq_distances(Y, m.mu_y);
      m.sigma_y2 = floored(w_noise.dot(r_noise) / (d * mass_noise));
    } else {
      degenerate = true;
    }

    const double alpha_prev = m.alpha;
    m.alpha = hard ? static_cast<double>(resp.n1) / static_cast<double>(n)
                   : mass_aligned / static_cast<double>(n);

    const double objective = hard ? sum_complete_log_likelihood(m, r_aligned, r_noise, resp.h)
                                  : sum_log_likelihood(m, r_aligned, r_noise);
    result.trace.steps.push_back({m.alpha, objective, resp.n1, degenerate});
    result.responsibilities = std::move(resp);

    if (std::abs(m.alpha - alpha_prev) <= eps) {
      result.trace.converged = true;
      break;
    }
  }
  return result;
}

GenerativeSample sample_generative(const AlignmentModel& model, const Matrix& X, std::uint64_t seed) {
  model.validate();
  if (X.rows() != model.dim()) throw DataError("sample_generative: dimension mismatch");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(model.alpha);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sd_aligned = std::sqrt(model.sigma2);
  const double sd_noise = std::sqrt(model.sigma_y2);

  GenerativeSample out{Matrix(X.rows(), X.cols()), std::vector<bool>(static_cast<std::size_t>(X.cols()))};
  for (Index t = 0; t < X.cols(); ++t) {
    const bool aligned = coin(rng);
    out.z[static_cast<std::size_t>(t)] = aligned;
    Vector center = aligned ? Vector(model.Q.Q * X.col(t)) : model.mu_y;
    const double sd = aligned ? sd_aligned : sd_noise;
    for (Index i = 0; i < X.rows(); ++i) out.Y(i, t) = center(i) + sd * normal(rng);
  }
  return out;
}

void save_model(const std::filesystem::path& path, const AlignmentModel& model) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path.string());
  detail::write_square_block(out, model.Q.Q);
  out << text::format_real(model.sigma2) << '\n';
  for (Index i = 0; i < model.mu_y.size(); ++i) {
    if (i) out << ' ';
    out << text::format_real(model.mu_y(i));
  }
  out << '\n' << text::format_real(model.sigma_y2) << '\n' << text::format_real(model.alpha) << '\n';
  if (!out) throw DataError("write failed: " + path.string());
}

AlignmentModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read file: " + path.string());
  const std::string origin = path.string();
  AlignmentModel m;
  m.Q.Q = detail::read_square_block(in, origin);
  m.Q.orthogonal = m.Q.orthogonality_residual() <= 1e-8;

  std::string line;
  auto next_scalar = [&](const char* name) {
    if (!std::getline(in, line)) throw FormatError(origin + ": missing " + name);
    const auto v = text::parse_real(text::trim(line));
    if (!v) throw FormatError(origin + ": bad " + name);
    return *v;
  };
  m.sigma2 = next_scalar("sigma2");
  if (!std::getline(in, line)) throw FormatError(origin + ": missing mu_y");
  const auto fields = text::split_whitespace(line);
  if (static_cast<Index>(fields.size()) != m.Q.dim()) throw FormatError(origin + ": mu_y has wrong width");
  m.mu_y.resize(m.Q.dim());
  for (Index i = 0; i < m.Q.dim(); ++i) {
    const auto v = text::parse_real(fields[static_cast<std::size_t>(i)]);
    if (!v) throw FormatError(origin + ": bad mu_y entry");
    m.mu_y(i) = *v;
  }
  m.sigma_y2 = next_scalar("sigma_y2");
  m.alpha = next_scalar("alpha");
  m.validate();
  return m;
}

const char* label_name(bool aligned) { return aligned ? "Aligned" : "Noise"; }

void write_responsibilities_tsv(std::ostream& out, const Responsibilities& resp, const Lexicon& lexicon) {
  if (static_cast<Index>(lexicon.size()) != resp.size()) {
    throw DataError("responsibilities / lexicon length mismatch");
  }
  out << "pair_index\tsrc_token\ttgt_token\tw\tlabel\n";
  for (Index t = 0; t < resp.size(); ++t) {
    const auto k = static_cast<std::size_t>(t);
    out << t << '\t' << lexicon.src_tokens[k] << '\t' << lexicon.tgt_tokens[k] << '\t'
        << text::format_real(resp.w(t)) << '\t' << label_name(resp.h[k]) << '\n';
  }
}

}  // namespace naa
