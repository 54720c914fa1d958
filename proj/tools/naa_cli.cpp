// naa: command-line front end.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include "naa/experiments.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>

namespace {

struct CommonOptions {
  std::string method = "em-hard";
  std::uint64_t seed = 0;
  double epsilon = 0.0;
  int max_iters = 100;
  bool normalize = false;
  std::string output_dir = ".";
  double lr = 1e-3;
  int epochs = 50;
  int batch_size = 32;
  std::string metric = "cosine";
  std::size_t limit = 0;

  CLI::Option* epsilon_opt = nullptr;
  CLI::Option* max_iters_opt = nullptr;
  CLI::Option* lr_opt = nullptr;
  CLI::Option* epochs_opt = nullptr;
  CLI::Option* batch_opt = nullptr;
  CLI::Option* limit_opt = nullptr;
};

void add_em_flags(CLI::App* cmd, CommonOptions& o) {
  o.epsilon_opt = cmd->add_option("--epsilon", o.epsilon, "EM convergence threshold on |alpha change| (default max(1/(2n),1e-4))");
  o.max_iters_opt = cmd->add_option("--max-iters", o.max_iters, "EM iteration cap")->capture_default_str();
}

void add_sgd_flags(CLI::App* cmd, CommonOptions& o) {
  o.lr_opt = cmd->add_option("--lr", o.lr, "SGD learning rate")->capture_default_str();
  o.epochs_opt = cmd->add_option("--epochs", o.epochs, "SGD epochs")->capture_default_str();
  o.batch_opt = cmd->add_option("--batch-size", o.batch_size, "SGD mini-batch size")->capture_default_str();
}

void add_common_flags(CLI::App* cmd, CommonOptions& o, bool with_method) {
  if (with_method) {
    cmd->add_option("--method", o.method, "op | sgd | em-hard | em-soft")->capture_default_str();
  }
  cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  cmd->add_flag("--normalize", o.normalize, "Unit-normalize embeddings at load");
  cmd->add_option("--output-dir", o.output_dir, "Directory for output files")->capture_default_str();
}

void add_embedding_flags(CLI::App* cmd, CommonOptions& o) {
  o.limit_opt = cmd->add_option("--limit", o.limit, "Keep only the first N embedding rows");
  cmd->add_option("--metric", o.metric, "Retrieval metric: cosine | euclidean")->capture_default_str();
}

naa::EmConfig em_config(const CommonOptions& o) {
  naa::EmConfig cfg;
  if (o.epsilon_opt && o.epsilon_opt->count()) cfg.epsilon = o.epsilon;
  cfg.max_iters = o.max_iters;
  cfg.seed = o.seed;
  return cfg;
}

naa::SgdConfig sgd_config(const CommonOptions& o, naa::SgdConfig base = {}) {
  if (o.lr_opt && o.lr_opt->count()) base.learning_rate = o.lr;
  if (o.epochs_opt && o.epochs_opt->count()) base.epochs = o.epochs;
  if (o.batch_opt && o.batch_opt->count()) base.batch_size = o.batch_size;
  base.seed = o.seed;
  return base;
}

std::optional<std::size_t> limit_of(const CommonOptions& o) {
  if (o.limit_opt && o.limit_opt->count()) return o.limit;
  return std::nullopt;
}

naa::Metric parse_metric(const std::string& name) {
  if (name == "cosine") return naa::Metric::cosine;
  if (name == "euclidean") return naa::Metric::euclidean;
  throw naa::UsageError("unknown metric '" + name + "' (expected cosine or euclidean)");
}

// Hyperparameters for a solver that the chosen method never runs are a
// configuration mistake, not something to ignore silently.
void check_method_flags(naa::Method method, const CommonOptions& o) {
  const bool sgd_flags = (o.lr_opt && o.lr_opt->count()) || (o.epochs_opt && o.epochs_opt->count()) ||
                         (o.batch_opt && o.batch_opt->count());
  const bool em_flags = (o.epsilon_opt && o.epsilon_opt->count()) ||
                        (o.max_iters_opt && o.max_iters_opt->count());
  if (sgd_flags && method != naa::Method::sgd) {
    throw naa::UsageError("SGD options given but --method is " + std::string(naa::method_name(method)));
  }
  if (em_flags && !naa::is_em(method)) {
    throw naa::UsageError("EM options given but --method is " + std::string(naa::method_name(method)));
  }
}

std::vector<naa::Method> parse_methods(const std::vector<std::string>& names) {
  std::vector<naa::Method> out;
  for (const auto& n : names) out.push_back(naa::parse_method(n));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noise-aware embedding-space alignment toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI config file; command-line flags take precedence");

  // align / clean-lexicon
  CommonOptions align_opts;
  CommonOptions clean_opts;
  std::string src, tgt, lexicon, test_lexicon;
  int refine_rounds = 0;
  int refine_size = 5000;
  auto* align = app.add_subcommand("align", "Fit a translation matrix on a lexicon and evaluate it");
  auto* clean = app.add_subcommand("clean-lexicon", "Fit EM and write only the labeled lexicon (responsibilities.tsv)");
  for (auto [cmd, opts] : {std::pair{align, &align_opts}, std::pair{clean, &clean_opts}}) {
    cmd->add_option("--src", src, "Source embeddings")->required()->check(CLI::ExistingFile);
    cmd->add_option("--tgt", tgt, "Target embeddings")->required()->check(CLI::ExistingFile);
    cmd->add_option("--lexicon", lexicon, "Training lexicon (TSV)")->required()->check(CLI::ExistingFile);
    add_common_flags(cmd, *opts, true);
    add_embedding_flags(cmd, *opts);
    add_em_flags(cmd, *opts);
  }
  align->add_option("--test", test_lexicon, "Test lexicon for P@1 (TSV)")->check(CLI::ExistingFile);
  align->add_option("--refine-rounds", refine_rounds, "Nearest-neighbor lexicon re-induction rounds")->capture_default_str();
  align->add_option("--refine-size", refine_size, "Source words per re-induced lexicon")->capture_default_str();
  add_sgd_flags(align, align_opts);

  // evaluate
  CommonOptions eval_opts;
  std::string eval_src, eval_tgt, eval_matrix, eval_test;
  auto* evaluate = app.add_subcommand("evaluate", "Score a saved translation matrix on a test lexicon");
  evaluate->add_option("--src", eval_src, "Source embeddings")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--tgt", eval_tgt, "Target embeddings")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--matrix", eval_matrix, "Translation matrix file")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--test", eval_test, "Test lexicon (TSV)")->required()->check(CLI::ExistingFile);
  add_common_flags(evaluate, eval_opts, false);
  add_embedding_flags(evaluate, eval_opts);

  // synthetic-2d
  CommonOptions syn_opts;
  auto* synthetic = app.add_subcommand("synthetic-2d", "Ten 2-D points, one noisy pair: op vs sgd vs em-hard");
  add_common_flags(synthetic, syn_opts, false);
  add_em_flags(synthetic, syn_opts);
  add_sgd_flags(synthetic, syn_opts);

  // noise-curve
  CommonOptions curve_opts;
  naa::NoiseCurveConfig curve;
  std::size_t curve_seeds = 10;
  std::vector<std::string> curve_methods{"op", "sgd", "em-hard"};
  auto* noise = app.add_subcommand("noise-curve", "Clean-pair and held-out error versus noise level");
  noise->add_option("--n", curve.n, "Lexicon size (large-scale runs: 5000)")->capture_default_str();
  noise->add_option("--d", curve.d, "Dimension (large-scale runs: 300)")->capture_default_str();
  noise->add_option("--test-n", curve.test_n, "Held-out test pairs (large-scale runs: 1500)")->capture_default_str();
  noise->add_option("--levels", curve.levels, "Noise fractions")->delimiter(',')->capture_default_str();
  noise->add_option("--seeds", curve_seeds, "Number of seeds, starting at --seed")->capture_default_str();
  noise->add_option("--methods", curve_methods, "Methods to compare")->delimiter(',')->capture_default_str();
  add_common_flags(noise, curve_opts, false);
  add_em_flags(noise, curve_opts);
  add_sgd_flags(noise, curve_opts);

  // diachronic
  CommonOptions dia_opts;
  naa::DiachronicConfig dia;
  std::string dia_src, dia_tgt, stoplist, src_freq, tgt_freq;
  double threshold = naa::kDefaultFrequencyThreshold;
  std::size_t top = 0;
  auto* diachronic = app.add_subcommand("diachronic", "Align two periods on an identity lexicon and rank shifted words");
  diachronic->add_option("--src", dia_src, "Earlier-period embeddings")->required()->check(CLI::ExistingFile);
  diachronic->add_option("--tgt", dia_tgt, "Later-period embeddings")->required()->check(CLI::ExistingFile);
  diachronic->add_option("--stoplist", stoplist, "Tokens to leave out of the identity lexicon")->check(CLI::ExistingFile);
  diachronic->add_option("--src-freq", src_freq, "Earlier-period frequency table (TSV)")->check(CLI::ExistingFile);
  diachronic->add_option("--tgt-freq", tgt_freq, "Later-period frequency table (TSV)")->check(CLI::ExistingFile);
  auto* threshold_opt = diachronic->add_option("--threshold", threshold, "Minimum frequency in both periods");
  auto* top_opt = diachronic->add_option("--top", top, "Keep only the top N ranked words");
  add_common_flags(diachronic, dia_opts, false);
  add_embedding_flags(diachronic, dia_opts);
  add_em_flags(diachronic, dia_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (align->parsed() || clean->parsed()) {
      const CommonOptions& o = align->parsed() ? align_opts : clean_opts;
      naa::AlignConfig cfg;
      cfg.src_path = src;
      cfg.tgt_path = tgt;
      cfg.lexicon_path = lexicon;
      if (!test_lexicon.empty()) cfg.test_lexicon_path = test_lexicon;
      cfg.method = naa::parse_method(o.method);
      check_method_flags(cfg.method, o);
      cfg.sgd = sgd_config(o);
      cfg.em = em_config(o);
      cfg.normalize = o.normalize;
      cfg.limit = limit_of(o);
      cfg.metric = parse_metric(o.metric);
      cfg.output_dir = o.output_dir;
      cfg.responsibilities_only = clean->parsed();
      cfg.refine_rounds = refine_rounds;
      cfg.refine_size = refine_size;
      cfg.seed = o.seed;
      const auto outcome = naa::run_align(cfg);
      if (clean->parsed()) {
        std::cout << "wrote " << outcome.written.front().string() << " (" << outcome.details["noise_pairs"]
                  << " of " << outcome.lexicon.size() << " pairs labeled Noise)\n";
      } else {
        auto j = naa::to_json(outcome.report);
        j["details"] = outcome.details;
        std::cout << j.dump(2) << '\n';
      }
    } else if (evaluate->parsed()) {
      const auto report = naa::run_evaluate(eval_src, eval_tgt, eval_matrix, eval_test, eval_opts.normalize,
                                            limit_of(eval_opts), parse_metric(eval_opts.metric));
      std::filesystem::create_directories(eval_opts.output_dir);
      const auto j = naa::to_json(report);
      std::ofstream(std::filesystem::path(eval_opts.output_dir) / "report.json") << j.dump(2) << '\n';
      std::ofstream(std::filesystem::path(eval_opts.output_dir) / "report.tsv") << naa::to_tsv(report);
      std::cout << j.dump(2) << '\n';
    } else if (synthetic->parsed()) {
      const auto report = naa::synthetic_2d(syn_opts.seed, sgd_config(syn_opts, naa::synthetic_2d_sgd_defaults()),
                                            em_config(syn_opts));
      std::filesystem::create_directories(syn_opts.output_dir);
      const auto path = std::filesystem::path(syn_opts.output_dir) / "synthetic_2d.json";
      std::ofstream(path) << naa::to_json(report).dump(2) << '\n';
      for (const auto* v : {&report.noise_free, &report.noisy}) {
        std::cout << (v == &report.noisy ? "noisy" : "noise-free") << ":";
        for (const auto& o : v->outcomes) {
          std::cout << "  " << naa::method_name(o.method) << " clean_error=" << o.clean_error;
        }
        std::cout << '\n';
      }
      std::cout << "wrote " << path.string() << '\n';
    } else if (noise->parsed()) {
      curve.seeds.clear();
      for (std::size_t k = 0; k < curve_seeds; ++k) curve.seeds.push_back(curve_opts.seed + k);
      curve.methods = parse_methods(curve_methods);
      curve.sgd = sgd_config(curve_opts);
      curve.em = em_config(curve_opts);
      const auto rows = naa::noise_curve(curve);
      std::filesystem::create_directories(curve_opts.output_dir);
      const auto path = std::filesystem::path(curve_opts.output_dir) / "noise_curve.csv";
      std::ofstream out(path);
      naa::write_noise_curve_csv(out, rows);

      std::map<std::pair<std::string, double>, std::pair<double, int>> means;
      for (const auto& r : rows) {
        auto& [sum, count] = means[{std::string(naa::method_name(r.method)), r.p}];
        sum += r.test_error;
        ++count;
      }
      std::cout << "method\tp\tmean_test_error\n";
      for (const auto& [key, acc] : means) {
        std::cout << key.first << '\t' << key.second << '\t' << acc.first / acc.second << '\n';
      }
      std::cout << "wrote " << path.string() << '\n';
    } else if (diachronic->parsed()) {
      dia.src_path = dia_src;
      dia.tgt_path = dia_tgt;
      if (!stoplist.empty()) dia.stoplist_path = stoplist;
      if (!src_freq.empty()) dia.src_freq_path = src_freq;
      if (!tgt_freq.empty()) dia.tgt_freq_path = tgt_freq;
      if (threshold_opt->count()) dia.threshold = threshold;
      if (top_opt->count()) dia.top = top;
      dia.em = em_config(dia_opts);
      dia.normalize = dia_opts.normalize;
      dia.limit = limit_of(dia_opts);
      dia.output_dir = dia_opts.output_dir;
      const auto outcome = naa::run_diachronic(dia);
      std::cout << outcome.summary.dump(2) << '\n';
    }
  } catch (const naa::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
