#pragma once

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "seq2api/corpus.hpp"
#include "seq2api/decode.hpp"
#include "seq2api/errors.hpp"
#include "seq2api/eval.hpp"
#include "seq2api/synthetic.hpp"
#include "seq2api/training.hpp"
#include "seq2api/vocab.hpp"

// Command-line surface. Exit codes: 0 success, 1 usage error (bad flags,
// bad config keys/values), 2 data or model error (missing files, corrupt
// checkpoints, vocabulary mismatches).

namespace seq2api::cli {

namespace detail {

inline std::string fmt(double v, const char* spec = "%.4f") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

inline std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

inline std::size_t parse_size(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(value, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  if (pos != value.size() || value.empty() || value[0] == '-') {
    throw config_error("config: invalid value for key '" + key + "': '" + value + "'");
  }
  return static_cast<std::size_t>(v);
}

inline double parse_double(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  if (pos != value.size() || value.empty()) {
    throw config_error("config: invalid value for key '" + key + "': '" + value + "'");
  }
  return v;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true") return true;
  if (value == "0" || value == "false") return false;
  throw config_error("config: invalid value for key '" + key + "': '" + value + "'");
}

// key=value lines, '#' starts a comment, blank lines skipped
inline std::vector<std::pair<std::string, std::string>> load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot read config file: " + path);
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::string stripped = trim(line);
    if (stripped.empty()) continue;
    std::size_t eq = stripped.find('=');
    if (eq == std::string::npos || trim(stripped.substr(0, eq)).empty()) {
      throw config_error("config: malformed line " + std::to_string(line_no) +
                         ": expected key=value");
    }
    entries.emplace_back(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
  return entries;
}

// supported config-file key bound to its flag; file values apply only when
// the flag was not given on the command line
struct ConfigKey {
  std::string key;
  CLI::Option* opt;
  std::function<void(const std::string&)> set;
};

inline void apply_config(const std::string& path, const std::vector<ConfigKey>& keys) {
  for (const auto& [key, value] : load_config(path)) {
    auto it = std::find_if(keys.begin(), keys.end(),
                           [&](const ConfigKey& ck) { return ck.key == key; });
    if (it == keys.end()) throw config_error("config: unknown key '" + key + "'");
    if (it->opt->count() == 0) it->set(value);
  }
}

inline std::size_t resolve_threads(std::size_t requested, bool deterministic) {
  if (deterministic) return 1;
  std::size_t t = requested != 0
                      ? requested
                      : std::max<std::size_t>(1, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SEQ2API_THREADS")) {
    std::string value(env);
    std::size_t cap = parse_size("SEQ2API_THREADS", value);
    if (cap < 1) throw config_error("config: invalid value for key 'SEQ2API_THREADS': '" +
                                    value + "'");
    t = std::min(t, cap);
  }
  return t;
}

struct VocabBundle {
  vocab::Vocabulary source;
  vocab::Vocabulary target;
  vocab::IdfTable idf;
};

inline VocabBundle load_vocab_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  return {vocab::Vocabulary::load((fs::path(dir) / "source.vocab").string()),
          vocab::Vocabulary::load((fs::path(dir) / "target.vocab").string()),
          vocab::IdfTable::load((fs::path(dir) / "idf.tsv").string())};
}

inline std::vector<model::EncodedPair> encode_pairs(
    const std::vector<corpus::AnnotatedPair>& pairs, const vocab::Vocabulary& source,
    const vocab::Vocabulary& target) {
  std::vector<model::EncodedPair> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    model::EncodedPair e;
    e.source = source.encode(vocab::tokenize_annotation(p.annotation));
    e.target = target.encode(p.sequence.render_tokens());
    out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<std::size_t> parse_top_list(const std::string& spec) {
  std::vector<std::size_t> tops;
  std::string cell;
  auto flush = [&]() {
    tops.push_back(parse_size("top", cell));
    if (tops.back() < 1) throw config_error("config: invalid value for key 'top': '" + cell + "'");
    cell.clear();
  };
  for (char c : spec) {
    if (c == ',') {
      flush();
    } else {
      cell.push_back(c);
    }
  }
  flush();
  return tops;
}

// shared train/ablate knobs, also reachable through --config files
struct TrainSettings {
  double lambda = 0.035;
  std::size_t batch = 16;
  std::size_t iterations = 1000;
  double rho = 0.95;
  double eps = 1e-6;
  double clip = 5.0;
  std::uint64_t seed = 0;
  std::size_t hidden = 64;
  std::size_t embed = 32;
  bool no_attention = false;
  std::size_t threads = 0;  // 0: hardware concurrency
  bool deterministic = false;
  std::size_t checkpoint_every = 0;
  std::string config_path;

  model::ModelConfig model_config(std::size_t vs, std::size_t vt) const {
    model::ModelConfig mc;
    mc.source_vocab_size = vs;
    mc.target_vocab_size = vt;
    mc.embed_dim = embed;
    mc.hidden_dim = hidden;
    mc.attention_enabled = !no_attention;
    mc.seed = seed;
    return mc;
  }

  training::TrainingConfig training_config() const {
    training::TrainingConfig tc;
    tc.lambda = lambda;
    tc.batch_size = batch;
    tc.max_iterations = iterations;
    tc.adadelta_rho = rho;
    tc.adadelta_eps = eps;
    tc.clip_norm = clip;
    tc.seed = seed;
    tc.checkpoint_every = checkpoint_every;
    return tc;
  }
};

inline std::vector<ConfigKey> add_train_flags(CLI::App* sub, TrainSettings& s) {
  std::vector<ConfigKey> keys;
  auto bind_double = [&](const char* flag, const char* key, double& target, const char* desc) {
    CLI::Option* opt = sub->add_option(flag, target, desc);
    keys.push_back({key, opt, [&target, k = std::string(key)](const std::string& v) {
                      target = parse_double(k, v);
                    }});
  };
  auto bind_size = [&](const char* flag, const char* key, std::size_t& target,
                       const char* desc) {
    CLI::Option* opt = sub->add_option(flag, target, desc);
    keys.push_back({key, opt, [&target, k = std::string(key)](const std::string& v) {
                      target = parse_size(k, v);
                    }});
  };
  bind_double("--lambda", "lambda", s.lambda, "IDF penalty weight");
  bind_size("--batch", "batch", s.batch, "minibatch size");
  bind_size("--iterations", "iterations", s.iterations, "Adadelta iterations");
  bind_double("--rho", "rho", s.rho, "Adadelta decay rate");
  bind_double("--epsilon", "epsilon", s.eps, "Adadelta stabilizer");
  bind_double("--clip", "clip", s.clip, "global gradient norm cap");
  bind_size("--hidden", "hidden", s.hidden, "GRU hidden width");
  bind_size("--embed", "embed", s.embed, "embedding width");
  bind_size("--threads", "threads", s.threads, "worker threads (0: all cores)");
  bind_size("--checkpoint-every", "checkpoint-every", s.checkpoint_every,
            "periodic checkpoint interval (0: final only)");

  CLI::Option* seed_opt = sub->add_option("--seed", s.seed, "RNG seed");
  keys.push_back({"seed", seed_opt, [&s](const std::string& v) {
                    s.seed = parse_size("seed", v);
                  }});
  CLI::Option* attn_opt =
      sub->add_flag("--no-attention", s.no_attention, "use the fixed-summary decoder");
  keys.push_back({"attention", attn_opt, [&s](const std::string& v) {
                    s.no_attention = !parse_bool("attention", v);
                  }});
  sub->add_flag("--deterministic", s.deterministic, "force sequential execution");
  sub->add_option("--config", s.config_path, "key=value config file");
  return keys;
}

// -------------------------------------------------------------------------
// subcommand bodies

struct ExtractArgs {
  std::string src_dir;
  std::string output;
  bool dedup = false;
};

inline int run_extract(const ExtractArgs& a, std::ostream& out, std::ostream& err) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(a.src_dir)) {
    throw io_error("not a directory: " + a.src_dir);
  }
  std::vector<std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(a.src_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".java") {
      files.push_back(entry.path().string());
    }
  }
  std::sort(files.begin(), files.end());

  corpus::PairStats stats;
  std::vector<std::string> warnings;
  std::vector<corpus::AnnotatedPair> pairs;
  for (const auto& file : files) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw io_error("cannot read source file: " + file);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::vector<corpus::MethodUnit> units;
    try {
      units = corpus::parse_source(text);
    } catch (const parse_error& e) {
      throw error(file + ":" + e.what());
    }
    corpus::PairStats file_stats;
    std::vector<std::string> file_warnings;
    auto file_pairs = corpus::build_pairs(units, &file_stats, &file_warnings);
    stats.methods += file_stats.methods;
    stats.kept += file_stats.kept;
    stats.skipped_no_annotation += file_stats.skipped_no_annotation;
    stats.skipped_empty_sequence += file_stats.skipped_empty_sequence;
    for (const auto& w : file_warnings) warnings.push_back(file + ": " + w);
    pairs.insert(pairs.end(), file_pairs.begin(), file_pairs.end());
  }
  for (const auto& w : warnings) err << "warning: " << w << '\n';

  if (a.dedup) {
    std::set<std::string> seen;
    std::vector<corpus::AnnotatedPair> unique;
    for (auto& pair : pairs) {
      std::string key = join(vocab::tokenize_annotation(pair.annotation)) + '\t' +
                        join(pair.sequence.render_tokens());
      if (seen.insert(std::move(key)).second) unique.push_back(std::move(pair));
    }
    pairs = std::move(unique);
  }

  corpus::write_corpus(pairs, a.output);
  out << "files=" << files.size() << " methods=" << stats.methods << " kept=" << stats.kept
      << " no_annotation=" << stats.skipped_no_annotation
      << " empty_sequence=" << stats.skipped_empty_sequence << " written=" << pairs.size()
      << '\n';
  return 0;
}

struct VocabArgs {
  std::string corpus_path;
  std::string output_dir;
  std::size_t source_cap = 10000;
  std::size_t target_cap = 10000;
};

inline int run_vocab(const VocabArgs& a, std::ostream& out) {
  auto pairs = corpus::read_corpus(a.corpus_path);
  if (pairs.empty()) throw value_error("vocab: corpus has no pairs: " + a.corpus_path);
  std::vector<std::vector<std::string>> queries;
  std::vector<std::vector<std::string>> targets;
  for (const auto& pair : pairs) {
    queries.push_back(vocab::tokenize_annotation(pair.annotation));
    targets.push_back(pair.sequence.render_tokens());
  }
  auto source = vocab::build_vocabulary(queries, a.source_cap);
  auto target = vocab::build_vocabulary(targets, a.target_cap);
  auto idf = vocab::compute_idf(targets);

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(a.output_dir, ec);
  if (ec) throw io_error("cannot create directory: " + a.output_dir);
  source.save((fs::path(a.output_dir) / "source.vocab").string());
  target.save((fs::path(a.output_dir) / "target.vocab").string());
  idf.save((fs::path(a.output_dir) / "idf.tsv").string());
  out << "pairs=" << pairs.size() << " source_vocab=" << source.size()
      << " target_vocab=" << target.size() << '\n';
  return 0;
}

struct TrainArgs {
  std::string corpus_path;
  std::string vocab_dir;
  std::string output;
  std::string loss_log_path;
  std::string resume_path;
  TrainSettings settings;
};

inline int run_train(const TrainArgs& a, std::ostream& out) {
  auto pairs = corpus::read_corpus(a.corpus_path);
  VocabBundle vb = load_vocab_dir(a.vocab_dir);
  auto encoded = encode_pairs(pairs, vb.source, vb.target);

  training::TrainOptions options;
  options.threads = resolve_threads(a.settings.threads, a.settings.deterministic);
  options.checkpoint_path = a.output;

  std::ofstream loss_log;
  if (!a.loss_log_path.empty()) {
    loss_log.open(a.loss_log_path, std::ios::binary);
    if (!loss_log) throw io_error("cannot write loss log: " + a.loss_log_path);
    options.loss_log = &loss_log;
  }

  training::Checkpoint resumed;
  if (!a.resume_path.empty()) {
    resumed = training::load_checkpoint(a.resume_path);
    training::verify_vocab_hashes(resumed, vb.source, vb.target);
    options.resume = &resumed;
  }

  auto ck = training::train(encoded, vb.source, vb.target, vb.idf,
                            a.settings.model_config(vb.source.size(), vb.target.size()),
                            a.settings.training_config(), options);
  training::save_checkpoint(ck, a.output);
  out << "pairs=" << encoded.size() << " iterations=" << ck.iteration
      << " parameters=" << model::parameter_count(ck.params) << " checkpoint=" << a.output
      << '\n';
  return 0;
}

struct TranslateArgs {
  std::string checkpoint_path;
  std::string vocab_dir;
  std::string query;
  std::size_t beam = 10;
  std::size_t max_len = 30;
  double lambda = 0.035;
  bool allow_vocab_mismatch = false;
};

inline int run_translate(const TranslateArgs& a, std::ostream& out) {
  auto ck = training::load_checkpoint(a.checkpoint_path);
  VocabBundle vb = load_vocab_dir(a.vocab_dir);
  if (!a.allow_vocab_mismatch) training::verify_vocab_hashes(ck, vb.source, vb.target);
  auto tokens = vocab::tokenize_annotation(a.query);
  if (tokens.empty()) throw value_error("translate: query has no tokens");
  auto hyps = decode::beam_search(ck.params, vb.source, vb.target, vb.idf, tokens, a.beam,
                                  a.max_len, a.lambda);
  auto ranked = decode::rank(hyps, vb.target);
  for (const auto& r : ranked.ranked) {
    out << fmt(r.average_cost) << '\t' << join(r.tokens) << '\n';
  }
  return 0;
}

struct EvalArgs {
  std::string checkpoint_path;
  std::string test_path;
  std::string vocab_dir;
  std::string top_spec = "1,5,10";
  std::size_t beam = 0;  // 0: max of top list
  std::size_t max_len = 30;
  double lambda = 0.035;
  std::string report_path;
  std::string labels_path;
  bool allow_vocab_mismatch = false;
};

inline int run_eval(const EvalArgs& a, std::ostream& out) {
  auto tops = parse_top_list(a.top_spec);
  std::size_t width = a.beam != 0 ? a.beam : *std::max_element(tops.begin(), tops.end());

  auto ck = training::load_checkpoint(a.checkpoint_path);
  VocabBundle vb = load_vocab_dir(a.vocab_dir);
  if (!a.allow_vocab_mismatch) training::verify_vocab_hashes(ck, vb.source, vb.target);
  auto tests = corpus::read_corpus(a.test_path);

  auto reports = eval::evaluate_testset_multi(ck.params, vb.source, vb.target, vb.idf, tests,
                                              tops, width, a.lambda, a.max_len);
  for (const auto& report : reports) {
    out << "top" << report.top_n << '\t' << fmt(report.mean) << '\n';
  }

  if (!a.report_path.empty()) {
    std::ofstream rep(a.report_path, std::ios::binary);
    if (!rep) throw io_error("cannot write report file: " + a.report_path);
    for (const auto& report : reports) {
      rep << "# top=" << report.top_n << '\n';
      eval::write_report(report, rep);
    }
  }

  if (!a.labels_path.empty()) {
    auto rows = eval::read_relevance_labels(a.labels_path);
    if (rows.size() != tests.size()) {
      throw value_error("labels: expected " + std::to_string(tests.size()) + " rows, got " +
                        std::to_string(rows.size()));
    }
    double frank_sum = 0.0;
    for (const auto& row : rows) {
      frank_sum += static_cast<double>(eval::frank(row).value_or(row.size() + 1));
    }
    out << "FRANK\t" << fmt(frank_sum / static_cast<double>(rows.size())) << '\n';
    for (std::size_t k : tops) {
      double sum = 0.0;
      for (const auto& row : rows) sum += eval::relevancy_ratio(row, k);
      out << "REL@" << k << '\t' << fmt(sum / static_cast<double>(rows.size())) << '\n';
    }
  }
  return 0;
}

struct AblateArgs {
  std::string corpus_path;
  std::string top_spec = "1,5,10";
  std::size_t beam = 10;
  std::size_t max_len = 30;
  TrainSettings settings;
};

inline int run_ablate(const AblateArgs& a, std::ostream& out) {
  auto pairs = corpus::read_corpus(a.corpus_path);
  if (pairs.empty()) throw value_error("ablate: corpus has no pairs: " + a.corpus_path);
  std::vector<std::vector<std::string>> queries;
  std::vector<std::vector<std::string>> targets;
  for (const auto& pair : pairs) {
    queries.push_back(vocab::tokenize_annotation(pair.annotation));
    targets.push_back(pair.sequence.render_tokens());
  }
  auto source = vocab::build_vocabulary(queries, 10000);
  auto target = vocab::build_vocabulary(targets, 10000);
  auto idf = vocab::compute_idf(targets);
  auto encoded = encode_pairs(pairs, source, target);

  auto tops = parse_top_list(a.top_spec);
  std::size_t width = std::max(a.beam, *std::max_element(tops.begin(), tops.end()));
  std::size_t threads = resolve_threads(a.settings.threads, a.settings.deterministic);

  struct Row {
    const char* name;
    bool attention;
    double lambda;
  };
  const Row rows[] = {
      {"encoder-decoder", false, 0.0},
      {"+attention", true, 0.0},
      {"+idf-cost", true, 0.035},
  };

  out << "config";
  for (std::size_t k : tops) out << "\ttop" << k;
  out << '\n';
  for (const Row& row : rows) {
    TrainSettings s = a.settings;
    s.no_attention = !row.attention;
    s.lambda = row.lambda;
    training::TrainOptions options;
    options.threads = threads;
    auto ck = training::train(encoded, source, target, idf,
                              s.model_config(source.size(), target.size()),
                              s.training_config(), options);
    auto reports = eval::evaluate_testset_multi(ck.params, source, target, idf, pairs, tops,
                                                width, row.lambda, a.max_len);
    out << row.name;
    for (const auto& report : reports) out << '\t' << fmt(report.mean, "%.2f");
    out << '\n';
  }
  return 0;
}

struct SynthArgs {
  std::string output;
  synthetic::SyntheticSpec spec;
};

inline int run_synth(const SynthArgs& a, std::ostream& out) {
  auto pairs = synthetic::generate(a.spec);
  corpus::write_corpus(pairs, a.output);
  out << "pairs=" << pairs.size() << " written=" << a.output << '\n';
  return 0;
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"translate natural-language queries into API call sequences"};
  app.name("seq2api");
  app.require_subcommand(0, 1);

  detail::ExtractArgs extract_args;
  CLI::App* extract = app.add_subcommand("extract", "mine annotation/API pairs from Java sources");
  extract->add_option("src-dir", extract_args.src_dir, "directory scanned for .java files")
      ->required();
  extract->add_option("-o,--output", extract_args.output, "corpus file to write")->required();
  extract->add_flag("--dedup", extract_args.dedup, "drop duplicate pairs");

  detail::VocabArgs vocab_args;
  CLI::App* vocab_cmd = app.add_subcommand("vocab", "build vocabularies and IDF table");
  vocab_cmd->add_option("corpus", vocab_args.corpus_path, "corpus file")->required();
  vocab_cmd->add_option("-o,--output", vocab_args.output_dir, "directory for vocab files")
      ->required();
  vocab_cmd->add_option("--source-cap", vocab_args.source_cap, "max source vocabulary size");
  vocab_cmd->add_option("--target-cap", vocab_args.target_cap, "max target vocabulary size");

  detail::TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "fit a model with Adadelta");
  train->add_option("corpus", train_args.corpus_path, "training corpus")->required();
  train->add_option("--vocab", train_args.vocab_dir, "directory from the vocab subcommand")
      ->required();
  train->add_option("-o,--output", train_args.output, "checkpoint file to write")->required();
  train->add_option("--loss-log", train_args.loss_log_path, "per-iteration loss file");
  train->add_option("--resume", train_args.resume_path, "checkpoint to continue from");
  auto train_keys = detail::add_train_flags(train, train_args.settings);

  detail::TranslateArgs translate_args;
  CLI::App* translate = app.add_subcommand("translate", "decode a query into ranked sequences");
  translate->add_option("checkpoint", translate_args.checkpoint_path, "trained model")
      ->required();
  translate->add_option("--vocab", translate_args.vocab_dir, "vocabulary directory")
      ->required();
  translate->add_option("-q,--query", translate_args.query, "natural-language query")
      ->required();
  translate->add_option("--beam", translate_args.beam, "beam width");
  translate->add_option("--max-len", translate_args.max_len, "decoding length cap");
  translate->add_option("--lambda", translate_args.lambda, "IDF penalty weight");
  translate->add_flag("--allow-vocab-mismatch", translate_args.allow_vocab_mismatch,
                      "skip the vocabulary hash check");

  detail::EvalArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand("eval", "score a model on a test corpus");
  eval_cmd->add_option("checkpoint", eval_args.checkpoint_path, "trained model")->required();
  eval_cmd->add_option("test", eval_args.test_path, "test corpus")->required();
  eval_cmd->add_option("--vocab", eval_args.vocab_dir, "vocabulary directory")->required();
  eval_cmd->add_option("--top", eval_args.top_spec, "comma-separated top-n list");
  eval_cmd->add_option("--beam", eval_args.beam, "beam width (0: max of --top)");
  eval_cmd->add_option("--max-len", eval_args.max_len, "decoding length cap");
  eval_cmd->add_option("--lambda", eval_args.lambda, "IDF penalty weight");
  eval_cmd->add_option("-o,--output", eval_args.report_path, "per-pair report file");
  eval_cmd->add_option("--labels", eval_args.labels_path,
                       "relevance labels, one 0/1 row per test pair");
  eval_cmd->add_flag("--allow-vocab-mismatch", eval_args.allow_vocab_mismatch,
                     "skip the vocabulary hash check");

  detail::AblateArgs ablate_args;
  CLI::App* ablate = app.add_subcommand(
      "ablate", "train and score the three standard configurations");
  ablate->add_option("corpus", ablate_args.corpus_path, "training corpus")->required();
  ablate->add_option("--top", ablate_args.top_spec, "comma-separated top-n list");
  ablate->add_option("--beam", ablate_args.beam, "beam width");
  ablate->add_option("--max-len", ablate_args.max_len, "decoding length cap");
  auto ablate_keys = detail::add_train_flags(ablate, ablate_args.settings);

  detail::SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  synth->add_option("-o,--output", synth_args.output, "corpus file to write")->required();
  synth->add_option("--seed", synth_args.spec.seed, "RNG seed");
  synth->add_option("--pairs", synth_args.spec.pair_count, "total pair count");
  synth->add_option("--query-min", synth_args.spec.min_query_len, "shortest query");
  synth->add_option("--query-max", synth_args.spec.max_query_len, "longest query");
  synth->add_option("--api-min", synth_args.spec.min_api_len, "shortest target");
  synth->add_option("--api-max", synth_args.spec.max_api_len, "longest target");
  synth->add_option("--query-vocab", synth_args.spec.query_vocab, "word pool size");
  synth->add_option("--api-vocab", synth_args.spec.api_vocab, "API pool size");

  if (args.empty()) {
    err << app.help();
    return 1;
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (extract->parsed()) return detail::run_extract(extract_args, out, err);
    if (vocab_cmd->parsed()) return detail::run_vocab(vocab_args, out);
    if (train->parsed()) {
      if (!train_args.settings.config_path.empty()) {
        detail::apply_config(train_args.settings.config_path, train_keys);
      }
      return detail::run_train(train_args, out);
    }
    if (translate->parsed()) return detail::run_translate(translate_args, out);
    if (eval_cmd->parsed()) return detail::run_eval(eval_args, out);
    if (ablate->parsed()) {
      if (!ablate_args.settings.config_path.empty()) {
        detail::apply_config(ablate_args.settings.config_path, ablate_keys);
      }
      return detail::run_ablate(ablate_args, out);
    }
    if (synth->parsed()) return detail::run_synth(synth_args, out);
    err << app.help();
    return 1;
  } catch (const config_error& e) {
    err << "seq2api: " << e.what() << '\n';
    return 1;
  } catch (const error& e) {
    err << "seq2api: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace seq2api::cli
