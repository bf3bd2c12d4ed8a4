#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "seq2api/errors.hpp"
#include "seq2api/model.hpp"
#include "seq2api/vocab.hpp"

// Training: the IDF-penalized token cost, minibatch objective with global
// gradient clipping, Adadelta, the seeded training loop, and the binary
// checkpoint format. Everything is deterministic given the seed; minibatch
// gradients may be computed on several threads but are reduced in input
// order, so the thread count never changes the result bits.

namespace seq2api::training {

struct TrainingConfig {
  double lambda = 0.035;
  std::size_t batch_size = 16;
  std::size_t max_iterations = 1000;
  double adadelta_rho = 0.95;
  double adadelta_eps = 1e-6;
  double clip_norm = 5.0;
  std::uint64_t seed = 0;
  std::size_t checkpoint_every = 0;  // 0: only the final checkpoint

  void validate() const {
    if (lambda < 0.0) throw value_error("training config: lambda must be >= 0");
    if (batch_size < 1) throw value_error("training config: batch_size must be >= 1");
    if (adadelta_rho <= 0.0 || adadelta_rho >= 1.0) {
      throw value_error("training config: adadelta_rho must lie in (0,1)");
    }
    if (adadelta_eps <= 0.0) throw value_error("training config: adadelta_eps must be > 0");
    if (clip_norm <= 0.0) throw value_error("training config: clip_norm must be > 0");
  }
};

// cost of emitting a token: negative log likelihood minus the rarity bonus
inline double token_cost(double logp, double idf_weight, double lambda) {
  return -logp - lambda * idf_weight;
}

// -------------------------------------------------------------------------
// Batch objective

struct BatchResult {
  double objective = 0.0;
  model::Gradients gradients;
};

namespace detail {

inline double pair_cost(const model::EncodedPair& pair, const std::vector<double>& logps,
                        const numerics::DenseVector& idf_weights, double lambda) {
  double cost = 0.0;
  for (std::size_t t = 0; t < logps.size(); ++t) {
    std::size_t label = t < pair.target.size() ? pair.target[t] : vocab::kEosIndex;
    cost += token_cost(logps[t], idf_weights[label], lambda);
  }
  return cost;
}

}  // namespace detail

// Mean penalized cost over the batch and its exact gradient, globally
// L2-clipped. The lambda term is constant in the parameters, so the gradient
// equals the plain NLL gradient at any lambda.
inline BatchResult batch_objective(const std::vector<model::EncodedPair>& batch,
                                   const model::ModelParameters& params,
                                   const numerics::DenseVector& idf_weights, double lambda,
                                   double clip_norm, std::size_t threads = 1) {
  if (batch.empty()) throw value_error("batch_objective: empty batch");
  if (idf_weights.size() != params.config.target_vocab_size) {
    throw shape_error("batch_objective: idf weight vector does not cover the target vocabulary");
  }

  std::vector<model::ForwardBackwardResult> per_pair(batch.size());
  std::size_t workers = std::min(threads < 1 ? std::size_t{1} : threads, batch.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < batch.size(); ++i) {
      per_pair[i] = model::forward_backward(batch[i], params);
    }
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w]() {
        for (std::size_t i = w; i < batch.size(); i += workers) {
          per_pair[i] = model::forward_backward(batch[i], params);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  BatchResult result;
  result.gradients = model::zero_gradients(params.config);
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    result.objective += detail::pair_cost(batch[i], per_pair[i].logps, idf_weights, lambda);
    model::add_scaled(result.gradients, per_pair[i].gradients, inv);
  }
  result.objective *= inv;

  double sq = 0.0;
  for (const auto& view : model::parameter_views(result.gradients)) {
    for (std::size_t i = 0; i < view.size; ++i) sq += view.data[i] * view.data[i];
  }
  double norm = std::sqrt(sq);
  if (norm > clip_norm) {
    double scale = clip_norm / norm;
    for (auto& view : model::parameter_views(result.gradients)) {
      for (std::size_t i = 0; i < view.size; ++i) view.data[i] *= scale;
    }
  }
  return result;
}

// -------------------------------------------------------------------------
// Adadelta

struct AdadeltaState {
  model::ModelParameters sq_grad;    // running E[g^2]
  model::ModelParameters sq_update;  // running E[dx^2]
};

inline AdadeltaState init_adadelta(const model::ModelConfig& config) {
  return {model::allocate_parameters(config), model::allocate_parameters(config)};
}

inline void adadelta_update(model::ModelParameters& params, const model::Gradients& grads,
                            AdadeltaState& state, double rho, double eps) {
  auto pv = model::parameter_views(params);
  auto gv = model::parameter_views(const_cast<model::Gradients&>(grads));
  auto egv = model::parameter_views(state.sq_grad);
  auto exv = model::parameter_views(state.sq_update);
  if (pv.size() != gv.size()) throw shape_error("adadelta_update: mismatched parameter sets");
  for (std::size_t a = 0; a < pv.size(); ++a) {
    if (pv[a].size != gv[a].size || pv[a].size != egv[a].size || pv[a].size != exv[a].size) {
      throw shape_error("adadelta_update: mismatched array " + pv[a].name);
    }
    for (std::size_t i = 0; i < pv[a].size; ++i) {
      double g = gv[a].data[i];
      double eg = rho * egv[a].data[i] + (1.0 - rho) * g * g;
      double delta = -(std::sqrt(exv[a].data[i] + eps) / std::sqrt(eg + eps)) * g;
      egv[a].data[i] = eg;
      exv[a].data[i] = rho * exv[a].data[i] + (1.0 - rho) * delta * delta;
      pv[a].data[i] += delta;
    }
  }
}

// -------------------------------------------------------------------------
// Checkpoints

inline constexpr char kCheckpointMagic[4] = {'S', 'Q', '2', 'A'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  model::ModelParameters params;
  AdadeltaState state;
  std::uint64_t iteration = 0;
  std::uint64_t source_vocab_hash = 0;
  std::uint64_t target_vocab_hash = 0;
};

namespace detail {

inline void put_bytes(std::ostream& out, const void* data, std::size_t n) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

inline void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  put_bytes(out, b, 4);
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  put_bytes(out, b, 8);
}

inline void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline void get_bytes(std::istream& in, void* data, std::size_t n, const std::string& path) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw truncated_error("checkpoint truncated: " + path);
  }
}

inline std::uint32_t get_u32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  get_bytes(in, b, 4, path);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

inline std::uint64_t get_u64(std::istream& in, const std::string& path) {
  unsigned char b[8];
  get_bytes(in, b, 8, path);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

inline double get_f64(std::istream& in, const std::string& path) {
  return std::bit_cast<double>(get_u64(in, path));
}

template <typename View>
void put_array(std::ostream& out, const std::string& prefix, const View& view) {
  std::string name = prefix + view.name;
  put_u32(out, static_cast<std::uint32_t>(name.size()));
  put_bytes(out, name.data(), name.size());
  put_u32(out, static_cast<std::uint32_t>(view.dims.size()));
  for (std::size_t d : view.dims) put_u64(out, d);
  for (std::size_t i = 0; i < view.size; ++i) put_f64(out, view.data[i]);
}

inline void get_array(std::istream& in, const std::string& path, const std::string& prefix,
                      model::ArrayView& view) {
  std::string expected = prefix + view.name;
  std::uint32_t name_len = get_u32(in, path);
  std::string name(name_len, '\0');
  get_bytes(in, name.data(), name_len, path);
  if (name != expected) {
    throw format_error("checkpoint array order mismatch: expected " + expected + ", found " +
                       name + " in " + path);
  }
  std::uint32_t rank = get_u32(in, path);
  if (rank != view.dims.size()) {
    throw format_error("checkpoint rank mismatch for " + name + " in " + path);
  }
  for (std::size_t d = 0; d < rank; ++d) {
    std::uint64_t dim = get_u64(in, path);
    if (dim != view.dims[d]) {
      throw format_error("checkpoint shape mismatch for " + name + " in " + path);
    }
  }
  for (std::size_t i = 0; i < view.size; ++i) view.data[i] = get_f64(in, path);
}

}  // namespace detail

inline void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot write checkpoint: " + path);
  using namespace detail;
  put_bytes(out, kCheckpointMagic, 4);
  put_u32(out, kCheckpointVersion);
  const model::ModelConfig& c = ck.params.config;
  put_u64(out, c.source_vocab_size);
  put_u64(out, c.target_vocab_size);
  put_u64(out, c.embed_dim);
  put_u64(out, c.hidden_dim);
  unsigned char attention = c.attention_enabled ? 1 : 0;
  put_bytes(out, &attention, 1);
  put_u64(out, c.seed);

  auto params = model::parameter_views(ck.params);
  auto sq_grad = model::parameter_views(ck.state.sq_grad);
  auto sq_update = model::parameter_views(ck.state.sq_update);
  put_u32(out, static_cast<std::uint32_t>(params.size() + sq_grad.size() + sq_update.size()));
  for (const auto& v : params) put_array(out, "param.", v);
  for (const auto& v : sq_grad) put_array(out, "sq_grad.", v);
  for (const auto& v : sq_update) put_array(out, "sq_update.", v);

  put_u64(out, ck.iteration);
  put_u64(out, ck.source_vocab_hash);
  put_u64(out, ck.target_vocab_hash);
  if (!out) throw io_error("write failed: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot read checkpoint: " + path);
  using namespace detail;

  char magic[4];
  get_bytes(in, magic, 4, path);
  if (std::string_view(magic, 4) != std::string_view(kCheckpointMagic, 4)) {
    throw format_error("not a checkpoint file (bad magic): " + path);
  }
  std::uint32_t version = get_u32(in, path);
  if (version != kCheckpointVersion) {
    throw version_error("checkpoint format version " + std::to_string(version) +
                        " is not supported (expected " + std::to_string(kCheckpointVersion) +
                        "): " + path);
  }

  model::ModelConfig config;
  config.source_vocab_size = get_u64(in, path);
  config.target_vocab_size = get_u64(in, path);
  config.embed_dim = get_u64(in, path);
  config.hidden_dim = get_u64(in, path);
  unsigned char attention = 0;
  get_bytes(in, &attention, 1, path);
  config.attention_enabled = attention != 0;
  config.seed = get_u64(in, path);
  config.validate();

  Checkpoint ck;
  ck.params = model::allocate_parameters(config);
  ck.state = init_adadelta(config);

  auto params = model::parameter_views(ck.params);
  auto sq_grad = model::parameter_views(ck.state.sq_grad);
  auto sq_update = model::parameter_views(ck.state.sq_update);
  std::uint32_t n_arrays = get_u32(in, path);
  if (n_arrays != params.size() + sq_grad.size() + sq_update.size()) {
    throw format_error("checkpoint array count mismatch in " + path);
  }
  for (auto& v : params) get_array(in, path, "param.", v);
  for (auto& v : sq_grad) get_array(in, path, "sq_grad.", v);
  for (auto& v : sq_update) get_array(in, path, "sq_update.", v);

  ck.iteration = get_u64(in, path);
  ck.source_vocab_hash = get_u64(in, path);
  ck.target_vocab_hash = get_u64(in, path);

  char extra;
  in.read(&extra, 1);
  if (in.gcount() != 0) throw format_error("trailing data after checkpoint in " + path);
  return ck;
}

// Refuses models paired with the wrong vocabulary files; callers may catch
// hash_error to implement an explicit override.
inline void verify_vocab_hashes(const Checkpoint& ck, const vocab::Vocabulary& source,
                                const vocab::Vocabulary& target) {
  if (ck.source_vocab_hash != source.content_hash()) {
    throw hash_error("source vocabulary does not match the one this model was trained with");
  }
  if (ck.target_vocab_hash != target.content_hash()) {
    throw hash_error("target vocabulary does not match the one this model was trained with");
  }
}

// -------------------------------------------------------------------------
// Training loop

namespace detail {

// Epoch shuffles use a dedicated generator derived from (seed, epoch) so a
// resumed run can re-derive the order of any iteration. Hand-rolled
// Fisher-Yates: std::shuffle is implementation-defined.
inline std::vector<std::size_t> epoch_permutation(std::uint64_t seed, std::uint64_t epoch,
                                          std::size_t n) {
  std::mt19937_64 rng(seed + 0x9E3779B97F4A7C15ull * (epoch + 1));
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

inline std::string format_loss(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

struct TrainOptions {
  std::size_t threads = 1;
  std::ostream* loss_log = nullptr;       // one line per step: iteration<TAB>mean_cost
  const Checkpoint* resume = nullptr;     // continue from here instead of fresh init
  std::string checkpoint_path;            // periodic saves land here when checkpoint_every > 0
};

inline Checkpoint train(const std::vector<model::EncodedPair>& corpus,
                        const vocab::Vocabulary& source_vocab,
                        const vocab::Vocabulary& target_vocab, const vocab::IdfTable& idf,
                        const model::ModelConfig& model_config, const TrainingConfig& config,
                        const TrainOptions& options = {}) {
  config.validate();
  model_config.validate();
  if (corpus.empty()) throw value_error("train: empty corpus");
  if (model_config.source_vocab_size != source_vocab.size() ||
      model_config.target_vocab_size != target_vocab.size()) {
    throw value_error("train: model config vocabulary sizes do not match the vocabularies");
  }
  for (const auto& pair : corpus) {
    if (pair.source.empty() || pair.target.empty()) {
      throw value_error("train: corpus contains a pair with an empty side");
    }
    for (std::size_t i : pair.source) {
      if (i >= source_vocab.size()) throw value_error("train: source index out of vocabulary");
    }
    for (std::size_t i : pair.target) {
      if (i >= target_vocab.size()) throw value_error("train: target index out of vocabulary");
    }
  }

  Checkpoint ck;
  if (options.resume) {
    if (options.resume->params.config != model_config) {
      throw value_error("train: resume checkpoint was built with a different model config");
    }
    ck.params = options.resume->params;
    ck.state.sq_grad = options.resume->state.sq_grad;
    ck.state.sq_update = options.resume->state.sq_update;
    ck.iteration = options.resume->iteration;
  } else {
    ck.params = model::init_parameters(model_config);
    ck.state = init_adadelta(model_config);
    ck.iteration = 0;
  }
  ck.source_vocab_hash = source_vocab.content_hash();
  ck.target_vocab_hash = target_vocab.content_hash();

  const numerics::DenseVector weights = idf.dense_weights(target_vocab);
  const std::size_t n = corpus.size();
  const std::size_t bpe = (n + config.batch_size - 1) / config.batch_size;

  std::vector<std::size_t> perm;
  std::uint64_t perm_epoch = 0;
  bool have_perm = false;

  for (std::uint64_t it = ck.iteration; it < config.max_iterations; ++it) {
    const std::uint64_t epoch = it / bpe;
    const std::size_t slot = static_cast<std::size_t>(it % bpe);
    if (!have_perm || epoch != perm_epoch) {
      perm = detail::epoch_permutation(config.seed, epoch, n);
      perm_epoch = epoch;
      have_perm = true;
    }

    std::vector<model::EncodedPair> batch;
    const std::size_t begin = slot * config.batch_size;
    const std::size_t end = std::min(begin + config.batch_size, n);
    batch.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) batch.push_back(corpus[perm[i]]);

    BatchResult step =
        batch_objective(batch, ck.params, weights, config.lambda, config.clip_norm,
                        options.threads);
    if (options.loss_log) {
      (*options.loss_log) << (it + 1) << '\t' << detail::format_loss(step.objective) << '\n';
    }
    adadelta_update(ck.params, step.gradients, ck.state, config.adadelta_rho,
                    config.adadelta_eps);
    ck.iteration = it + 1;

    if (config.checkpoint_every > 0 && !options.checkpoint_path.empty() &&
        ck.iteration % config.checkpoint_every == 0) {
      save_checkpoint(ck, options.checkpoint_path);
    }
  }
  return ck;
}

}  // namespace seq2api::training
