#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <type_traits>
#include <vector>

#include "seq2api/errors.hpp"
#include "seq2api/numerics.hpp"
#include "seq2api/vocab.hpp"

// The attention-based recurrent encoder-decoder. A bidirectional GRU encoder
// turns the framed query into per-position annotation vectors; the decoder is
// a GRU fed the previous target embedding plus a context vector (additive
// attention over the annotations, or the fixed summary when attention is
// off), with a softmax output layer over state, context, and previous
// embedding. backward() produces exact gradients by backpropagation through
// time; tests pit every entry against central finite differences.

namespace seq2api::model {

using numerics::DenseMatrix;
using numerics::DenseVector;

struct ModelConfig {
  std::size_t source_vocab_size = 0;
  std::size_t target_vocab_size = 0;
  std::size_t embed_dim = 32;
  std::size_t hidden_dim = 64;
  bool attention_enabled = true;
  std::uint64_t seed = 0;

  // context fed to the decoder: attention mixes 2h-dim annotations, the
  // ablation reuses the h-dim summary
  std::size_t context_dim() const { return attention_enabled ? 2 * hidden_dim : hidden_dim; }

  void validate() const {
    if (source_vocab_size < 1 || target_vocab_size < 1 || embed_dim < 1 || hidden_dim < 1) {
      throw value_error("model config: all dimensions must be at least 1");
    }
  }

  bool operator==(const ModelConfig&) const = default;
};

struct GruWeights {
  DenseMatrix wz, uz;
  DenseVector bz;
  DenseMatrix wr, ur;
  DenseVector br;
  DenseMatrix wh, uh;
  DenseVector bh;
};

struct ModelParameters {
  ModelConfig config;
  DenseMatrix source_embedding;  // [V_s x d]
  DenseMatrix target_embedding;  // [V_t x d]
  GruWeights encoder_fwd;        // input d, state h
  GruWeights encoder_bwd;
  GruWeights decoder;            // input d + context
  DenseMatrix attn_state_w;      // [h x h]
  DenseMatrix attn_annot_w;      // [h x 2h]
  DenseVector attn_score_v;      // [h]
  DenseMatrix init_w;            // [h x 2h]
  DenseVector init_b;            // [h]
  DenseMatrix out_w;             // [V_t x (h + context + d)]
  DenseVector out_b;             // [V_t]
};

// Gradients share the parameter layout one-to-one.
using Gradients = ModelParameters;

struct EncoderOutput {
  std::vector<DenseVector> annotations;  // T_x vectors of size 2h
  DenseVector final_summary;             // h
};

struct AttentionResult {
  DenseVector context;  // 2h
  DenseVector weights;  // T_x, non-negative, sums to 1
};

struct TokenDistribution {
  DenseVector probabilities;
};

struct EncodedPair {
  std::vector<std::size_t> source;  // raw indices, no framing
  std::vector<std::size_t> target;
};

// ---------------------------------------------------------------------------
// Parameter registry: one fixed visitation order shared by initialization,
// checkpoints, Adadelta state, and the flatten/unflatten pair behind the
// finite-difference oracle.

template <typename Params, typename Fn>
void visit_parameter_arrays(Params&& p, Fn&& fn) {
  auto cell = [&fn](const std::string& prefix, auto&& w) {
    fn(prefix + ".wz", w.wz, false);
    fn(prefix + ".uz", w.uz, false);
    fn(prefix + ".bz", w.bz, true);
    fn(prefix + ".wr", w.wr, false);
    fn(prefix + ".ur", w.ur, false);
    fn(prefix + ".br", w.br, true);
    fn(prefix + ".wh", w.wh, false);
    fn(prefix + ".uh", w.uh, false);
    fn(prefix + ".bh", w.bh, true);
  };
  fn("source_embedding", p.source_embedding, false);
  fn("target_embedding", p.target_embedding, false);
  cell("encoder_fwd", p.encoder_fwd);
  cell("encoder_bwd", p.encoder_bwd);
  cell("decoder", p.decoder);
  fn("attn_state_w", p.attn_state_w, false);
  fn("attn_annot_w", p.attn_annot_w, false);
  fn("attn_score_v", p.attn_score_v, false);
  fn("init_w", p.init_w, false);
  fn("init_b", p.init_b, true);
  fn("out_w", p.out_w, false);
  fn("out_b", p.out_b, true);
}

struct ArrayView {
  std::string name;
  std::vector<std::size_t> dims;
  double* data;
  std::size_t size;
  bool is_bias;
};

struct ConstArrayView {
  std::string name;
  std::vector<std::size_t> dims;
  const double* data;
  std::size_t size;
  bool is_bias;
};

inline std::vector<ArrayView> parameter_views(ModelParameters& p) {
  std::vector<ArrayView> out;
  visit_parameter_arrays(p, [&out](std::string name, auto& arr, bool is_bias) {
    using T = std::decay_t<decltype(arr)>;
    if constexpr (std::is_same_v<T, DenseMatrix>) {
      out.push_back({std::move(name), {arr.rows, arr.cols}, arr.values.data(), arr.values.size(),
                     is_bias});
    } else {
      out.push_back(
          {std::move(name), {arr.size()}, arr.values.data(), arr.values.size(), is_bias});
    }
  });
  return out;
}

inline std::vector<ConstArrayView> parameter_views(const ModelParameters& p) {
  std::vector<ConstArrayView> out;
  visit_parameter_arrays(p, [&out](std::string name, const auto& arr, bool is_bias) {
    using T = std::decay_t<decltype(arr)>;
    if constexpr (std::is_same_v<T, DenseMatrix>) {
      out.push_back({std::move(name), {arr.rows, arr.cols}, arr.values.data(), arr.values.size(),
                     is_bias});
    } else {
      out.push_back(
          {std::move(name), {arr.size()}, arr.values.data(), arr.values.size(), is_bias});
    }
  });
  return out;
}

inline ModelParameters allocate_parameters(const ModelConfig& config) {
  config.validate();
  const std::size_t d = config.embed_dim;
  const std::size_t h = config.hidden_dim;
  const std::size_t ctx = config.context_dim();
  ModelParameters p;
  p.config = config;
  p.source_embedding = DenseMatrix(config.source_vocab_size, d);
  p.target_embedding = DenseMatrix(config.target_vocab_size, d);
  auto make_cell = [h](GruWeights& w, std::size_t input_dim) {
    w.wz = DenseMatrix(h, input_dim);
    w.uz = DenseMatrix(h, h);
    w.bz = DenseVector(h);
    w.wr = DenseMatrix(h, input_dim);
    w.ur = DenseMatrix(h, h);
    w.br = DenseVector(h);
    w.wh = DenseMatrix(h, input_dim);
    w.uh = DenseMatrix(h, h);
    w.bh = DenseVector(h);
  };
  make_cell(p.encoder_fwd, d);
  make_cell(p.encoder_bwd, d);
  make_cell(p.decoder, d + ctx);
  p.attn_state_w = DenseMatrix(h, h);
  p.attn_annot_w = DenseMatrix(h, 2 * h);
  p.attn_score_v = DenseVector(h);
  p.init_w = DenseMatrix(h, 2 * h);
  p.init_b = DenseVector(h);
  p.out_w = DenseMatrix(config.target_vocab_size, h + ctx + d);
  p.out_b = DenseVector(config.target_vocab_size);
  return p;
}

inline Gradients zero_gradients(const ModelConfig& config) { return allocate_parameters(config); }

inline ModelParameters init_parameters(const ModelConfig& config) {
  ModelParameters p = allocate_parameters(config);
  std::mt19937_64 rng(config.seed);
  auto uniform = [&rng]() {
    // top 53 bits -> [0,1), scaled into [-0.08, 0.08); platform-stable
    double u = static_cast<double>(rng() >> 11) * 0x1p-53;
    return -0.08 + 0.16 * u;
  };
  for (auto& view : parameter_views(p)) {
    if (view.is_bias) continue;
    for (std::size_t i = 0; i < view.size; ++i) view.data[i] = uniform();
  }
  return p;
}

inline std::size_t parameter_count(const ModelParameters& p) {
  std::size_t n = 0;
  for (const auto& v : parameter_views(p)) n += v.size;
  return n;
}

inline std::vector<double> flatten(const ModelParameters& p) {
  std::vector<double> out;
  out.reserve(parameter_count(p));
  for (const auto& v : parameter_views(p)) out.insert(out.end(), v.data, v.data + v.size);
  return out;
}

inline void unflatten(ModelParameters& p, const std::vector<double>& flat) {
  std::size_t offset = 0;
  for (auto& v : parameter_views(p)) {
    if (offset + v.size > flat.size()) {
      throw shape_error("unflatten: flat vector too short for parameter set");
    }
    for (std::size_t i = 0; i < v.size; ++i) v.data[i] = flat[offset + i];
    offset += v.size;
  }
  if (offset != flat.size()) {
    throw shape_error("unflatten: flat vector has " + std::to_string(flat.size()) +
                      " entries, parameters need " + std::to_string(offset));
  }
}

// acc += scale * g, array by array
inline void add_scaled(ModelParameters& acc, const ModelParameters& g, double scale) {
  auto dst = parameter_views(acc);
  auto src = parameter_views(const_cast<ModelParameters&>(g));
  if (dst.size() != src.size()) throw shape_error("add_scaled: mismatched parameter sets");
  for (std::size_t a = 0; a < dst.size(); ++a) {
    if (dst[a].size != src[a].size) throw shape_error("add_scaled: mismatched array " + dst[a].name);
    for (std::size_t i = 0; i < dst[a].size; ++i) dst[a].data[i] += scale * src[a].data[i];
  }
}

// ---------------------------------------------------------------------------
// Forward pieces

namespace detail {

struct GruCache {
  DenseVector x, h_prev, z, r, rh, hbar, h;
};

}  // namespace detail

inline DenseVector gru_step_cached(const DenseVector& x, const DenseVector& h_prev,
                                   const GruWeights& w, detail::GruCache* cache) {
  using namespace numerics;
  DenseVector az = w.bz;
  matvec_acc(w.wz, x, az);
  matvec_acc(w.uz, h_prev, az);
  DenseVector z = activate(az, Activation::Sigmoid);

  DenseVector ar = w.br;
  matvec_acc(w.wr, x, ar);
  matvec_acc(w.ur, h_prev, ar);
  DenseVector r = activate(ar, Activation::Sigmoid);

  DenseVector rh(h_prev.size());
  for (std::size_t i = 0; i < rh.size(); ++i) rh[i] = r[i] * h_prev[i];

  DenseVector ah = w.bh;
  matvec_acc(w.wh, x, ah);
  matvec_acc(w.uh, rh, ah);
  DenseVector hbar = activate(ah, Activation::Tanh);

  DenseVector h(h_prev.size());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = (1.0 - z[i]) * h_prev[i] + z[i] * hbar[i];

  if (cache) {
    cache->x = x;
    cache->h_prev = h_prev;
    cache->z = std::move(z);
    cache->r = std::move(r);
    cache->rh = std::move(rh);
    cache->hbar = std::move(hbar);
    cache->h = h;
  }
  return h;
}

inline DenseVector gru_step(const DenseVector& x, const DenseVector& h_prev,
                            const GruWeights& w) {
  return gru_step_cached(x, h_prev, w, nullptr);
}

namespace detail {

inline DenseVector embedding_row(const DenseMatrix& table, std::size_t index,
                                 const char* which) {
  if (index >= table.rows) {
    throw index_error(std::string(which) + " index " + std::to_string(index) +
                      " out of range (vocab " + std::to_string(table.rows) + ")");
  }
  DenseVector e(table.cols);
  const double* row = table.row(index);
  for (std::size_t i = 0; i < table.cols; ++i) e[i] = row[i];
  return e;
}

struct EncoderCache {
  std::vector<std::size_t> source;
  std::vector<DenseVector> embeddings;
  std::vector<GruCache> fwd;  // index t: state at position t from position t-1
  std::vector<GruCache> bwd;  // index t: state at position t from position t+1
  DenseVector summary_input;  // = annotations.back()
  DenseVector summary;        // tanh-transformed
  EncoderOutput out;
};

inline EncoderCache encode_cached(const std::vector<std::size_t>& source,
                                  const ModelParameters& p) {
  if (source.empty()) throw value_error("encode: empty source sequence");
  const std::size_t n = source.size();
  const std::size_t h = p.config.hidden_dim;

  EncoderCache cache;
  cache.source = source;
  cache.embeddings.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    cache.embeddings.push_back(embedding_row(p.source_embedding, source[t], "source"));
  }

  cache.fwd.resize(n);
  cache.bwd.resize(n);
  DenseVector state(h);
  for (std::size_t t = 0; t < n; ++t) {
    state = gru_step_cached(cache.embeddings[t], state, p.encoder_fwd, &cache.fwd[t]);
  }
  state = DenseVector(h);
  for (std::size_t t = n; t-- > 0;) {
    state = gru_step_cached(cache.embeddings[t], state, p.encoder_bwd, &cache.bwd[t]);
  }

  cache.out.annotations.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    DenseVector ann(2 * h);
    for (std::size_t i = 0; i < h; ++i) {
      ann[i] = cache.fwd[t].h[i];
      ann[h + i] = cache.bwd[t].h[i];
    }
    cache.out.annotations[t] = std::move(ann);
  }

  cache.summary_input = cache.out.annotations.back();
  DenseVector pre = p.init_b;
  numerics::matvec_acc(p.init_w, cache.summary_input, pre);
  cache.summary = numerics::activate(pre, numerics::Activation::Tanh);
  cache.out.final_summary = cache.summary;
  return cache;
}

struct AttentionCache {
  DenseVector ws;              // W_a s_prev
  std::vector<DenseVector> u;  // tanh(ws + U_a ann_t)
  DenseVector alpha;
  DenseVector context;
};

inline AttentionCache attend_cached(const DenseVector& s_prev, const EncoderOutput& enc,
                                    const ModelParameters& p) {
  const std::size_t n = enc.annotations.size();
  AttentionCache cache;
  cache.ws = numerics::matvec(p.attn_state_w, s_prev);
  cache.u.resize(n);
  DenseVector scores(n);
  for (std::size_t t = 0; t < n; ++t) {
    DenseVector a = cache.ws;
    numerics::matvec_acc(p.attn_annot_w, enc.annotations[t], a);
    cache.u[t] = numerics::activate(a, numerics::Activation::Tanh);
    scores[t] = numerics::dot(p.attn_score_v, cache.u[t]);
  }
  cache.alpha = numerics::softmax(scores);
  cache.context = DenseVector(enc.annotations[0].size());
  for (std::size_t t = 0; t < n; ++t) {
    numerics::axpy(cache.alpha[t], enc.annotations[t], cache.context);
  }
  return cache;
}

}  // namespace detail

inline EncoderOutput encode(const std::vector<std::size_t>& source, const ModelParameters& p) {
  return detail::encode_cached(source, p).out;
}

inline AttentionResult attend(const DenseVector& s_prev, const EncoderOutput& enc,
                              const ModelParameters& p) {
  auto cache = detail::attend_cached(s_prev, enc, p);
  return {std::move(cache.context), std::move(cache.alpha)};
}

namespace detail {

struct StepCache {
  std::size_t prev = 0;
  DenseVector e_prev;
  AttentionCache attn;  // empty when attention is off
  DenseVector context;
  GruCache gru;
  DenseVector logits;
  DenseVector probs;
  std::size_t label = 0;
};

// One decoder step, everything retained. `label` fills in later for training.
inline StepCache decode_step_cached(std::size_t prev_index, const DenseVector& s_prev,
                                    const EncoderOutput& enc, const ModelParameters& p) {
  StepCache step;
  step.prev = prev_index;
  step.e_prev = embedding_row(p.target_embedding, prev_index, "target");

  if (p.config.attention_enabled) {
    step.attn = attend_cached(s_prev, enc, p);
    step.context = step.attn.context;
  } else {
    step.context = enc.final_summary;
  }

  DenseVector x(step.e_prev.size() + step.context.size());
  for (std::size_t i = 0; i < step.e_prev.size(); ++i) x[i] = step.e_prev[i];
  for (std::size_t i = 0; i < step.context.size(); ++i) x[step.e_prev.size() + i] = step.context[i];
  gru_step_cached(x, s_prev, p.decoder, &step.gru);

  DenseVector out_in(p.config.hidden_dim + step.context.size() + step.e_prev.size());
  std::size_t o = 0;
  for (std::size_t i = 0; i < p.config.hidden_dim; ++i) out_in[o++] = step.gru.h[i];
  for (std::size_t i = 0; i < step.context.size(); ++i) out_in[o++] = step.context[i];
  for (std::size_t i = 0; i < step.e_prev.size(); ++i) out_in[o++] = step.e_prev[i];

  step.logits = p.out_b;
  numerics::matvec_acc(p.out_w, out_in, step.logits);

  // stable softmax and log-probabilities from shared logsumexp
  double mx = step.logits[0];
  for (std::size_t i = 1; i < step.logits.size(); ++i) mx = std::max(mx, step.logits[i]);
  double sum = 0.0;
  for (std::size_t i = 0; i < step.logits.size(); ++i) sum += std::exp(step.logits[i] - mx);
  const double lse = mx + std::log(sum);
  step.probs = DenseVector(step.logits.size());
  for (std::size_t i = 0; i < step.logits.size(); ++i) {
    step.probs[i] = std::exp(step.logits[i] - lse);
  }
  return step;
}

inline double log_probability(const StepCache& step, std::size_t token) {
  // recompute from logits so the value is exact even when probs underflow
  double mx = step.logits[0];
  for (std::size_t i = 1; i < step.logits.size(); ++i) mx = std::max(mx, step.logits[i]);
  double sum = 0.0;
  for (std::size_t i = 0; i < step.logits.size(); ++i) sum += std::exp(step.logits[i] - mx);
  return step.logits[token] - (mx + std::log(sum));
}

}  // namespace detail

struct DecodeStepResult {
  DenseVector state;
  TokenDistribution distribution;
};

inline DecodeStepResult decode_step(std::size_t prev_index, const DenseVector& s_prev,
                                    const EncoderOutput& enc, const ModelParameters& p) {
  auto step = detail::decode_step_cached(prev_index, s_prev, enc, p);
  return {std::move(step.gru.h), {std::move(step.probs)}};
}

// ---------------------------------------------------------------------------
// Teacher-forced forward and BPTT backward

namespace detail {

struct ForwardCache {
  EncoderCache enc;
  std::vector<StepCache> steps;  // T+1 entries, last predicts EOS
  std::vector<double> logps;
};

inline ForwardCache forward_cached(const EncodedPair& pair, const ModelParameters& p) {
  if (pair.source.empty()) throw value_error("forward: empty source");
  if (pair.target.empty()) throw value_error("forward: empty target");

  std::vector<std::size_t> framed = pair.source;
  framed.push_back(vocab::kEosIndex);

  ForwardCache cache;
  cache.enc = encode_cached(framed, p);

  DenseVector state = cache.enc.summary;
  std::size_t prev = vocab::kStartIndex;
  const std::size_t steps = pair.target.size() + 1;
  cache.steps.reserve(steps);
  cache.logps.reserve(steps);
  for (std::size_t j = 0; j < steps; ++j) {
    StepCache step = decode_step_cached(prev, state, cache.enc.out, p);
    std::size_t label = j < pair.target.size() ? pair.target[j] : vocab::kEosIndex;
    if (label >= p.config.target_vocab_size) {
      throw index_error("target index " + std::to_string(label) + " out of range (vocab " +
                        std::to_string(p.config.target_vocab_size) + ")");
    }
    step.label = label;
    cache.logps.push_back(log_probability(step, label));
    state = step.gru.h;
    prev = label;
    cache.steps.push_back(std::move(step));
  }
  return cache;
}

// Reverse of gru_step_cached. Accumulates weight gradients into g, returns
// gradient w.r.t. h_prev, adds the input gradient into dx.
inline DenseVector gru_backward(const GruCache& c, const GruWeights& w, const DenseVector& dh,
                                GruWeights& g, DenseVector& dx) {
  using namespace numerics;
  const std::size_t n = dh.size();
  DenseVector dz(n), dhbar(n), dh_prev(n);
  for (std::size_t i = 0; i < n; ++i) {
    dz[i] = dh[i] * (c.hbar[i] - c.h_prev[i]);
    dhbar[i] = dh[i] * c.z[i];
    dh_prev[i] = dh[i] * (1.0 - c.z[i]);
  }

  DenseVector dah(n);
  for (std::size_t i = 0; i < n; ++i) dah[i] = dhbar[i] * (1.0 - c.hbar[i] * c.hbar[i]);
  outer_acc(g.wh, dah, c.x);
  outer_acc(g.uh, dah, c.rh);
  for (std::size_t i = 0; i < n; ++i) g.bh[i] += dah[i];

  DenseVector drh(n);
  matvec_transposed_acc(w.uh, dah, drh);
  DenseVector dr(n);
  for (std::size_t i = 0; i < n; ++i) {
    dr[i] = drh[i] * c.h_prev[i];
    dh_prev[i] += drh[i] * c.r[i];
  }

  DenseVector daz(n), dar(n);
  for (std::size_t i = 0; i < n; ++i) {
    daz[i] = dz[i] * c.z[i] * (1.0 - c.z[i]);
    dar[i] = dr[i] * c.r[i] * (1.0 - c.r[i]);
  }
  outer_acc(g.wz, daz, c.x);
  outer_acc(g.uz, daz, c.h_prev);
  outer_acc(g.wr, dar, c.x);
  outer_acc(g.ur, dar, c.h_prev);
  for (std::size_t i = 0; i < n; ++i) {
    g.bz[i] += daz[i];
    g.br[i] += dar[i];
  }
  matvec_transposed_acc(w.uz, daz, dh_prev);
  matvec_transposed_acc(w.ur, dar, dh_prev);

  matvec_transposed_acc(w.wz, daz, dx);
  matvec_transposed_acc(w.wr, dar, dx);
  matvec_transposed_acc(w.wh, dah, dx);
  return dh_prev;
}

inline Gradients backward_cached(const ForwardCache& cache, const ModelParameters& p) {
  using namespace numerics;
  const std::size_t h = p.config.hidden_dim;
  const std::size_t d = p.config.embed_dim;
  const std::size_t ctx = p.config.context_dim();
  const std::size_t n = cache.enc.source.size();

  Gradients g = zero_gradients(p.config);

  std::vector<DenseVector> d_ann(n, DenseVector(2 * h));
  DenseVector d_summary(h);
  DenseVector ds_next(h);  // gradient flowing into the state output of step j

  for (std::size_t j = cache.steps.size(); j-- > 0;) {
    const StepCache& step = cache.steps[j];

    // output layer: d logits = p - onehot(label), for cost  -log p_label
    DenseVector dlogits = step.probs;
    dlogits[step.label] -= 1.0;

    DenseVector out_in(h + ctx + d);
    std::size_t o = 0;
    for (std::size_t i = 0; i < h; ++i) out_in[o++] = step.gru.h[i];
    for (std::size_t i = 0; i < ctx; ++i) out_in[o++] = step.context[i];
    for (std::size_t i = 0; i < d; ++i) out_in[o++] = step.e_prev[i];
    outer_acc(g.out_w, dlogits, out_in);
    for (std::size_t i = 0; i < dlogits.size(); ++i) g.out_b[i] += dlogits[i];

    DenseVector d_out_in(h + ctx + d);
    matvec_transposed_acc(p.out_w, dlogits, d_out_in);

    DenseVector ds(h), dc(ctx), de(d);
    o = 0;
    for (std::size_t i = 0; i < h; ++i) ds[i] = d_out_in[o++];
    for (std::size_t i = 0; i < ctx; ++i) dc[i] = d_out_in[o++];
    for (std::size_t i = 0; i < d; ++i) de[i] = d_out_in[o++];

    // state gradient: from the output layer plus everything downstream
    for (std::size_t i = 0; i < h; ++i) ds[i] += ds_next[i];

    DenseVector dx(d + ctx);
    DenseVector ds_prev = gru_backward(step.gru, p.decoder, ds, g.decoder, dx);
    for (std::size_t i = 0; i < d; ++i) de[i] += dx[i];
    for (std::size_t i = 0; i < ctx; ++i) dc[i] += dx[d + i];

    if (p.config.attention_enabled) {
      const AttentionCache& att = step.attn;
      // context = sum_t alpha_t ann_t
      DenseVector dalpha(n);
      for (std::size_t t = 0; t < n; ++t) {
        dalpha[t] = dot(dc, cache.enc.out.annotations[t]);
        axpy(att.alpha[t], dc, d_ann[t]);
      }
      // softmax backward
      double inner = dot(att.alpha, dalpha);
      DenseVector dscore(n);
      for (std::size_t t = 0; t < n; ++t) dscore[t] = att.alpha[t] * (dalpha[t] - inner);
      // score_t = v . u_t, u_t = tanh(W_a s_prev + U_a ann_t)
      DenseVector da_sum(h);
      for (std::size_t t = 0; t < n; ++t) {
        axpy(dscore[t], att.u[t], g.attn_score_v);
        DenseVector da(h);
        for (std::size_t i = 0; i < h; ++i) {
          da[i] = dscore[t] * p.attn_score_v[i] * (1.0 - att.u[t][i] * att.u[t][i]);
        }
        outer_acc(g.attn_annot_w, da, cache.enc.out.annotations[t]);
        matvec_transposed_acc(p.attn_annot_w, da, d_ann[t]);
        for (std::size_t i = 0; i < h; ++i) da_sum[i] += da[i];
      }
      outer_acc(g.attn_state_w, da_sum, step.gru.h_prev);
      ds_next = ds_prev;
      matvec_transposed_acc(p.attn_state_w, da_sum, ds_next);
    } else {
      // fixed context: gradient flows straight to the summary
      for (std::size_t i = 0; i < h; ++i) d_summary[i] += dc[i];
      ds_next = ds_prev;
    }

    // previous-token embedding: output layer slice plus the GRU input slice
    if (step.prev >= p.target_embedding.rows) {
      throw index_error("target embedding row out of range in backward");
    }
    double* row = g.target_embedding.row(step.prev);
    for (std::size_t i = 0; i < d; ++i) row[i] += de[i];
  }

  // s_0 = final summary
  for (std::size_t i = 0; i < h; ++i) d_summary[i] += ds_next[i];

  // summary = tanh(W_init annotations.back() + b_init)
  DenseVector da(h);
  for (std::size_t i = 0; i < h; ++i) {
    da[i] = d_summary[i] * (1.0 - cache.enc.summary[i] * cache.enc.summary[i]);
  }
  outer_acc(g.init_w, da, cache.enc.summary_input);
  for (std::size_t i = 0; i < h; ++i) g.init_b[i] += da[i];
  matvec_transposed_acc(p.init_w, da, d_ann[n - 1]);

  // encoder BPTT, forward direction then backward direction
  std::vector<DenseVector> d_emb(n, DenseVector(d));
  DenseVector carry(h);
  for (std::size_t t = n; t-- > 0;) {
    DenseVector dh(h);
    for (std::size_t i = 0; i < h; ++i) dh[i] = d_ann[t][i] + carry[i];
    carry = gru_backward(cache.enc.fwd[t], p.encoder_fwd, dh, g.encoder_fwd, d_emb[t]);
  }
  carry = DenseVector(h);
  for (std::size_t t = 0; t < n; ++t) {
    DenseVector dh(h);
    for (std::size_t i = 0; i < h; ++i) dh[i] = d_ann[t][h + i] + carry[i];
    carry = gru_backward(cache.enc.bwd[t], p.encoder_bwd, dh, g.encoder_bwd, d_emb[t]);
  }

  for (std::size_t t = 0; t < n; ++t) {
    double* row = g.source_embedding.row(cache.enc.source[t]);
    for (std::size_t i = 0; i < d; ++i) row[i] += d_emb[t][i];
  }
  return g;
}

}  // namespace detail

inline std::vector<double> forward(const EncodedPair& pair, const ModelParameters& p) {
  return detail::forward_cached(pair, p).logps;
}

struct ForwardBackwardResult {
  std::vector<double> logps;
  Gradients gradients;
};

// Gradients of sum_t -log p(y_t) over the framed target, exact via BPTT.
inline ForwardBackwardResult forward_backward(const EncodedPair& pair,
                                              const ModelParameters& p) {
  auto cache = detail::forward_cached(pair, p);
  Gradients g = detail::backward_cached(cache, p);
  return {std::move(cache.logps), std::move(g)};
}

inline Gradients backward(const EncodedPair& pair, const ModelParameters& p) {
  return forward_backward(pair, p).gradients;
}

}  // namespace seq2api::model
