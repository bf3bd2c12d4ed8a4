#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>
#include <vector>

#include "seq2api/errors.hpp"
#include "seq2api/model.hpp"
#include "seq2api/training.hpp"
#include "seq2api/vocab.hpp"

// Beam-search decoding. Hypotheses carry cumulative IDF-penalized cost;
// selection at each step is by cumulative cost, final ranking by average
// cost per emitted token. UNK is never emitted.

namespace seq2api::decode {

struct BeamHypothesis {
  std::vector<std::size_t> tokens;  // emitted after START; EOS kept when emitted
  std::vector<double> costs;        // one per token
  double cumulative = 0.0;
  numerics::DenseVector state;
  bool finished = false;
};

inline double average_cost(const BeamHypothesis& h) {
  if (h.tokens.empty()) throw value_error("average_cost: hypothesis has no tokens");
  return h.cumulative / static_cast<double>(h.tokens.size());
}

struct RankedTranslation {
  // rendered target tokens, EOS stripped; reserved tokens other than EOS stay
  // visible if an (untrained) model emits them
  std::vector<std::string> tokens;
  double average_cost = 0.0;
};

struct TranslationResult {
  std::vector<RankedTranslation> ranked;
};

namespace detail {

struct Candidate {
  double cumulative;
  std::size_t parent;
  std::size_t token;
  double cost;
};

inline std::vector<std::size_t> render_key(const BeamHypothesis& h) { return h.tokens; }

// finished-set order: average cost, then token sequence
inline bool finished_before(const BeamHypothesis& a, const BeamHypothesis& b) {
  double ca = average_cost(a);
  double cb = average_cost(b);
  if (ca != cb) return ca < cb;
  return a.tokens < b.tokens;
}

}  // namespace detail

inline std::vector<BeamHypothesis> beam_search(const model::ModelParameters& params,
                                               const vocab::Vocabulary& source_vocab,
                                               const vocab::Vocabulary& target_vocab,
                                               const vocab::IdfTable& idf,
                                               const std::vector<std::string>& query_tokens,
                                               std::size_t width, std::size_t max_len,
                                               double lambda) {
  if (width < 1) throw value_error("beam_search: width must be at least 1");
  if (max_len < 1) throw value_error("beam_search: max_len must be at least 1");
  if (query_tokens.empty()) throw value_error("beam_search: empty query");
  if (target_vocab.size() != params.config.target_vocab_size ||
      source_vocab.size() != params.config.source_vocab_size) {
    throw value_error("beam_search: vocabulary sizes do not match the model");
  }

  std::vector<std::size_t> framed = source_vocab.encode(query_tokens);
  framed.push_back(vocab::kEosIndex);
  model::EncoderOutput enc = model::encode(framed, params);
  const numerics::DenseVector weights = idf.dense_weights(target_vocab);
  const std::size_t vocab_size = params.config.target_vocab_size;

  std::vector<BeamHypothesis> live(1);
  live[0].state = enc.final_summary;
  std::vector<BeamHypothesis> finished;

  while (!live.empty() && finished.size() < width) {
    // one decoder step per live hypothesis, then fan out over the vocabulary
    std::vector<numerics::DenseVector> next_states(live.size());
    std::vector<detail::Candidate> candidates;
    candidates.reserve(live.size() * (vocab_size - 1));
    for (std::size_t i = 0; i < live.size(); ++i) {
      std::size_t prev = live[i].tokens.empty() ? vocab::kStartIndex : live[i].tokens.back();
      auto step = model::decode_step(prev, live[i].state, enc, params);
      next_states[i] = std::move(step.state);
      for (std::size_t v = 0; v < vocab_size; ++v) {
        if (v == vocab::kUnkIndex) continue;  // masked, never emitted
        double cost =
            training::token_cost(std::log(step.distribution.probabilities[v]), weights[v], lambda);
        candidates.push_back({live[i].cumulative + cost, i, v, cost});
      }
    }

    std::size_t keep = std::min(width, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + keep, candidates.end(),
                      [](const detail::Candidate& a, const detail::Candidate& b) {
                        return std::tie(a.cumulative, a.parent, a.token) <
                               std::tie(b.cumulative, b.parent, b.token);
                      });
    candidates.resize(keep);

    std::vector<BeamHypothesis> next_live;
    next_live.reserve(keep);
    for (const auto& c : candidates) {
      BeamHypothesis child = live[c.parent];
      child.state = next_states[c.parent];
      child.tokens.push_back(c.token);
      child.costs.push_back(c.cost);
      child.cumulative = c.cumulative;
      if (c.token == vocab::kEosIndex || child.tokens.size() >= max_len) {
        child.finished = true;
        finished.push_back(std::move(child));
      } else {
        next_live.push_back(std::move(child));
      }
    }
    live = std::move(next_live);
  }

  // the final round may overshoot the width; keep the best by ranking order
  std::sort(finished.begin(), finished.end(), detail::finished_before);
  if (finished.size() > width) finished.resize(width);
  return finished;
}

inline TranslationResult rank(const std::vector<BeamHypothesis>& hypotheses,
                              const vocab::Vocabulary& target_vocab) {
  std::vector<const BeamHypothesis*> order;
  order.reserve(hypotheses.size());
  for (const auto& h : hypotheses) order.push_back(&h);
  std::sort(order.begin(), order.end(), [](const BeamHypothesis* a, const BeamHypothesis* b) {
    return detail::finished_before(*a, *b);
  });

  TranslationResult result;
  result.ranked.reserve(order.size());
  for (const BeamHypothesis* h : order) {
    RankedTranslation item;
    item.average_cost = average_cost(*h);
    for (std::size_t idx : h->tokens) {
      if (idx == vocab::kEosIndex) break;
      item.tokens.push_back(target_vocab.token(idx));
    }
    result.ranked.push_back(std::move(item));
  }
  return result;
}

}  // namespace seq2api::decode
