#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "seq2api/decode.hpp"

using namespace seq2api;
using namespace seq2api::decode;

namespace {

struct TinySetup {
  vocab::Vocabulary src;
  vocab::Vocabulary tgt;
  vocab::IdfTable idf;
  model::ModelParameters params;
};

// target vocab of 8: four specials plus four Class.member tokens with
// distinct document frequencies
TinySetup make_tiny(std::uint64_t seed, bool attention = true) {
  std::vector<std::vector<std::string>> queries = {
      {"read", "file"}, {"write", "file"}, {"open", "port"}};
  std::vector<std::vector<std::string>> apis = {
      {"A.a", "B.b"}, {"A.a", "C.c"}, {"A.a", "D.d", "B.b"}};
  TinySetup s{vocab::build_vocabulary(queries, 100), vocab::build_vocabulary(apis, 100),
              vocab::compute_idf(apis), {}};
  REQUIRE(s.tgt.size() == 8);
  model::ModelConfig cfg;
  cfg.source_vocab_size = s.src.size();
  cfg.target_vocab_size = s.tgt.size();
  cfg.embed_dim = 4;
  cfg.hidden_dim = 8;
  cfg.attention_enabled = attention;
  cfg.seed = seed;
  s.params = model::init_parameters(cfg);
  return s;
}

// teacher-forced cost of a fully specified token sequence under the same
// scoring rule the beam uses
double sequence_cost(const TinySetup& s, const std::vector<std::string>& query,
                     const std::vector<std::size_t>& tokens, double lambda) {
  std::vector<std::size_t> framed = s.src.encode(query);
  framed.push_back(vocab::kEosIndex);
  model::EncoderOutput enc = model::encode(framed, s.params);
  auto weights = s.idf.dense_weights(s.tgt);
  numerics::DenseVector state = enc.final_summary;
  std::size_t prev = vocab::kStartIndex;
  double cum = 0.0;
  for (std::size_t tok : tokens) {
    auto step = model::decode_step(prev, state, enc, s.params);
    cum += training::token_cost(std::log(step.distribution.probabilities[tok]),
                                weights[tok], lambda);
    state = step.state;
    prev = tok;
  }
  return cum;
}

// every finished sequence over the vocabulary (EOS only terminal, UNK never)
// up to max_len tokens
void enumerate_sequences(std::size_t vocab_size, std::size_t max_len,
                         std::vector<std::size_t>& prefix,
                         std::vector<std::vector<std::size_t>>& out) {
  for (std::size_t v = 0; v < vocab_size; ++v) {
    if (v == vocab::kUnkIndex) continue;
    prefix.push_back(v);
    if (v == vocab::kEosIndex || prefix.size() == max_len) {
      out.push_back(prefix);
    } else {
      enumerate_sequences(vocab_size, max_len, prefix, out);
    }
    prefix.pop_back();
  }
}

}  // namespace

TEST_CASE("beam search validates its inputs") {
  TinySetup s = make_tiny(1);
  std::vector<std::string> query{"read", "file"};
  CHECK_THROWS_AS(beam_search(s.params, s.src, s.tgt, s.idf, query, 0, 5, 0.0), value_error);
  CHECK_THROWS_AS(beam_search(s.params, s.src, s.tgt, s.idf, query, 3, 0, 0.0), value_error);
  CHECK_THROWS_AS(beam_search(s.params, s.src, s.tgt, s.idf, {}, 3, 5, 0.0), value_error);
}

TEST_CASE("every returned hypothesis is finished") {
  TinySetup s = make_tiny(2);
  auto hyps = beam_search(s.params, s.src, s.tgt, s.idf, {"read", "file"}, 5, 4, 0.035);
  REQUIRE(!hyps.empty());
  CHECK(hyps.size() <= 5);
  for (const auto& h : hyps) {
    CHECK(h.finished);
    bool ends_eos = h.tokens.back() == vocab::kEosIndex;
    CHECK((ends_eos || h.tokens.size() == 4));
    // cumulative equals the sum of per-token costs
    double sum = 0.0;
    for (double c : h.costs) sum += c;
    CHECK(std::abs(sum - h.cumulative) < 1e-12);
    // UNK is never emitted
    for (std::size_t t : h.tokens) CHECK(t != vocab::kUnkIndex);
  }
}

TEST_CASE("UNK stays masked even when the model favors it") {
  TinySetup s = make_tiny(3);
  s.params.out_b[vocab::kUnkIndex] = 25.0;  // make UNK overwhelmingly likely
  auto hyps = beam_search(s.params, s.src, s.tgt, s.idf, {"read"}, 4, 3, 0.0);
  REQUIRE(!hyps.empty());
  for (const auto& h : hyps) {
    for (std::size_t t : h.tokens) CHECK(t != vocab::kUnkIndex);
  }
}

TEST_CASE("width one equals greedy decoding") {
  for (std::uint64_t seed : {4u, 5u, 6u}) {
    TinySetup s = make_tiny(seed);
    std::vector<std::string> query{"read", "file"};
    auto hyps = beam_search(s.params, s.src, s.tgt, s.idf, query, 1, 4, 0.035);
    REQUIRE(hyps.size() == 1);

    // greedy reference: argmin token cost at each step
    std::vector<std::size_t> framed = s.src.encode(query);
    framed.push_back(vocab::kEosIndex);
    auto enc = model::encode(framed, s.params);
    auto weights = s.idf.dense_weights(s.tgt);
    numerics::DenseVector state = enc.final_summary;
    std::size_t prev = vocab::kStartIndex;
    std::vector<std::size_t> greedy;
    for (std::size_t step_i = 0; step_i < 4; ++step_i) {
      auto step = model::decode_step(prev, state, enc, s.params);
      std::size_t best = 0;
      double best_cost = 0.0;
      bool first = true;
      for (std::size_t v = 0; v < s.tgt.size(); ++v) {
        if (v == vocab::kUnkIndex) continue;
        double c = training::token_cost(std::log(step.distribution.probabilities[v]),
                                        weights[v], 0.035);
        if (first || c < best_cost) {
          best = v;
          best_cost = c;
          first = false;
        }
      }
      greedy.push_back(best);
      if (best == vocab::kEosIndex) break;
      state = step.state;
      prev = best;
    }
    CHECK(hyps[0].tokens == greedy);
  }
}

TEST_CASE("beam equals exhaustive enumeration on a tiny model") {
  for (bool attention : {true, false}) {
    for (double lambda : {0.0, 0.035}) {
      TinySetup s = make_tiny(7, attention);
      std::vector<std::string> query{"write", "file"};

      std::vector<std::vector<std::size_t>> all;
      std::vector<std::size_t> prefix;
      enumerate_sequences(s.tgt.size(), 4, prefix, all);
      CHECK(all.size() == 1555);  // sum over lengths of 6^k EOS-terminated plus 6^4

      std::vector<std::size_t> best_seq;
      double best_avg = 0.0;
      bool first = true;
      for (const auto& seq : all) {
        double avg = sequence_cost(s, query, seq, lambda) / seq.size();
        if (first || avg < best_avg || (avg == best_avg && seq < best_seq)) {
          best_seq = seq;
          best_avg = avg;
          first = false;
        }
      }

      auto hyps = beam_search(s.params, s.src, s.tgt, s.idf, query, 1555, 4, lambda);
      REQUIRE(!hyps.empty());
      INFO("attention=" << attention << " lambda=" << lambda);
      CHECK(hyps[0].tokens == best_seq);
      CHECK(std::abs(average_cost(hyps[0]) - best_avg) < 1e-9);
    }
  }
}

TEST_CASE("best cost never rises as the beam widens") {
  TinySetup s = make_tiny(8);
  std::vector<std::string> query{"open", "port"};
  double prev_best = 0.0;
  bool first = true;
  for (std::size_t width : {1u, 2u, 3u, 5u, 8u, 20u, 100u}) {
    auto hyps = beam_search(s.params, s.src, s.tgt, s.idf, query, width, 4, 0.035);
    REQUIRE(!hyps.empty());
    double best = average_cost(hyps[0]);
    if (!first) CHECK(best <= prev_best + 1e-12);
    prev_best = best;
    first = false;
  }
}

TEST_CASE("beam search is deterministic") {
  TinySetup s = make_tiny(9);
  auto a = beam_search(s.params, s.src, s.tgt, s.idf, {"read"}, 5, 4, 0.035);
  auto b = beam_search(s.params, s.src, s.tgt, s.idf, {"read"}, 5, 4, 0.035);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].tokens == b[i].tokens);
    CHECK(a[i].cumulative == b[i].cumulative);
  }
}

TEST_CASE("out-of-vocabulary query words fall back to UNK encoding") {
  TinySetup s = make_tiny(10);
  auto hyps = beam_search(s.params, s.src, s.tgt, s.idf, {"zzz", "qqq"}, 2, 3, 0.0);
  CHECK(!hyps.empty());
}

TEST_CASE("rank orders by average cost with lexicographic ties") {
  vocab::Vocabulary tgt = vocab::build_vocabulary({{"A.a", "B.b", "C.c"}}, 10);

  BeamHypothesis slow;  // cost 6 over 3 tokens
  slow.tokens = {tgt.lookup("B.b"), tgt.lookup("C.c"), vocab::kEosIndex};
  slow.costs = {2.0, 2.0, 2.0};
  slow.cumulative = 6.0;
  slow.finished = true;

  BeamHypothesis fast;  // cost 4 over 1 token
  fast.tokens = {vocab::kEosIndex};
  fast.costs = {4.0};
  fast.cumulative = 4.0;
  fast.finished = true;

  TranslationResult r = rank({fast, slow}, tgt);
  REQUIRE(r.ranked.size() == 2);
  CHECK(r.ranked[0].average_cost == 2.0);
  CHECK(r.ranked[0].tokens == std::vector<std::string>{"B.b", "C.c"});
  CHECK(r.ranked[1].average_cost == 4.0);
  CHECK(r.ranked[1].tokens.empty());  // EOS-only renders as empty

  // tie on average cost: lexicographic token order decides
  BeamHypothesis tie_a;
  tie_a.tokens = {tgt.lookup("A.a"), vocab::kEosIndex};
  tie_a.costs = {1.0, 1.0};
  tie_a.cumulative = 2.0;
  tie_a.finished = true;
  BeamHypothesis tie_b;
  tie_b.tokens = {tgt.lookup("B.b"), vocab::kEosIndex};
  tie_b.costs = {1.0, 1.0};
  tie_b.cumulative = 2.0;
  tie_b.finished = true;
  TranslationResult t = rank({tie_b, tie_a}, tgt);
  REQUIRE(t.ranked.size() == 2);
  CHECK(t.ranked[0].tokens == std::vector<std::string>{"A.a"});

  TranslationResult single = rank({slow}, tgt);
  CHECK(single.ranked.size() == 1);
}
