#pragma once

#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "seq2api/corpus.hpp"
#include "seq2api/errors.hpp"

// Deterministic desk-scale corpus generator. Each query is a sequence of
// distinct words drawn from a fixed pool, and its target is the pointwise
// image under a fixed word-to-API map, so the query/target relation is a
// known function and permuted queries get permuted targets. A small contrast
// set (the int-to-string / string-to-int pair) is always injected verbatim.

namespace seq2api::synthetic {

inline std::vector<corpus::AnnotatedPair> default_contrast_pairs() {
  corpus::AnnotatedPair to_string;
  to_string.annotation = "convert int to string";
  to_string.sequence.calls = {{"Integer", "toString"}};
  corpus::AnnotatedPair to_int;
  to_int.annotation = "convert string to int";
  to_int.sequence.calls = {{"Integer", "parseInt"}};
  return {to_string, to_int};
}

struct SyntheticSpec {
  std::uint64_t seed = 0;
  std::size_t pair_count = 50;
  std::size_t min_query_len = 2;
  std::size_t max_query_len = 6;
  std::size_t min_api_len = 2;
  std::size_t max_api_len = 6;
  std::size_t query_vocab = 24;  // word pool size
  std::size_t api_vocab = 24;    // API pool size, >= query_vocab
  std::vector<corpus::AnnotatedPair> contrast_pairs = default_contrast_pairs();

  void validate() const {
    if (pair_count < contrast_pairs.size()) {
      throw value_error("synthetic: pair_count smaller than the contrast set");
    }
    if (min_query_len < 1 || min_query_len > max_query_len) {
      throw value_error("synthetic: bad query length range");
    }
    if (min_api_len < 1 || min_api_len > max_api_len) {
      throw value_error("synthetic: bad API length range");
    }
    if (query_vocab < max_query_len) {
      throw value_error("synthetic: word pool smaller than the longest query");
    }
    if (api_vocab < query_vocab) {
      throw value_error("synthetic: API pool smaller than the word pool");
    }
  }
};

namespace detail {

// none of these collide with the contrast-query words
inline const char* kWordPool[] = {
    "read",   "write",   "open",   "close",  "load",     "save",   "copy",   "move",
    "create", "delete",  "append", "find",   "list",     "sort",   "merge",  "split",
    "send",   "receive", "encode", "decode", "compress", "extract", "update", "render",
};

inline const corpus::ApiCall kApiPool[] = {
    {"FileReader", "read"},  {"FileWriter", "write"}, {"Stream", "open"},
    {"Stream", "close"},     {"Loader", "load"},      {"Saver", "save"},
    {"Files", "copy"},       {"Files", "move"},       {"Files", "create"},
    {"Files", "delete"},     {"Writer", "append"},    {"Finder", "find"},
    {"Dir", "list"},         {"Arrays", "sort"},      {"Merger", "merge"},
    {"Splitter", "split"},   {"Socket", "send"},      {"Socket", "receive"},
    {"Encoder", "encode"},   {"Decoder", "decode"},   {"Zip", "compress"},
    {"Zip", "extract"},      {"Record", "update"},    {"View", "render"},
};

constexpr std::size_t kBuiltinPool = sizeof(kWordPool) / sizeof(kWordPool[0]);

inline std::string pool_word(std::size_t i) {
  if (i < kBuiltinPool) return kWordPool[i];
  return "word" + std::to_string(i);
}

inline corpus::ApiCall pool_api(std::size_t i) {
  if (i < kBuiltinPool) return kApiPool[i];
  return {"Class" + std::to_string(i), "call" + std::to_string(i)};
}

}  // namespace detail

inline std::vector<corpus::AnnotatedPair> generate(const SyntheticSpec& spec) {
  spec.validate();
  std::vector<corpus::AnnotatedPair> pairs = spec.contrast_pairs;
  pairs.reserve(spec.pair_count);

  std::mt19937_64 rng(spec.seed);
  std::set<std::vector<std::size_t>> seen;
  std::vector<std::size_t> indices(spec.query_vocab);
  for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;

  while (pairs.size() < spec.pair_count) {
    std::vector<std::size_t> words;
    bool fresh = false;
    for (std::size_t attempt = 0; attempt < 1000 && !fresh; ++attempt) {
      std::size_t len =
          spec.min_query_len + rng() % (spec.max_query_len - spec.min_query_len + 1);
      std::vector<std::size_t> pool = indices;
      words.assign(len, 0);
      for (std::size_t j = 0; j < len; ++j) {
        std::size_t pick = j + rng() % (pool.size() - j);
        std::swap(pool[j], pool[pick]);
        words[j] = pool[j];
      }
      fresh = seen.insert(words).second;
    }
    if (!fresh) {
      throw value_error("synthetic: cannot draw " + std::to_string(spec.pair_count) +
                        " unique queries from this pool");
    }

    corpus::AnnotatedPair pair;
    for (std::size_t j = 0; j < words.size(); ++j) {
      if (j > 0) pair.annotation.push_back(' ');
      pair.annotation += detail::pool_word(words[j]);
    }
    std::size_t target_len =
        std::clamp(words.size(), spec.min_api_len, spec.max_api_len);
    for (std::size_t j = 0; j < target_len; ++j) {
      if (j < words.size()) {
        pair.sequence.calls.push_back(detail::pool_api(words[j]));
      } else {
        pair.sequence.calls.push_back(detail::pool_api(rng() % spec.api_vocab));
      }
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

}  // namespace seq2api::synthetic
