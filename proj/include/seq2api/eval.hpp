#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "seq2api/corpus.hpp"
#include "seq2api/decode.hpp"
#include "seq2api/errors.hpp"

// Evaluation: smoothed 4-gram BLEU with brevity penalty, best-of-top-n
// test-set scoring, and the bookkeeping metrics for human relevance labels
// (FRank, relevancy ratio).

namespace seq2api::eval {

struct BleuReport {
  double precisions[4] = {0, 0, 0, 0};  // p_1..p_4
  double brevity = 0.0;
  double score = 0.0;  // percentage in (0, 100]
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;
};

// (matched + 1) / (candidate n-grams + 1), clipped multiset matching
inline double ngram_precision(const std::vector<std::string>& candidate,
                              const std::vector<std::string>& reference, std::size_t n) {
  if (n < 1) throw value_error("ngram_precision: n must be at least 1");
  std::map<std::vector<std::string>, std::size_t> ref_counts;
  if (reference.size() >= n) {
    for (std::size_t i = 0; i + n <= reference.size(); ++i) {
      std::vector<std::string> gram(reference.begin() + i, reference.begin() + i + n);
      ++ref_counts[std::move(gram)];
    }
  }
  std::size_t total = candidate.size() >= n ? candidate.size() - n + 1 : 0;
  std::size_t matched = 0;
  for (std::size_t i = 0; i + n <= candidate.size(); ++i) {
    std::vector<std::string> gram(candidate.begin() + i, candidate.begin() + i + n);
    auto it = ref_counts.find(gram);
    if (it != ref_counts.end() && it->second > 0) {
      --it->second;
      ++matched;
    }
  }
  return static_cast<double>(matched + 1) / static_cast<double>(total + 1);
}

inline double brevity_penalty(std::size_t candidate_length, std::size_t reference_length) {
  if (candidate_length == 0) throw value_error("brevity_penalty: empty candidate");
  if (reference_length == 0) throw value_error("brevity_penalty: empty reference");
  if (candidate_length > reference_length) return 1.0;
  return std::exp(1.0 - static_cast<double>(reference_length) /
                            static_cast<double>(candidate_length));
}

inline BleuReport bleu(const std::vector<std::string>& candidate,
                       const std::vector<std::string>& reference) {
  if (candidate.empty()) throw value_error("bleu: empty candidate");
  if (reference.empty()) throw value_error("bleu: empty reference");
  BleuReport report;
  report.candidate_length = candidate.size();
  report.reference_length = reference.size();
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    double p = ngram_precision(candidate, reference, n);
    report.precisions[n - 1] = p;
    log_sum += 0.25 * std::log(p);
  }
  report.brevity = brevity_penalty(candidate.size(), reference.size());
  report.score = report.brevity * std::exp(log_sum) * 100.0;
  return report;
}

// -------------------------------------------------------------------------
// Test-set evaluation

struct PairEvaluation {
  std::size_t pair_id = 0;  // position in the test set, 0-based
  double best_bleu = 0.0;
  std::size_t best_rank = 0;  // 1-based rank of the best-scoring hypothesis
};

struct TestsetReport {
  std::size_t top_n = 0;
  std::vector<PairEvaluation> per_pair;
  double mean = 0.0;
};

// Decodes each pair once and scores best-of-top-n for every requested n.
// An empty hypothesis (EOS first) scores 0 rather than erroring.
inline std::vector<TestsetReport> evaluate_testset_multi(
    const model::ModelParameters& params, const vocab::Vocabulary& source_vocab,
    const vocab::Vocabulary& target_vocab, const vocab::IdfTable& idf,
    const std::vector<corpus::AnnotatedPair>& tests, const std::vector<std::size_t>& top_ns,
    std::size_t width, double lambda, std::size_t max_len = 30) {
  if (tests.empty()) throw value_error("evaluate_testset: empty test set");
  if (top_ns.empty()) throw value_error("evaluate_testset: no top-n values requested");
  for (std::size_t n : top_ns) {
    if (n < 1) throw value_error("evaluate_testset: top-n must be at least 1");
    if (n > width) throw value_error("evaluate_testset: top-n exceeds the beam width");
  }

  std::vector<TestsetReport> reports(top_ns.size());
  for (std::size_t r = 0; r < top_ns.size(); ++r) reports[r].top_n = top_ns[r];

  for (std::size_t id = 0; id < tests.size(); ++id) {
    auto query = vocab::tokenize_annotation(tests[id].annotation);
    auto hyps = decode::beam_search(params, source_vocab, target_vocab, idf, query, width,
                                    max_len, lambda);
    decode::TranslationResult ranked = decode::rank(hyps, target_vocab);
    std::vector<std::string> reference = tests[id].sequence.render_tokens();

    std::vector<double> scores;
    scores.reserve(ranked.ranked.size());
    for (const auto& item : ranked.ranked) {
      scores.push_back(item.tokens.empty() ? 0.0 : bleu(item.tokens, reference).score);
    }

    for (std::size_t r = 0; r < top_ns.size(); ++r) {
      PairEvaluation pe;
      pe.pair_id = id;
      std::size_t limit = std::min(top_ns[r], scores.size());
      for (std::size_t k = 0; k < limit; ++k) {
        if (k == 0 || scores[k] > pe.best_bleu) {
          pe.best_bleu = scores[k];
          pe.best_rank = k + 1;
        }
      }
      if (limit == 0) {  // decoder returned nothing usable
        pe.best_bleu = 0.0;
        pe.best_rank = 1;
      }
      reports[r].per_pair.push_back(pe);
    }
  }

  for (auto& report : reports) {
    double sum = 0.0;
    for (const auto& pe : report.per_pair) sum += pe.best_bleu;
    report.mean = sum / static_cast<double>(report.per_pair.size());
  }
  return reports;
}

inline TestsetReport evaluate_testset(const model::ModelParameters& params,
                                      const vocab::Vocabulary& source_vocab,
                                      const vocab::Vocabulary& target_vocab,
                                      const vocab::IdfTable& idf,
                                      const std::vector<corpus::AnnotatedPair>& tests,
                                      std::size_t top_n, std::size_t width, double lambda,
                                      std::size_t max_len = 30) {
  return evaluate_testset_multi(params, source_vocab, target_vocab, idf, tests, {top_n}, width,
                                lambda, max_len)[0];
}

inline void write_report(const TestsetReport& report, std::ostream& out) {
  char buf[64];
  for (const auto& pe : report.per_pair) {
    std::snprintf(buf, sizeof(buf), "%.4f", pe.best_bleu);
    out << pe.pair_id << '\t' << buf << '\t' << pe.best_rank << '\n';
  }
  std::snprintf(buf, sizeof(buf), "%.4f", report.mean);
  out << "MEAN\t" << buf << '\n';
}

// -------------------------------------------------------------------------
// Human-evaluation bookkeeping

using RelevanceLabels = std::vector<bool>;

inline std::optional<std::size_t> frank(const RelevanceLabels& labels) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i]) return i + 1;
  }
  return std::nullopt;
}

inline double relevancy_ratio(const RelevanceLabels& labels, std::size_t k) {
  if (k < 1 || k > labels.size()) {
    throw value_error("relevancy_ratio: k must lie in [1, " + std::to_string(labels.size()) +
                      "], got " + std::to_string(k));
  }
  std::size_t relevant = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (labels[i]) ++relevant;
  }
  return 100.0 * static_cast<double>(relevant) / static_cast<double>(k);
}

// Label file: one line per query, comma-separated 0/1 in rank order.
inline std::vector<RelevanceLabels> read_relevance_labels(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot read relevance labels: " + path);
  std::vector<RelevanceLabels> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    RelevanceLabels labels;
    std::string cell;
    auto flush = [&]() {
      if (cell == "0") {
        labels.push_back(false);
      } else if (cell == "1") {
        labels.push_back(true);
      } else {
        throw format_error(path + ":" + std::to_string(line_no) + ": expected 0 or 1, got '" +
                           cell + "'");
      }
      cell.clear();
    };
    for (char c : line) {
      if (c == ',') {
        flush();
      } else {
        cell.push_back(c);
      }
    }
    flush();
    out.push_back(std::move(labels));
  }
  return out;
}

}  // namespace seq2api::eval
