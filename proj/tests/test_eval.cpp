#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "seq2api/eval.hpp"

using namespace seq2api;
using namespace seq2api::eval;

namespace {

std::vector<std::string> toks(std::initializer_list<const char*> xs) {
  return std::vector<std::string>(xs.begin(), xs.end());
}

struct TinySetup {
  vocab::Vocabulary src;
  vocab::Vocabulary tgt;
  vocab::IdfTable idf;
  model::ModelParameters params;
  std::vector<corpus::AnnotatedPair> pairs;
};

TinySetup make_tiny(std::uint64_t seed) {
  std::vector<std::vector<std::string>> queries = {
      {"read", "file"}, {"write", "file"}, {"open", "port"}};
  std::vector<std::vector<std::string>> apis = {
      {"A.a", "B.b"}, {"A.a", "C.c"}, {"A.a", "D.d", "B.b"}};
  TinySetup s{vocab::build_vocabulary(queries, 100), vocab::build_vocabulary(apis, 100),
              vocab::compute_idf(apis), {}, {}};
  model::ModelConfig cfg;
  cfg.source_vocab_size = s.src.size();
  cfg.target_vocab_size = s.tgt.size();
  cfg.embed_dim = 4;
  cfg.hidden_dim = 8;
  cfg.seed = seed;
  s.params = model::init_parameters(cfg);
  corpus::AnnotatedPair p1;
  p1.annotation = "read file";
  p1.sequence.calls = {{"A", "a"}, {"B", "b"}};
  corpus::AnnotatedPair p2;
  p2.annotation = "open port";
  p2.sequence.calls = {{"A", "a"}, {"D", "d"}, {"B", "b"}};
  s.pairs = {p1, p2};
  return s;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("ngram precision on the worked example") {
  auto cand = toks({"a", "c", "d", "b"});
  auto ref = toks({"a", "b", "c", "d", "e"});
  CHECK(ngram_precision(cand, ref, 1) == Catch::Approx(1.0));
  CHECK(ngram_precision(cand, ref, 2) == Catch::Approx(0.5));
  CHECK(ngram_precision(cand, ref, 3) == Catch::Approx(1.0 / 3.0));
  CHECK(ngram_precision(cand, ref, 4) == Catch::Approx(0.5));
}

TEST_CASE("ngram precision clips repeated candidate grams") {
  // reference has one "a"; candidate repeats it three times
  auto cand = toks({"a", "a", "a"});
  auto ref = toks({"a", "b", "c"});
  CHECK(ngram_precision(cand, ref, 1) == Catch::Approx(2.0 / 4.0));
  // two "a" in the reference allows two matches
  auto ref2 = toks({"a", "a", "c"});
  CHECK(ngram_precision(cand, ref2, 1) == Catch::Approx(3.0 / 4.0));
}

TEST_CASE("ngram precision smoothing keeps short candidates finite") {
  auto cand = toks({"a", "b"});
  auto ref = toks({"a", "b", "c"});
  // no 3-grams at all: (0 + 1) / (0 + 1)
  CHECK(ngram_precision(cand, ref, 3) == Catch::Approx(1.0));
  CHECK(ngram_precision(cand, ref, 4) == Catch::Approx(1.0));
  CHECK_THROWS_AS(ngram_precision(cand, ref, 0), value_error);
}

TEST_CASE("unigram precision ignores order, bigram does not") {
  auto ref = toks({"a", "b", "c", "d"});
  auto fwd = toks({"a", "b", "c", "d"});
  auto rev = toks({"d", "c", "b", "a"});
  CHECK(ngram_precision(fwd, ref, 1) == Catch::Approx(ngram_precision(rev, ref, 1)));
  CHECK(ngram_precision(fwd, ref, 2) > ngram_precision(rev, ref, 2));
}

TEST_CASE("brevity penalty") {
  CHECK(brevity_penalty(4, 5) == Catch::Approx(std::exp(-0.25)));
  CHECK(brevity_penalty(5, 5) == Catch::Approx(1.0));
  CHECK(brevity_penalty(9, 5) == Catch::Approx(1.0));
  CHECK(brevity_penalty(1, 4) == Catch::Approx(std::exp(-3.0)));
  CHECK_THROWS_AS(brevity_penalty(0, 5), value_error);
  CHECK_THROWS_AS(brevity_penalty(5, 0), value_error);
}

TEST_CASE("bleu reproduces the worked example") {
  auto report = bleu(toks({"a", "c", "d", "b"}), toks({"a", "b", "c", "d", "e"}));
  CHECK(report.precisions[0] == Catch::Approx(1.0));
  CHECK(report.precisions[1] == Catch::Approx(0.5));
  CHECK(report.precisions[2] == Catch::Approx(1.0 / 3.0));
  CHECK(report.precisions[3] == Catch::Approx(0.5));
  CHECK(report.brevity == Catch::Approx(std::exp(-0.25)));
  CHECK(report.candidate_length == 4);
  CHECK(report.reference_length == 5);
  CHECK(report.score == Catch::Approx(41.84).margin(0.05));
}

TEST_CASE("bleu of a sequence against itself is 100") {
  CHECK(bleu(toks({"x", "y", "z", "w", "v"}), toks({"x", "y", "z", "w", "v"})).score ==
        Catch::Approx(100.0));
  // shorter than 4 tokens: higher-order precisions smooth to 1
  CHECK(bleu(toks({"x", "y"}), toks({"x", "y"})).score == Catch::Approx(100.0));
  CHECK(bleu(toks({"x"}), toks({"x"})).score == Catch::Approx(100.0));
}

TEST_CASE("bleu rejects empty inputs and stays in range") {
  CHECK_THROWS_AS(bleu({}, toks({"a"})), value_error);
  CHECK_THROWS_AS(bleu(toks({"a"}), {}), value_error);
  auto report = bleu(toks({"q", "r"}), toks({"a", "b", "c", "d"}));
  CHECK(report.score > 0.0);
  CHECK(report.score < 100.0);
}

TEST_CASE("bleu is case sensitive") {
  CHECK(bleu(toks({"File.read"}), toks({"file.read"})).score < 100.0);
  CHECK(bleu(toks({"File.read"}), toks({"File.read"})).score == Catch::Approx(100.0));
}

TEST_CASE("testset evaluation is monotone in top-n and consistent across overloads") {
  TinySetup s = make_tiny(11);
  auto reports = evaluate_testset_multi(s.params, s.src, s.tgt, s.idf, s.pairs, {1, 5, 10},
                                        10, 0.035, 6);
  REQUIRE(reports.size() == 3);
  CHECK(reports[0].top_n == 1);
  CHECK(reports[0].per_pair.size() == 2);
  CHECK(reports[0].mean <= reports[1].mean + 1e-12);
  CHECK(reports[1].mean <= reports[2].mean + 1e-12);
  for (const auto& report : reports) {
    for (const auto& pe : report.per_pair) {
      CHECK(pe.best_rank >= 1);
      CHECK(pe.best_rank <= report.top_n);
      CHECK(pe.best_bleu >= 0.0);
      CHECK(pe.best_bleu <= 100.0);
    }
  }
  auto single = evaluate_testset(s.params, s.src, s.tgt, s.idf, s.pairs, 5, 10, 0.035, 6);
  REQUIRE(single.per_pair.size() == reports[1].per_pair.size());
  CHECK(single.mean == reports[1].mean);
  for (std::size_t i = 0; i < single.per_pair.size(); ++i) {
    CHECK(single.per_pair[i].best_bleu == reports[1].per_pair[i].best_bleu);
    CHECK(single.per_pair[i].best_rank == reports[1].per_pair[i].best_rank);
  }
}

TEST_CASE("testset evaluation mean is the average of per-pair bests") {
  TinySetup s = make_tiny(7);
  auto report = evaluate_testset(s.params, s.src, s.tgt, s.idf, s.pairs, 3, 5, 0.0, 6);
  double sum = 0.0;
  for (const auto& pe : report.per_pair) sum += pe.best_bleu;
  CHECK(report.mean == Catch::Approx(sum / report.per_pair.size()));
}

TEST_CASE("testset evaluation input validation") {
  TinySetup s = make_tiny(3);
  CHECK_THROWS_AS(evaluate_testset(s.params, s.src, s.tgt, s.idf, {}, 1, 5, 0.0), value_error);
  CHECK_THROWS_AS(evaluate_testset(s.params, s.src, s.tgt, s.idf, s.pairs, 0, 5, 0.0),
                  value_error);
  CHECK_THROWS_AS(evaluate_testset(s.params, s.src, s.tgt, s.idf, s.pairs, 6, 5, 0.0),
                  value_error);
  CHECK_THROWS_AS(evaluate_testset_multi(s.params, s.src, s.tgt, s.idf, s.pairs, {}, 5, 0.0),
                  value_error);
}

TEST_CASE("report rendering") {
  TestsetReport report;
  report.top_n = 5;
  report.per_pair = {{0, 41.8437, 2}, {1, 100.0, 1}};
  report.mean = 70.92185;
  std::ostringstream out;
  write_report(report, out);
  CHECK(out.str() == "0\t41.8437\t2\n1\t100.0000\t1\nMEAN\t70.9219\n");
}

TEST_CASE("frank finds the first relevant rank") {
  CHECK(frank({true, false, false}) == 1);
  CHECK(frank({false, false, true, false}) == 3);
  CHECK_FALSE(frank({false, false}).has_value());
  CHECK_FALSE(frank({}).has_value());
}

TEST_CASE("relevancy ratio") {
  RelevanceLabels labels = {true, false, true, false};
  CHECK(relevancy_ratio(labels, 1) == Catch::Approx(100.0));
  CHECK(relevancy_ratio(labels, 2) == Catch::Approx(50.0));
  CHECK(relevancy_ratio(labels, 4) == Catch::Approx(50.0));
  CHECK_THROWS_AS(relevancy_ratio(labels, 0), value_error);
  CHECK_THROWS_AS(relevancy_ratio(labels, 5), value_error);
}

TEST_CASE("relevance label files parse and validate") {
  auto path = temp_file("seq2api_eval_labels.csv");
  {
    std::ofstream out(path);
    out << "1,0,1\n0,0\n\n1\n";
  }
  auto rows = read_relevance_labels(path.string());
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == RelevanceLabels{true, false, true});
  CHECK(rows[1] == RelevanceLabels{false, false});
  CHECK(rows[2] == RelevanceLabels{true});

  {
    std::ofstream out(path);
    out << "1,2,0\n";
  }
  CHECK_THROWS_AS(read_relevance_labels(path.string()), format_error);
  {
    std::ofstream out(path);
    out << "1,,0\n";
  }
  CHECK_THROWS_AS(read_relevance_labels(path.string()), format_error);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_relevance_labels(path.string()), io_error);
}
