#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "seq2api/corpus.hpp"

using namespace seq2api;
using namespace seq2api::corpus;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

// Parses a single class and returns its method units.
std::vector<MethodUnit> parse_class_body(const std::string& members) {
  return parse_source("class Fixture {\n" + members + "\n}\n");
}

std::vector<std::string> sequence_tokens(const MethodUnit& m) {
  return extract_sequence(m).render_tokens();
}

}  // namespace

TEST_CASE("constructor produces C.new") {
  auto units = parse_class_body("void open() { FileWriter w = new FileWriter(); }");
  REQUIRE(units.size() == 1);
  CHECK(sequence_tokens(units[0]) == std::vector<std::string>{"FileWriter.new"});
}

TEST_CASE("instance call on a declared variable produces C.m") {
  auto units = parse_class_body("void go(Reader r) { r.read(); }");
  REQUIRE(units.size() == 1);
  CHECK(sequence_tokens(units[0]) == std::vector<std::string>{"Reader.read"});
}

TEST_CASE("argument-position calls precede the enclosing call") {
  auto units = parse_class_body(
      "void go(C1 o1, C2 o2, C3 o3) { o1.m1(o2.m2(), o3.m3()); }");
  REQUIRE(units.size() == 1);
  CHECK(sequence_tokens(units[0]) ==
        std::vector<std::string>{"C2.m2", "C3.m3", "C1.m1"});
}

TEST_CASE("statement sequences concatenate") {
  auto units = parse_class_body(
      "void go(File f) { FileReader r = new FileReader(f); r.read(); }");
  REQUIRE(units.size() == 1);
  CHECK(sequence_tokens(units[0]) ==
        std::vector<std::string>{"FileReader.new", "FileReader.read"});
}

TEST_CASE("if/else concatenates condition, then, else") {
  auto units = parse_class_body(
      "void go(A a, B b, C c) { if (a.s1()) { b.s2(); } else { c.s3(); } }");
  REQUIRE(units.size() == 1);
  CHECK(sequence_tokens(units[0]) == std::vector<std::string>{"A.s1", "B.s2", "C.s3"});
}

TEST_CASE("while concatenates condition then body once") {
  auto units = parse_class_body("void go(A a, B b) { while (a.s1()) { b.s2(); } }");
  REQUIRE(units.size() == 1);
  CHECK(sequence_tokens(units[0]) == std::vector<std::string>{"A.s1", "B.s2"});
}

TEST_CASE("for maps to init, condition, body, update") {
  auto units = parse_class_body(
      "void go(A a, B b, C c, D d) { for (a.init(); b.cond(); d.update()) { c.body(); } }");
  REQUIRE(units.size() == 1);
  CHECK(sequence_tokens(units[0]) ==
        std::vector<std::string>{"A.init", "B.cond", "C.body", "D.update"});
}

TEST_CASE("undeclared capitalized receiver is a static call") {
  auto units = parse_class_body("void go(String s) { int x = Integer.parseInt(s); }");
  REQUIRE(units.size() == 1);
  CHECK(sequence_tokens(units[0]) == std::vector<std::string>{"Integer.parseInt"});
}

TEST_CASE("unresolvable receiver skips the call with a warning") {
  auto units = parse_class_body("void go() { ghost.call(); }");
  REQUIRE(units.size() == 1);
  std::vector<std::string> warnings;
  auto seq = extract_sequence(units[0], &warnings);
  CHECK(seq.empty());
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("ghost") == std::string::npos);  // message names the member
  CHECK(warnings[0].find("call") != std::string::npos);
  CHECK(warnings[0].find("line 2") != std::string::npos);
}

TEST_CASE("nested arguments hold post-order at depth") {
  auto units = parse_class_body(
      "void go(A a, B b, C c, D d) { a.m1(b.m2(c.m3(), d.m4())); }");
  REQUIRE(units.size() == 1);
  CHECK(sequence_tokens(units[0]) ==
        std::vector<std::string>{"C.m3", "D.m4", "B.m2", "A.m1"});
}

TEST_CASE("chained call resolves through the declared return type") {
  auto units = parse_source(
      "class Builder {\n"
      "  Builder add(int x) { return this; }\n"
      "  void go(Builder b) { b.add(1).add(2); }\n"
      "}\n");
  REQUIRE(units.size() == 2);
  CHECK(sequence_tokens(units[1]) ==
        std::vector<std::string>{"Builder.add", "Builder.add"});
}

TEST_CASE("chained call with unknown return type skips the outer call") {
  auto units = parse_class_body("void go(A a) { a.mystery().next(); }");
  REQUIRE(units.size() == 1);
  std::vector<std::string> warnings;
  auto seq = extract_sequence(units[0], &warnings);
  CHECK(seq.render_tokens() == std::vector<std::string>{"A.mystery"});
  CHECK(!warnings.empty());
}

TEST_CASE("fields resolve, parameters shadow fields, locals shadow both") {
  auto units = parse_source(
      "class Holder {\n"
      "  Reader shared;\n"
      "  void a() { shared.read(); }\n"
      "  void b(Writer shared) { shared.write(); }\n"
      "  void c() { Parser shared = new Parser(); shared.parse(); }\n"
      "}\n");
  REQUIRE(units.size() == 3);
  CHECK(sequence_tokens(units[0]) == std::vector<std::string>{"Reader.read"});
  CHECK(sequence_tokens(units[1]) == std::vector<std::string>{"Writer.write"});
  CHECK(sequence_tokens(units[2]) ==
        std::vector<std::string>{"Parser.new", "Parser.parse"});
}

TEST_CASE("call count equals resolvable call nodes") {
  auto units = parse_class_body(
      "void go(A a) { a.one(); a.two(new B(a.three())); }");
  REQUIRE(units.size() == 1);
  auto seq = sequence_tokens(units[0]);
  CHECK(seq == std::vector<std::string>{"A.one", "A.three", "B.new", "A.two"});
}

TEST_CASE("doc comment attaches to the immediately following method") {
  auto units = parse_source(
      "class Doc {\n"
      "  /** Reads a file. */\n"
      "  void read() { }\n"
      "  void undocumented() { }\n"
      "}\n");
  REQUIRE(units.size() == 2);
  REQUIRE(units[0].doc_comment.has_value());
  CHECK(units[0].doc_comment->find("Reads a file.") != std::string::npos);
  CHECK(!units[1].doc_comment.has_value());
}

TEST_CASE("unbalanced brace reports the opening position") {
  try {
    parse_source("class Broken {\n  void go() { \n");
    FAIL("expected parse_error");
  } catch (const parse_error& e) {
    std::string msg = e.what();
    CHECK(msg.find("unclosed '{'") != std::string::npos);
  }
}

TEST_CASE("unknown constructs are named in the diagnostic") {
  try {
    parse_class_body("void go() { switch (x) { } }");
    FAIL("expected parse_error");
  } catch (const parse_error& e) {
    CHECK(std::string(e.what()).find("switch") != std::string::npos);
  }

  try {
    parse_class_body("void go() { try { } }");
    FAIL("expected parse_error");
  } catch (const parse_error& e) {
    CHECK(std::string(e.what()).find("try") != std::string::npos);
  }
}

TEST_CASE("syntax errors carry line and column") {
  try {
    parse_source("class X {\n  void go() { %%% }\n}\n");
    FAIL("expected parse_error");
  } catch (const parse_error& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("2:") != std::string::npos);
  }
}

TEST_CASE("line comments and block comments are skipped") {
  auto units = parse_class_body(
      "void go(A a) { // trailing\n  /* block */ a.m(); }");
  REQUIRE(units.size() == 1);
  CHECK(sequence_tokens(units[0]) == std::vector<std::string>{"A.m"});
}

TEST_CASE("extract_annotation keeps the first sentence") {
  auto a = extract_annotation(" Reads a file. Buffers internally. ");
  REQUIRE(a.has_value());
  CHECK(*a == "Reads a file.");
}

TEST_CASE("extract_annotation strips the asterisk gutter and tag sections") {
  auto a = extract_annotation(
      "\n * Copies a stream to a file.\n * Extra detail here.\n * @param in the stream\n");
  REQUIRE(a.has_value());
  CHECK(*a == "Copies a stream to a file.");
}

TEST_CASE("extract_annotation applies the exclusion list") {
  CHECK(!extract_annotation("TODO: Auto-generated method stub").has_value());
  CHECK(!extract_annotation("todo: auto-generated method stub\n * more").has_value());
  CHECK(!extract_annotation("NOTE: internal use only").has_value());
  CHECK(!extract_annotation("note: lowercase prefix").has_value());
  CHECK(!extract_annotation("Tests the frobnicator.").has_value());
  CHECK(!extract_annotation("").has_value());
  CHECK(!extract_annotation(" * \n * \n").has_value());
}

TEST_CASE("extract_annotation strips inline markup") {
  auto a = extract_annotation("Reads {@link File} data into a <b>buffer</b>. Done.");
  REQUIRE(a.has_value());
  CHECK(*a == "Reads data into a buffer.");
}

TEST_CASE("extract_annotation is idempotent") {
  std::vector<std::string> docs = {
      " Reads a file. Buffers internally. ",
      "\n * Copies a stream.\n * @param x y\n",
      "Parses JSON 2.0 files fast. Slowly.",
  };
  for (const auto& d : docs) {
    auto once = extract_annotation(d);
    REQUIRE(once.has_value());
    auto twice = extract_annotation(*once);
    REQUIRE(twice.has_value());
    CHECK(*twice == *once);
  }
}

TEST_CASE("a version number dot does not end the sentence") {
  auto a = extract_annotation("Parses JSON 2.0 files. Slowly.");
  REQUIRE(a.has_value());
  CHECK(*a == "Parses JSON 2.0 files.");
}

TEST_CASE("build_pairs keeps only methods with both sides") {
  auto units = parse_source(
      "class Mixed {\n"
      "  /** Reads a file. */\n"
      "  void documented(Reader r) { r.read(); }\n"
      "  void no_doc(Reader r) { r.read(); }\n"
      "  /** Has doc but no calls. */\n"
      "  void no_calls() { }\n"
      "  /** TODO: Auto-generated method stub */\n"
      "  void excluded(Reader r) { r.read(); }\n"
      "}\n");
  PairStats stats;
  auto pairs = build_pairs(units, &stats);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].annotation == "Reads a file.");
  CHECK(pairs[0].sequence.render_tokens() == std::vector<std::string>{"Reader.read"});
  CHECK(stats.methods == 4);
  CHECK(stats.kept == 1);
  CHECK(stats.skipped_no_annotation == 2);
  CHECK(stats.skipped_empty_sequence == 1);
}

TEST_CASE("build_pairs on empty input") {
  PairStats stats;
  CHECK(build_pairs({}, &stats).empty());
  CHECK(stats.methods == 0);
}

TEST_CASE("corpus file round trip") {
  std::vector<AnnotatedPair> pairs = {
      {"Reads a text file.", {{{"FileReader", "new"}, {"FileReader", "read"}}}},
      {"Converts int to string.", {{{"Integer", "toString"}}}},
  };
  std::string path = temp_path("seq2api_corpus_rt.tsv");
  write_corpus(pairs, path);
  auto loaded = read_corpus(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].annotation == "reads a text file");
  CHECK(loaded[0].sequence == pairs[0].sequence);
  CHECK(loaded[1].sequence == pairs[1].sequence);

  // a second write of the loaded pairs is byte-identical
  std::string path2 = temp_path("seq2api_corpus_rt2.tsv");
  write_corpus(loaded, path2);
  std::ifstream a(path, std::ios::binary), b(path2, std::ios::binary);
  std::string ca((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
  std::string cb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
  CHECK(ca == cb);
  std::remove(path.c_str());
  std::remove(path2.c_str());
}

TEST_CASE("read_corpus skips comments and blank lines, numbers lines from 1") {
  std::string path = temp_path("seq2api_corpus_fmt.tsv");
  {
    std::ofstream out(path);
    out << "# header comment\n\nread file\tFileReader.new\n";
  }
  auto pairs = read_corpus(path);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].annotation == "read file");
  std::remove(path.c_str());
}

TEST_CASE("read_corpus rejects malformed lines with the line number") {
  auto expect_failure = [](const std::string& content, const std::string& needle) {
    std::string path = temp_path("seq2api_corpus_bad.tsv");
    {
      std::ofstream out(path);
      out << content;
    }
    try {
      read_corpus(path);
      FAIL("expected format_error for: " + content);
    } catch (const format_error& e) {
      std::string msg = e.what();
      INFO(msg);
      CHECK(msg.find(needle) != std::string::npos);
    }
    std::remove(path.c_str());
  };
  expect_failure("no tab here\n", ":1:");
  expect_failure("ok line\tA.b\ntwo\ttabs\there\n", ":2:");
  expect_failure("words\tNotAnApiToken\n", "NotAnApiToken");
  expect_failure("words\t\n", "empty field");
  expect_failure("double  space\tA.b\n", "doubled space");
}

TEST_CASE("read_corpus splits api tokens at the last dot") {
  std::string path = temp_path("seq2api_corpus_dot.tsv");
  {
    std::ofstream out(path);
    out << "read config\tjava.io.File.new\n";
  }
  auto pairs = read_corpus(path);
  REQUIRE(pairs.size() == 1);
  REQUIRE(pairs[0].sequence.calls.size() == 1);
  CHECK(pairs[0].sequence.calls[0].class_name == "java.io.File");
  CHECK(pairs[0].sequence.calls[0].member == "new");
  std::remove(path.c_str());
}

TEST_CASE("empty corpus file reads as empty") {
  std::string path = temp_path("seq2api_corpus_empty.tsv");
  { std::ofstream out(path); }
  CHECK(read_corpus(path).empty());
  std::remove(path.c_str());
}

TEST_CASE("missing corpus file raises io_error") {
  CHECK_THROWS_AS(read_corpus("/nonexistent/path/corpus.tsv"), io_error);
}
