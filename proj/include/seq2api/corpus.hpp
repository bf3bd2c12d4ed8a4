#pragma once

#include <cctype>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "seq2api/errors.hpp"
#include "seq2api/vocab.hpp"

// Corpus construction from a Java-subset grammar: recursive-descent parser,
// API-sequence extraction by AST traversal, first-sentence annotation
// filtering, and the TSV corpus file format.
//
// The grammar covers classes with fields and methods; statements are local
// declarations, expression statements, assignments, if/else, while, for,
// return, and blocks; expressions are `new C(args)`, method calls (possibly
// chained), identifiers, and literals. Anything else is rejected with a
// diagnostic naming the construct.

namespace seq2api::corpus {

// ---------------------------------------------------------------------------
// Domain types

struct ApiCall {
  std::string class_name;
  std::string member;  // method name or the literal "new"

  std::string render() const { return class_name + "." + member; }
  bool operator==(const ApiCall&) const = default;
};

struct ApiSequence {
  std::vector<ApiCall> calls;

  bool empty() const { return calls.empty(); }
  std::vector<std::string> render_tokens() const {
    std::vector<std::string> out;
    out.reserve(calls.size());
    for (const auto& c : calls) out.push_back(c.render());
    return out;
  }
  bool operator==(const ApiSequence&) const = default;
};

struct AnnotatedPair {
  std::string annotation;  // raw text, tokenized at write time
  ApiSequence sequence;
  bool operator==(const AnnotatedPair&) const = default;
};

struct Expr {
  enum class Kind { NewObject, MethodCall, Identifier, Literal };
  Kind kind;
  std::string name;  // class for NewObject, member for MethodCall, text otherwise
  std::unique_ptr<Expr> receiver;  // MethodCall only
  std::vector<std::unique_ptr<Expr>> args;
  std::size_t line = 0;
  std::size_t col = 0;
};

struct Stmt {
  enum class Kind { LocalDecl, ExprStmt, Assign, If, While, For, Return, Block };
  Kind kind;
  std::string decl_type;  // LocalDecl
  std::string decl_name;  // LocalDecl, Assign target
  std::unique_ptr<Expr> expr;  // init / expression / condition / value
  std::unique_ptr<Stmt> then_branch;  // If
  std::unique_ptr<Stmt> else_branch;  // If (may be null)
  std::unique_ptr<Stmt> body;         // While, For
  std::unique_ptr<Stmt> init;         // For (may be null)
  std::unique_ptr<Expr> update;       // For (may be null)
  std::vector<std::unique_ptr<Stmt>> children;  // Block
};

// class -> method -> declared return type, for resolving chained calls
using MethodIndex = std::map<std::string, std::map<std::string, std::string>>;

struct MethodUnit {
  std::string class_name;
  std::string name;
  std::string return_type;
  std::optional<std::string> doc_comment;  // interior of /** ... */
  std::vector<std::unique_ptr<Stmt>> body;
  std::map<std::string, std::string> declared_types;  // fields, then params, then locals
  std::shared_ptr<const MethodIndex> method_index;
};

// ---------------------------------------------------------------------------
// Lexer

namespace detail {

struct Token {
  enum class Kind { Identifier, Number, String, CharLit, Punct, DocComment, End };
  Kind kind;
  std::string text;
  std::size_t line = 0;
  std::size_t col = 0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> tokens() {
    std::vector<Token> out;
    for (;;) {
      Token t = next();
      bool end = t.kind == Token::Kind::End;
      out.push_back(std::move(t));
      if (end) return out;
    }
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;

  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  char advance() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  Token next() {
    skip_trivia();
    std::size_t line = line_, col = col_;
    if (pos_ >= src_.size()) return {Token::Kind::End, "", line, col};

    char c = peek();
    if (c == '/' && peek(1) == '*' && peek(2) == '*' && peek(3) != '/') {
      return doc_comment();
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
      std::string text;
      while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '$') {
        text.push_back(advance());
      }
      return {Token::Kind::Identifier, std::move(text), line, col};
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string text;
      while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '.' || peek() == '_') {
        text.push_back(advance());
      }
      return {Token::Kind::Number, std::move(text), line, col};
    }
    if (c == '"' || c == '\'') {
      return quoted(c, line, col);
    }
    static const std::string punct = "(){};,.=";
    if (punct.find(c) != std::string::npos) {
      advance();
      return {Token::Kind::Punct, std::string(1, c), line, col};
    }
    throw parse_error(std::string("unexpected character '") + c + "'", line, col);
  }

  void skip_trivia() {
    for (;;) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '/' && peek(1) == '/') {
        while (pos_ < src_.size() && peek() != '\n') advance();
      } else if (c == '/' && peek(1) == '*' && !(peek(2) == '*' && peek(3) != '/')) {
        // plain block comment (doc comments are tokens)
        std::size_t line = line_, col = col_;
        advance();
        advance();
        while (!(peek() == '*' && peek(1) == '/')) {
          if (pos_ >= src_.size()) throw parse_error("unterminated comment", line, col);
          advance();
        }
        advance();
        advance();
      } else {
        return;
      }
    }
  }

  Token doc_comment() {
    std::size_t line = line_, col = col_;
    advance();  // '/'
    advance();  // '*'
    advance();  // '*'
    std::string text;
    while (!(peek() == '*' && peek(1) == '/')) {
      if (pos_ >= src_.size()) throw parse_error("unterminated doc comment", line, col);
      text.push_back(advance());
    }
    advance();
    advance();
    return {Token::Kind::DocComment, std::move(text), line, col};
  }

  Token quoted(char delim, std::size_t line, std::size_t col) {
    std::string text;
    advance();  // opening delimiter
    while (peek() != delim) {
      if (pos_ >= src_.size() || peek() == '\n') {
        throw parse_error(delim == '"' ? "unterminated string literal" : "unterminated char literal",
                          line, col);
      }
      char c = advance();
      text.push_back(c);
      if (c == '\\' && pos_ < src_.size()) text.push_back(advance());
    }
    advance();
    return {delim == '"' ? Token::Kind::String : Token::Kind::CharLit, std::move(text), line, col};
  }
};

// ---------------------------------------------------------------------------
// Parser

inline bool is_modifier(const std::string& word) {
  return word == "public" || word == "private" || word == "protected" || word == "static" ||
         word == "final" || word == "abstract";
}

inline bool is_unknown_construct(const std::string& word) {
  static const char* constructs[] = {"switch", "do",     "try",        "catch",   "finally",
                                     "throw",  "throws", "break",      "continue", "import",
                                     "package", "interface", "enum",   "extends", "implements",
                                     "synchronized"};
  for (const char* c : constructs) {
    if (word == c) return true;
  }
  return false;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  std::vector<MethodUnit> parse() {
    auto index = std::make_shared<MethodIndex>();
    std::vector<MethodUnit> units;
    while (!at_end()) {
      skip_docs();
      if (at_end()) break;
      parse_class(units, *index);
    }
    for (auto& u : units) u.method_index = index;
    return units;
  }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = pos_ + ahead;
    return i < tokens_.size() ? tokens_[i] : tokens_.back();
  }

  const Token& advance() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }

  bool at_end() const { return peek().kind == Token::Kind::End; }

  bool is_punct(const Token& t, char c) const {
    return t.kind == Token::Kind::Punct && t.text[0] == c;
  }

  bool is_word(const Token& t, std::string_view w) const {
    return t.kind == Token::Kind::Identifier && t.text == w;
  }

  void skip_docs() {
    while (peek().kind == Token::Kind::DocComment) advance();
  }

  [[noreturn]] void fail(const std::string& msg, const Token& at) const {
    throw parse_error(msg, at.line, at.col);
  }

  const Token& expect_punct(char c, const std::string& where) {
    const Token& t = peek();
    if (!is_punct(t, c)) {
      fail(std::string("expected '") + c + "' " + where + ", got '" + describe(t) + "'", t);
    }
    return advance();
  }

  std::string expect_identifier(const std::string& what) {
    const Token& t = peek();
    if (t.kind != Token::Kind::Identifier) {
      fail("expected " + what + ", got '" + describe(t) + "'", t);
    }
    if (is_unknown_construct(t.text)) fail("unknown construct: " + t.text, t);
    return advance().text;
  }

  std::string describe(const Token& t) const {
    return t.kind == Token::Kind::End ? "end of input" : t.text;
  }

  void skip_modifiers() {
    while (peek().kind == Token::Kind::Identifier && is_modifier(peek().text)) advance();
  }

  void parse_class(std::vector<MethodUnit>& units, MethodIndex& index) {
    skip_modifiers();
    const Token& head = peek();
    if (head.kind == Token::Kind::Identifier && is_unknown_construct(head.text)) {
      fail("unknown construct: " + head.text, head);
    }
    if (!is_word(head, "class")) {
      fail("expected 'class', got '" + describe(head) + "'", head);
    }
    advance();
    std::string class_name = expect_identifier("class name");
    const Token& open = expect_punct('{', "after class name");

    std::map<std::string, std::string> fields;
    std::vector<MethodUnit> methods;
    std::optional<std::string> pending_doc;

    while (!is_punct(peek(), '}')) {
      if (at_end()) fail("unclosed '{' opened at " + position_of(open), peek());
      if (peek().kind == Token::Kind::DocComment) {
        pending_doc = advance().text;  // a later doc comment replaces an earlier one
        continue;
      }
      parse_member(class_name, fields, methods, index, pending_doc);
      pending_doc.reset();
    }
    advance();  // '}'

    for (auto& m : methods) {
      // fields first so parameters and locals shadow them
      std::map<std::string, std::string> merged = fields;
      for (const auto& [k, v] : m.declared_types) merged[k] = v;
      m.declared_types = std::move(merged);
      units.push_back(std::move(m));
    }
  }

  static std::string position_of(const Token& t) {
    return std::to_string(t.line) + ":" + std::to_string(t.col);
  }

  void parse_member(const std::string& class_name, std::map<std::string, std::string>& fields,
                    std::vector<MethodUnit>& methods, MethodIndex& index,
                    const std::optional<std::string>& pending_doc) {
    skip_modifiers();
    const Token& head = peek();
    if (head.kind == Token::Kind::Identifier && is_unknown_construct(head.text)) {
      fail("unknown construct: " + head.text, head);
    }
    std::string type = expect_identifier("member type");
    std::string name = expect_identifier("member name");
    if (is_punct(peek(), '(')) {
      MethodUnit m = parse_method(class_name, type, name);
      m.doc_comment = pending_doc;
      index[class_name][name] = type;
      methods.push_back(std::move(m));
      return;
    }
    // field, optionally initialized
    if (is_punct(peek(), '=')) {
      advance();
      parse_expression();  // field initializers are parsed but not extracted from
    }
    expect_punct(';', "after field declaration");
    fields[name] = type;
  }

  MethodUnit parse_method(const std::string& class_name, std::string return_type,
                          std::string name) {
    MethodUnit m;
    m.class_name = class_name;
    m.name = std::move(name);
    m.return_type = std::move(return_type);

    expect_punct('(', "after method name");
    if (!is_punct(peek(), ')')) {
      for (;;) {
        std::string ptype = expect_identifier("parameter type");
        std::string pname = expect_identifier("parameter name");
        m.declared_types[pname] = ptype;
        if (is_punct(peek(), ',')) {
          advance();
          continue;
        }
        break;
      }
    }
    expect_punct(')', "after parameters");

    const Token& open = peek();
    expect_punct('{', "to open method body");
    while (!is_punct(peek(), '}')) {
      if (at_end()) fail("unclosed '{' opened at " + position_of(open), peek());
      m.body.push_back(parse_statement(m.declared_types));
    }
    advance();  // '}'
    return m;
  }

  std::unique_ptr<Stmt> parse_statement(std::map<std::string, std::string>& locals) {
    skip_docs();
    const Token& head = peek();

    if (is_punct(head, '{')) {
      const Token& open = advance();
      auto block = std::make_unique<Stmt>();
      block->kind = Stmt::Kind::Block;
      while (!is_punct(peek(), '}')) {
        if (at_end()) fail("unclosed '{' opened at " + position_of(open), peek());
        block->children.push_back(parse_statement(locals));
      }
      advance();
      return block;
    }

    if (head.kind == Token::Kind::Identifier) {
      if (is_unknown_construct(head.text)) fail("unknown construct: " + head.text, head);
      if (head.text == "if") return parse_if(locals);
      if (head.text == "while") return parse_while(locals);
      if (head.text == "for") return parse_for(locals);
      if (head.text == "return") {
        advance();
        auto s = std::make_unique<Stmt>();
        s->kind = Stmt::Kind::Return;
        if (!is_punct(peek(), ';')) s->expr = parse_expression();
        expect_punct(';', "after return");
        return s;
      }
      // Two identifiers in a row: a local declaration.
      if (peek(1).kind == Token::Kind::Identifier && !is_word(head, "new")) {
        return parse_local_decl(locals);
      }
      // Identifier '=' : assignment.
      if (is_punct(peek(1), '=')) {
        auto s = std::make_unique<Stmt>();
        s->kind = Stmt::Kind::Assign;
        s->decl_name = advance().text;
        advance();  // '='
        s->expr = parse_expression();
        expect_punct(';', "after assignment");
        return s;
      }
    }

    auto s = std::make_unique<Stmt>();
    s->kind = Stmt::Kind::ExprStmt;
    s->expr = parse_expression();
    expect_punct(';', "after expression");
    return s;
  }

  std::unique_ptr<Stmt> parse_local_decl(std::map<std::string, std::string>& locals) {
    auto s = std::make_unique<Stmt>();
    s->kind = Stmt::Kind::LocalDecl;
    s->decl_type = expect_identifier("type");
    s->decl_name = expect_identifier("variable name");
    locals[s->decl_name] = s->decl_type;
    if (is_punct(peek(), '=')) {
      advance();
      s->expr = parse_expression();
    }
    expect_punct(';', "after declaration");
    return s;
  }

  std::unique_ptr<Stmt> parse_if(std::map<std::string, std::string>& locals) {
    advance();  // 'if'
    auto s = std::make_unique<Stmt>();
    s->kind = Stmt::Kind::If;
    expect_punct('(', "after 'if'");
    s->expr = parse_expression();
    expect_punct(')', "after condition");
    s->then_branch = parse_statement(locals);
    if (is_word(peek(), "else")) {
      advance();
      s->else_branch = parse_statement(locals);
    }
    return s;
  }

  std::unique_ptr<Stmt> parse_while(std::map<std::string, std::string>& locals) {
    advance();  // 'while'
    auto s = std::make_unique<Stmt>();
    s->kind = Stmt::Kind::While;
    expect_punct('(', "after 'while'");
    s->expr = parse_expression();
    expect_punct(')', "after condition");
    s->body = parse_statement(locals);
    return s;
  }

  std::unique_ptr<Stmt> parse_for(std::map<std::string, std::string>& locals) {
    advance();  // 'for'
    auto s = std::make_unique<Stmt>();
    s->kind = Stmt::Kind::For;
    expect_punct('(', "after 'for'");
    if (!is_punct(peek(), ';')) {
      if (peek().kind == Token::Kind::Identifier && peek(1).kind == Token::Kind::Identifier) {
        s->init = std::make_unique<Stmt>();
        s->init->kind = Stmt::Kind::LocalDecl;
        s->init->decl_type = expect_identifier("type");
        s->init->decl_name = expect_identifier("variable name");
        locals[s->init->decl_name] = s->init->decl_type;
        if (is_punct(peek(), '=')) {
          advance();
          s->init->expr = parse_expression();
        }
      } else {
        s->init = std::make_unique<Stmt>();
        s->init->kind = Stmt::Kind::ExprStmt;
        s->init->expr = parse_expression();
      }
    }
    expect_punct(';', "after for-initializer");
    if (!is_punct(peek(), ';')) s->expr = parse_expression();
    expect_punct(';', "after for-condition");
    if (!is_punct(peek(), ')')) s->update = parse_expression();
    expect_punct(')', "after for-update");
    s->body = parse_statement(locals);
    return s;
  }

  std::unique_ptr<Expr> parse_expression() {
    auto e = parse_primary();
    // chained call suffixes: .m(args)
    while (is_punct(peek(), '.')) {
      const Token& dot = advance();
      std::string member = expect_identifier("member name after '.'");
      if (!is_punct(peek(), '(')) {
        fail("unknown construct: field access (expected '(' after ." + member + ")", dot);
      }
      auto call = std::make_unique<Expr>();
      call->kind = Expr::Kind::MethodCall;
      call->name = std::move(member);
      call->line = dot.line;
      call->col = dot.col;
      call->receiver = std::move(e);
      call->args = parse_arguments();
      e = std::move(call);
    }
    return e;
  }

  std::unique_ptr<Expr> parse_primary() {
    const Token& t = peek();
    if (t.kind == Token::Kind::Identifier) {
      if (is_unknown_construct(t.text)) fail("unknown construct: " + t.text, t);
      if (t.text == "new") {
        advance();
        auto e = std::make_unique<Expr>();
        e->kind = Expr::Kind::NewObject;
        e->line = t.line;
        e->col = t.col;
        e->name = expect_identifier("class name after 'new'");
        e->args = parse_arguments();
        return e;
      }
      auto e = std::make_unique<Expr>();
      e->kind = t.text == "true" || t.text == "false" || t.text == "null"
                    ? Expr::Kind::Literal
                    : Expr::Kind::Identifier;
      e->name = t.text;
      e->line = t.line;
      e->col = t.col;
      advance();
      return e;
    }
    if (t.kind == Token::Kind::Number || t.kind == Token::Kind::String ||
        t.kind == Token::Kind::CharLit) {
      auto e = std::make_unique<Expr>();
      e->kind = Expr::Kind::Literal;
      e->name = t.text;
      e->line = t.line;
      e->col = t.col;
      advance();
      return e;
    }
    fail("expected expression, got '" + describe(t) + "'", t);
  }

  std::vector<std::unique_ptr<Expr>> parse_arguments() {
    expect_punct('(', "to open argument list");
    std::vector<std::unique_ptr<Expr>> args;
    if (!is_punct(peek(), ')')) {
      for (;;) {
        args.push_back(parse_expression());
        if (is_punct(peek(), ',')) {
          advance();
          continue;
        }
        break;
      }
    }
    expect_punct(')', "to close argument list");
    return args;
  }
};

}  // namespace detail

inline std::vector<MethodUnit> parse_source(const std::string& text) {
  detail::Lexer lexer(text);
  detail::Parser parser(lexer.tokens());
  return parser.parse();
}

// ---------------------------------------------------------------------------
// Sequence extraction

namespace detail {

// Static type of an expression's value, when the declarations at hand pin it
// down. Chained calls resolve through the per-file method index.
inline std::optional<std::string> resolve_type(const Expr& e, const MethodUnit& m,
                                               std::vector<std::string>* warnings) {
  auto warn = [&](const std::string& msg) {
    if (warnings) {
      warnings->push_back("line " + std::to_string(e.line) + ": " + msg);
    }
  };
  switch (e.kind) {
    case Expr::Kind::NewObject:
      return e.name;
    case Expr::Kind::Identifier: {
      auto it = m.declared_types.find(e.name);
      if (it != m.declared_types.end()) return it->second;
      if (!e.name.empty() && std::isupper(static_cast<unsigned char>(e.name[0]))) {
        return e.name;  // undeclared capitalized receiver: a static call
      }
      return std::nullopt;
    }
    case Expr::Kind::MethodCall: {
      auto recv = resolve_type(*e.receiver, m, nullptr);
      if (!recv) return std::nullopt;
      if (m.method_index) {
        auto cls = m.method_index->find(*recv);
        if (cls != m.method_index->end()) {
          auto fn = cls->second.find(e.name);
          if (fn != cls->second.end()) {
            if (fn->second == "void") {
              warn("chained call on void-returning " + *recv + "." + e.name);
              return std::nullopt;
            }
            return fn->second;
          }
        }
      }
      warn("return type of " + *recv + "." + e.name + " unknown");
      return std::nullopt;
    }
    case Expr::Kind::Literal:
      return std::nullopt;
  }
  return std::nullopt;
}

inline void walk_expr(const Expr& e, const MethodUnit& m, std::vector<ApiCall>& out,
                      std::vector<std::string>* warnings) {
  switch (e.kind) {
    case Expr::Kind::NewObject:
      for (const auto& a : e.args) walk_expr(*a, m, out, warnings);
      out.push_back({e.name, "new"});
      return;
    case Expr::Kind::MethodCall: {
      walk_expr(*e.receiver, m, out, warnings);
      for (const auto& a : e.args) walk_expr(*a, m, out, warnings);
      auto cls = resolve_type(*e.receiver, m, warnings);
      if (cls) {
        out.push_back({*cls, e.name});
      } else if (warnings) {
        warnings->push_back("line " + std::to_string(e.line) + ": receiver of ." + e.name +
                            " has no resolvable type, call skipped");
      }
      return;
    }
    case Expr::Kind::Identifier:
    case Expr::Kind::Literal:
      return;
  }
}

inline void walk_stmt(const Stmt& s, const MethodUnit& m, std::vector<ApiCall>& out,
                      std::vector<std::string>* warnings) {
  switch (s.kind) {
    case Stmt::Kind::LocalDecl:
    case Stmt::Kind::ExprStmt:
    case Stmt::Kind::Assign:
    case Stmt::Kind::Return:
      if (s.expr) walk_expr(*s.expr, m, out, warnings);
      return;
    case Stmt::Kind::If:
      walk_expr(*s.expr, m, out, warnings);
      if (s.then_branch) walk_stmt(*s.then_branch, m, out, warnings);
      if (s.else_branch) walk_stmt(*s.else_branch, m, out, warnings);
      return;
    case Stmt::Kind::While:
      walk_expr(*s.expr, m, out, warnings);
      if (s.body) walk_stmt(*s.body, m, out, warnings);
      return;
    case Stmt::Kind::For:
      if (s.init) walk_stmt(*s.init, m, out, warnings);
      if (s.expr) walk_expr(*s.expr, m, out, warnings);
      if (s.body) walk_stmt(*s.body, m, out, warnings);
      if (s.update) walk_expr(*s.update, m, out, warnings);
      return;
    case Stmt::Kind::Block:
      for (const auto& c : s.children) walk_stmt(*c, m, out, warnings);
      return;
  }
}

}  // namespace detail

inline ApiSequence extract_sequence(const MethodUnit& m,
                                    std::vector<std::string>* warnings = nullptr) {
  ApiSequence seq;
  for (const auto& s : m.body) detail::walk_stmt(*s, m, seq.calls, warnings);
  return seq;
}

// ---------------------------------------------------------------------------
// Annotation extraction

namespace detail {

inline std::string strip_markup(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '{' && i + 1 < text.size() && text[i + 1] == '@') {
      std::size_t close = text.find('}', i);
      if (close == std::string::npos) break;
      i = close + 1;
      continue;
    }
    if (text[i] == '<') {
      std::size_t close = text.find('>', i);
      if (close == std::string::npos) break;
      i = close + 1;
      continue;
    }
    out.push_back(text[i++]);
  }
  return out;
}

inline std::string collapse_whitespace(const std::string& text) {
  std::string out;
  bool in_space = true;  // also trims leading whitespace
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      in_space = true;
    } else {
      if (in_space && !out.empty()) out.push_back(' ');
      out.push_back(c);
      in_space = false;
    }
  }
  return out;
}

inline bool has_prefix_ci(const std::string& text, std::string_view prefix) {
  if (text.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(text[i])) !=
        std::tolower(static_cast<unsigned char>(prefix[i]))) {
      return false;
    }
  }
  return true;
}

}  // namespace detail

// First sentence of the doc comment body, or nothing when the comment is a
// stub, a note, or a test description.
inline std::optional<std::string> extract_annotation(const std::string& doc) {
  // per-line: drop the leading "* " gutter; stop at tag sections (@param ...)
  std::istringstream lines(doc);
  std::string line;
  std::string joined;
  while (std::getline(lines, line)) {
    std::size_t i = 0;
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    while (i < line.size() && line[i] == '*') ++i;
    if (i < line.size() && line[i] == ' ') ++i;
    std::string body = line.substr(i);
    if (!body.empty() && body[0] == '@') break;
    joined += body;
    joined += ' ';
  }

  std::string text = detail::collapse_whitespace(joined);
  if (text.empty()) return std::nullopt;

  static const char* exclusions[] = {"TODO: Auto-generated method stub", "NOTE:", "test"};
  for (const char* prefix : exclusions) {
    if (detail::has_prefix_ci(text, prefix)) return std::nullopt;
  }

  text = detail::collapse_whitespace(detail::strip_markup(text));
  if (text.empty()) return std::nullopt;

  // first '.' followed by whitespace or end of text closes the sentence
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '.' &&
        (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1])))) {
      text = text.substr(0, i + 1);
      break;
    }
  }
  text = detail::collapse_whitespace(text);
  if (text.empty()) return std::nullopt;
  return text;
}

// ---------------------------------------------------------------------------
// Pair building and the corpus file

struct PairStats {
  std::size_t methods = 0;
  std::size_t kept = 0;
  std::size_t skipped_no_annotation = 0;
  std::size_t skipped_empty_sequence = 0;
};

inline std::vector<AnnotatedPair> build_pairs(const std::vector<MethodUnit>& units,
                                              PairStats* stats = nullptr,
                                              std::vector<std::string>* warnings = nullptr) {
  PairStats local;
  std::vector<AnnotatedPair> pairs;
  for (const auto& m : units) {
    ++local.methods;
    std::optional<std::string> annotation =
        m.doc_comment ? extract_annotation(*m.doc_comment) : std::nullopt;
    // an annotation with no usable words cannot form a corpus line
    if (annotation && vocab::tokenize_annotation(*annotation).empty()) annotation.reset();
    if (!annotation) {
      ++local.skipped_no_annotation;
      continue;
    }
    ApiSequence seq = extract_sequence(m, warnings);
    if (seq.empty()) {
      ++local.skipped_empty_sequence;
      continue;
    }
    ++local.kept;
    pairs.push_back({*annotation, std::move(seq)});
  }
  if (stats) *stats = local;
  return pairs;
}

inline void write_corpus(const std::vector<AnnotatedPair>& pairs, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write corpus file: " + path);
  for (const auto& p : pairs) {
    auto tokens = vocab::tokenize_annotation(p.annotation);
    if (tokens.empty()) throw value_error("write_corpus: annotation has no tokens");
    if (p.sequence.empty()) throw value_error("write_corpus: empty API sequence");
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (i) out << ' ';
      out << tokens[i];
    }
    out << '\t';
    auto api = p.sequence.render_tokens();
    for (std::size_t i = 0; i < api.size(); ++i) {
      if (i) out << ' ';
      out << api[i];
    }
    out << '\n';
  }
  if (!out) throw io_error("write failed: " + path);
}

namespace detail {

inline std::vector<std::string> split_tokens(const std::string& field, const std::string& path,
                                             std::size_t line_no, const char* side) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : field) {
    if (c == ' ') {
      if (cur.empty()) {
        throw format_error(path + ":" + std::to_string(line_no) + ": doubled space in " + side);
      }
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (cur.empty()) {
    throw format_error(path + ":" + std::to_string(line_no) + ": trailing space in " + side);
  }
  out.push_back(std::move(cur));
  return out;
}

}  // namespace detail

inline std::vector<AnnotatedPair> read_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot read corpus file: " + path);
  std::vector<AnnotatedPair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw format_error(path + ":" + std::to_string(line_no) + ": missing tab separator");
    }
    if (line.find('\t', tab + 1) != std::string::npos) {
      throw format_error(path + ":" + std::to_string(line_no) + ": more than one tab");
    }
    std::string annotation = line.substr(0, tab);
    std::string api = line.substr(tab + 1);
    if (annotation.empty() || api.empty()) {
      throw format_error(path + ":" + std::to_string(line_no) + ": empty field");
    }
    detail::split_tokens(annotation, path, line_no, "annotation");  // validates spacing
    AnnotatedPair pair;
    pair.annotation = annotation;
    for (auto& token : detail::split_tokens(api, path, line_no, "api sequence")) {
      auto dot = token.rfind('.');
      if (dot == std::string::npos || dot == 0 || dot + 1 == token.size()) {
        throw format_error(path + ":" + std::to_string(line_no) + ": api token '" + token +
                           "' is not Class.member");
      }
      pair.sequence.calls.push_back({token.substr(0, dot), token.substr(dot + 1)});
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

}  // namespace seq2api::corpus
