#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "seq2api/errors.hpp"
#include "seq2api/numerics.hpp"

// Vocabulary handling: annotation tokenization, capped frequency-ordered
// vocabularies with the four reserved tokens, index encoding, and the IDF
// importance table used by the training cost.

namespace seq2api::vocab {

inline constexpr std::size_t kPadIndex = 0;
inline constexpr std::size_t kStartIndex = 1;
inline constexpr std::size_t kEosIndex = 2;
inline constexpr std::size_t kUnkIndex = 3;
inline constexpr std::size_t kSpecialCount = 4;

inline const char* special_token(std::size_t index) {
  static const char* names[kSpecialCount] = {"<PAD>", "<START>", "<EOS>", "<UNK>"};
  return names[index];
}

inline bool is_special_token(std::string_view token) {
  for (std::size_t i = 0; i < kSpecialCount; ++i) {
    if (token == special_token(i)) return true;
  }
  return false;
}

// Lowercase, split on non-alphanumeric runs. Text inside (), [] or {} is
// dropped before splitting; unmatched closers are treated as plain
// punctuation.
inline std::vector<std::string> tokenize_annotation(std::string_view text) {
  std::string kept;
  kept.reserve(text.size());
  int paren = 0, square = 0, brace = 0;
  for (char c : text) {
    switch (c) {
      case '(': ++paren; continue;
      case ')': if (paren > 0) --paren; continue;
      case '[': ++square; continue;
      case ']': if (square > 0) --square; continue;
      case '{': ++brace; continue;
      case '}': if (brace > 0) --brace; continue;
      default: break;
    }
    if (paren == 0 && square == 0 && brace == 0) kept.push_back(c);
  }

  std::vector<std::string> out;
  std::string cur;
  for (char c : kept) {
    auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      cur.push_back(static_cast<char>(std::tolower(u)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

class Vocabulary {
 public:
  Vocabulary() {
    for (std::size_t i = 0; i < kSpecialCount; ++i) append(special_token(i));
  }

  std::size_t size() const { return tokens_.size(); }

  const std::string& token(std::size_t index) const {
    if (index >= tokens_.size()) {
      throw index_error("vocabulary index " + std::to_string(index) + " out of range (size " +
                        std::to_string(tokens_.size()) + ")");
    }
    return tokens_[index];
  }

  bool contains(const std::string& token) const { return index_.count(token) > 0; }

  // OOV tokens map to UNK.
  std::size_t lookup(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? kUnkIndex : it->second;
  }

  std::vector<std::size_t> encode(const std::vector<std::string>& tokens) const {
    std::vector<std::size_t> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(lookup(t));
    return out;
  }

  std::vector<std::string> decode(const std::vector<std::size_t>& indices) const {
    std::vector<std::string> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) out.push_back(token(i));
    return out;
  }

  // FNV-1a over the token list, newline-delimited. Checkpoints store this to
  // detect vocabulary swaps.
  std::uint64_t content_hash() const {
    std::uint64_t h = 14695981039346656037ull;
    auto mix = [&h](unsigned char byte) {
      h ^= byte;
      h *= 1099511628211ull;
    };
    for (const auto& t : tokens_) {
      for (char c : t) mix(static_cast<unsigned char>(c));
      mix('\n');
    }
    return h;
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write vocabulary file: " + path);
    for (const auto& t : tokens_) out << t << '\n';
    if (!out) throw io_error("write failed: " + path);
  }

  static Vocabulary load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot read vocabulary file: " + path);
    Vocabulary v;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) {
        throw format_error(path + ":" + std::to_string(line_no) + ": empty vocabulary line");
      }
      if (line_no <= kSpecialCount) {
        if (line != special_token(line_no - 1)) {
          throw format_error(path + ":" + std::to_string(line_no) + ": expected special token " +
                             special_token(line_no - 1) + ", got " + line);
        }
        continue;
      }
      if (v.contains(line)) {
        throw format_error(path + ":" + std::to_string(line_no) + ": duplicate token " + line);
      }
      v.append(line);
    }
    if (line_no < kSpecialCount) {
      throw format_error(path + ": vocabulary file must start with the four special tokens");
    }
    return v;
  }

  // Used by build_vocabulary; callers normally go through that.
  void append(std::string token) {
    index_.emplace(token, tokens_.size());
    tokens_.push_back(std::move(token));
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Top `cap` tokens by frequency, ties broken lexicographically. Reserved
// tokens are never counted even if they appear in the input.
inline Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& sequences,
                                   std::size_t cap) {
  if (cap < 1) throw value_error("build_vocabulary: cap must be at least 1");
  std::map<std::string, std::size_t> freq;
  for (const auto& seq : sequences) {
    for (const auto& t : seq) {
      if (!is_special_token(t)) ++freq[t];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary v;
  for (std::size_t i = 0; i < ranked.size() && i < cap; ++i) v.append(ranked[i].first);
  return v;
}

// Document-frequency table: n_y counts sequences containing y at least once,
// and the weight of y is ln(N / n_y). Tokens the table has never seen (and
// the reserved tokens) weigh 0.
class IdfTable {
 public:
  IdfTable(std::size_t corpus_size, std::map<std::string, std::size_t> doc_freq)
      : corpus_size_(corpus_size), doc_freq_(std::move(doc_freq)) {
    for (const auto& [token, n] : doc_freq_) {
      if (n == 0 || n > corpus_size_) {
        throw value_error("idf: document frequency of " + token + " (" + std::to_string(n) +
                          ") outside [1, " + std::to_string(corpus_size_) + "]");
      }
    }
  }

  std::size_t corpus_size() const { return corpus_size_; }
  const std::map<std::string, std::size_t>& doc_freq() const { return doc_freq_; }

  double weight(const std::string& token) const {
    if (is_special_token(token)) return 0.0;
    auto it = doc_freq_.find(token);
    if (it == doc_freq_.end()) return 0.0;
    return std::log(static_cast<double>(corpus_size_) / static_cast<double>(it->second));
  }

  // Weights laid out by vocabulary index, for the training cost.
  numerics::DenseVector dense_weights(const Vocabulary& v) const {
    numerics::DenseVector w(v.size());
    for (std::size_t i = kSpecialCount; i < v.size(); ++i) w[i] = weight(v.token(i));
    return w;
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write idf file: " + path);
    out << "# sequences=" << corpus_size_ << '\n';
    for (const auto& [token, n] : doc_freq_) out << token << '\t' << n << '\n';
    if (!out) throw io_error("write failed: " + path);
  }

  static IdfTable load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot read idf file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw format_error(path + ": empty idf file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string header = "# sequences=";
    if (line.rfind(header, 0) != 0) {
      throw format_error(path + ":1: expected '" + header + "N' header");
    }
    std::size_t corpus_size = 0;
    try {
      corpus_size = std::stoull(line.substr(header.size()));
    } catch (const std::exception&) {
      throw format_error(path + ":1: bad sequence count in header");
    }
    std::map<std::string, std::size_t> freq;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      auto tab = line.find('\t');
      if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
        throw format_error(path + ":" + std::to_string(line_no) + ": expected token<TAB>count");
      }
      std::string token = line.substr(0, tab);
      std::size_t n = 0;
      try {
        n = std::stoull(line.substr(tab + 1));
      } catch (const std::exception&) {
        throw format_error(path + ":" + std::to_string(line_no) + ": bad count for " + token);
      }
      if (!freq.emplace(std::move(token), n).second) {
        throw format_error(path + ":" + std::to_string(line_no) + ": duplicate token");
      }
    }
    return IdfTable(corpus_size, std::move(freq));
  }

 private:
  std::size_t corpus_size_;
  std::map<std::string, std::size_t> doc_freq_;
};

inline IdfTable compute_idf(const std::vector<std::vector<std::string>>& api_sequences) {
  if (api_sequences.empty()) throw value_error("compute_idf: corpus is empty");
  std::map<std::string, std::size_t> freq;
  for (const auto& seq : api_sequences) {
    std::map<std::string, bool> seen;
    for (const auto& t : seq) {
      if (!seen[t]) {
        seen[t] = true;
        ++freq[t];
      }
    }
  }
  return IdfTable(api_sequences.size(), std::move(freq));
}

}  // namespace seq2api::vocab
