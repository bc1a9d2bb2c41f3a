#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace rollforge::text {

// Word-level vocabulary. Ids 0..4 are reserved; everything else is sorted
// lexicographically so rebuilding from the same corpora is stable.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;
  static constexpr int kEndOfRollout = 4;

  Vocabulary();
  explicit Vocabulary(const std::vector<std::string>& words);  // non-reserved words

  int id(const std::string& token) const;  // kUnk for unknown tokens
  const std::string& token(int id) const;
  int size() const { return static_cast<int>(tokens_.size()); }
  uint64_t hash() const;

  void save(const std::string& path) const;  // token per line, implicit ids
  static Vocabulary load(const std::string& path);

  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  void index();
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

// Lowercases, splits punctuation into standalone tokens, splits whitespace.
std::vector<std::string> normalize_words(const std::string& s);

std::vector<int> tokenize(const std::string& s, const Vocabulary& v);
std::string detokenize(const std::vector<int>& ids, const Vocabulary& v);

}  // namespace rollforge::text
