#include "rollforge/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>

#include "rollforge/common.hpp"

namespace rollforge::text {

namespace {
const std::vector<std::string> kReserved = {"<pad>", "<bos>", "<eos>", "<unk>", "<eor>"};
}

Vocabulary::Vocabulary() : tokens_(kReserved) { index(); }

Vocabulary::Vocabulary(const std::vector<std::string>& words) : tokens_(kReserved) {
  std::vector<std::string> sorted = words;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  for (const auto& w : sorted) {
    if (std::find(kReserved.begin(), kReserved.end(), w) != kReserved.end()) continue;
    tokens_.push_back(w);
  }
  index();
}

void Vocabulary::index() {
  ids_.clear();
  for (int i = 0; i < static_cast<int>(tokens_.size()); ++i) {
    if (!ids_.emplace(tokens_[i], i).second)
      throw std::invalid_argument("duplicate vocabulary token: " + tokens_[i]);
  }
}

int Vocabulary::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size()) throw std::invalid_argument("token id out of range");
  return tokens_[id];
}

uint64_t Vocabulary::hash() const {
  uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& t : tokens_) {
    h = fnv1a64(t, h);
    h = fnv1a64("\n", h);
  }
  return h;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  for (const auto& t : tokens_) out << t << "\n";
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError("cannot open vocabulary file: " + path);
  Vocabulary v;
  v.tokens_.clear();
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) v.tokens_.push_back(line);
  }
  for (size_t i = 0; i < kReserved.size(); ++i) {
    if (v.tokens_.size() <= i || v.tokens_[i] != kReserved[i])
      throw std::invalid_argument("vocabulary file missing reserved tokens");
  }
  v.index();
  return v;
}

std::vector<std::string> normalize_words(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  };
  for (unsigned char c : s) {
    if (std::isspace(c)) {
      flush();
    } else if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else {
      // every punctuation character stands alone
      flush();
      out.emplace_back(1, static_cast<char>(c));
    }
  }
  flush();
  return out;
}

std::vector<int> tokenize(const std::string& s, const Vocabulary& v) {
  std::vector<int> ids;
  for (const auto& w : normalize_words(s)) ids.push_back(v.id(w));
  return ids;
}

std::string detokenize(const std::vector<int>& ids, const Vocabulary& v) {
  std::string out;
  for (int id : ids) {
    if (!out.empty()) out.push_back(' ');
    out += v.token(id);
  }
  return out;
}

}  // namespace rollforge::text
