#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "afford/error.hpp"

namespace afford {

// Lowercase, split on whitespace, strip terminal punctuation from each token.
std::vector<std::string> tokenize(const std::string& sentence);

class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;

  // Tokens with corpus frequency >= min_freq are kept, ordered by frequency
  // (descending) then token text; everything else maps to UNK.
  static Vocabulary build(const std::vector<std::string>& sentences, int min_freq = 2);

  int size() const { return static_cast<int>(tokens_.size()); }
  int min_freq() const { return min_freq_; }
  const std::vector<std::string>& tokens() const { return tokens_; }

  int id_of(const std::string& token) const;  // kUnk for out-of-vocabulary
  const std::string& token_of(int id) const;

  std::vector<int> encode(const std::string& sentence) const;
  std::string decode(const std::vector<int>& ids) const;  // skips PAD/BOS/EOS

  // One token per line, reserved tokens first.
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);
  std::string to_text() const;
  static Vocabulary from_text(const std::string& text);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
  int min_freq_ = 2;

  void rebuild_index();
};

}  // namespace afford
