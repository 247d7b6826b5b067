#include "afford/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

namespace afford {

std::vector<std::string> tokenize(const std::string& sentence) {
  std::vector<std::string> out;
  std::istringstream is(sentence);
  std::string raw;
  while (is >> raw) {
    std::string tok;
    for (char c : raw) tok.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    while (!tok.empty() && std::ispunct(static_cast<unsigned char>(tok.back()))) tok.pop_back();
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

Vocabulary Vocabulary::build(const std::vector<std::string>& sentences, int min_freq) {
  if (sentences.empty()) throw DataError("cannot build a vocabulary from an empty corpus");
  std::map<std::string, int> freq;
  for (const auto& s : sentences) {
    for (const auto& tok : tokenize(s)) freq[tok] += 1;
  }
  std::vector<std::pair<std::string, int>> kept;
  for (const auto& [tok, n] : freq) {
    if (n >= min_freq) kept.push_back({tok, n});
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary v;
  v.min_freq_ = min_freq;
  v.tokens_ = {"<pad>", "<bos>", "<eos>", "<unk>"};
  for (const auto& [tok, n] : kept) v.tokens_.push_back(tok);
  v.rebuild_index();
  return v;
}

void Vocabulary::rebuild_index() {
  index_.clear();
  for (size_t i = 0; i < tokens_.size(); ++i) index_[tokens_[i]] = static_cast<int>(i);
}

int Vocabulary::id_of(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token_of(int id) const {
  if (id < 0 || id >= size()) throw DataError("token id " + std::to_string(id) + " out of range");
  return tokens_[static_cast<size_t>(id)];
}

std::vector<int> Vocabulary::encode(const std::string& sentence) const {
  std::vector<int> ids;
  for (const auto& tok : tokenize(sentence)) ids.push_back(id_of(tok));
  return ids;
}

std::string Vocabulary::decode(const std::vector<int>& ids) const {
  std::string out;
  for (int id : ids) {
    if (id == kPad || id == kBos || id == kEos) continue;
    if (!out.empty()) out.push_back(' ');
    out += token_of(id);
  }
  return out;
}

std::string Vocabulary::to_text() const {
  std::string out;
  for (const auto& tok : tokens_) {
    out += tok;
    out.push_back('\n');
  }
  return out;
}

Vocabulary Vocabulary::from_text(const std::string& text) {
  Vocabulary v;
  v.tokens_.clear();
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty()) v.tokens_.push_back(line);
  }
  if (v.tokens_.size() < 4 || v.tokens_[0] != "<pad>" || v.tokens_[1] != "<bos>" ||
      v.tokens_[2] != "<eos>" || v.tokens_[3] != "<unk>") {
    throw DataError("vocabulary file must start with <pad>, <bos>, <eos>, <unk>");
  }
  v.rebuild_index();
  return v;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DataError("cannot write vocabulary: " + path);
  os << to_text();
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open vocabulary: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return from_text(ss.str());
}

}  // namespace afford
