#include "safetext/data/vocab.hpp"

#include <algorithm>
#include <map>

#include "safetext/errors.hpp"

namespace safetext::data {

namespace {

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;

}  // namespace

Vocabulary Vocabulary::build(
    const std::vector<std::vector<std::string>>& corpus, std::size_t max_size) {
  if (max_size < 3) throw ConfigError("vocabulary cap must admit PAD, UNK and a token");
  std::map<std::string, std::size_t> freq;
  for (const auto& doc : corpus)
    for (const auto& tok : doc) ++freq[tok];
  if (freq.empty()) throw DataError("cannot build a vocabulary from an empty corpus");

  std::vector<std::pair<std::string, std::size_t>> items(freq.begin(),
                                                         freq.end());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary v;
  v.id_to_token_ = {kPadToken, kUnkToken};
  const std::size_t keep = std::min(items.size(), max_size - 2);
  for (std::size_t i = 0; i < keep; ++i)
    v.id_to_token_.push_back(items[i].first);
  for (std::size_t i = 0; i < v.id_to_token_.size(); ++i)
    v.token_to_id_.emplace(v.id_to_token_[i], static_cast<std::int32_t>(i));
  return v;
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> id_to_token) {
  if (id_to_token.size() < 2 || id_to_token[0] != kPadToken ||
      id_to_token[1] != kUnkToken)
    throw DataError("vocabulary list must start with the PAD and UNK tokens");
  Vocabulary v;
  v.id_to_token_ = std::move(id_to_token);
  for (std::size_t i = 0; i < v.id_to_token_.size(); ++i) {
    if (!v.token_to_id_.emplace(v.id_to_token_[i], static_cast<std::int32_t>(i))
             .second)
      throw DataError("duplicate token in vocabulary list: " +
                      v.id_to_token_[i]);
  }
  return v;
}

std::int32_t Vocabulary::id(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::token(std::int32_t id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size())
    throw ConfigError("token id out of range: " + std::to_string(id));
  return id_to_token_[static_cast<std::size_t>(id)];
}

bool Vocabulary::contains(const std::string& token) const {
  return token_to_id_.count(token) != 0;
}

std::uint64_t Vocabulary::fingerprint() const {
  std::uint64_t h = kFnvOffset;
  for (const auto& tok : id_to_token_) {
    h = fnv1a(h, tok.data(), tok.size());
    h = fnv1a(h, "\x1f", 1);
  }
  return h;
}

CharVocabulary CharVocabulary::build(
    const std::vector<std::vector<std::string>>& corpus) {
  std::map<char, std::size_t> freq;
  for (const auto& doc : corpus)
    for (const auto& tok : doc)
      for (char c : tok) ++freq[c];
  if (freq.empty())
    throw DataError("cannot build a character vocabulary from an empty corpus");

  std::vector<std::pair<char, std::size_t>> items(freq.begin(), freq.end());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  std::string alphabet;
  for (const auto& [c, n] : items) alphabet.push_back(c);
  return from_alphabet(alphabet);
}

CharVocabulary CharVocabulary::from_alphabet(const std::string& alphabet) {
  CharVocabulary v;
  v.alphabet_ = alphabet;
  for (std::size_t i = 0; i < alphabet.size(); ++i) {
    if (!v.char_to_id_.emplace(alphabet[i], static_cast<std::int32_t>(i + 2))
             .second)
      throw DataError("duplicate character in alphabet");
  }
  return v;
}

std::int32_t CharVocabulary::id(char c) const {
  auto it = char_to_id_.find(c);
  return it == char_to_id_.end() ? kUnkId : it->second;
}

std::uint64_t CharVocabulary::fingerprint() const {
  return fnv1a(kFnvOffset, alphabet_.data(), alphabet_.size());
}

}  // namespace safetext::data
