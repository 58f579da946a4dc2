#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace safetext::data {

inline constexpr std::int32_t kPadId = 0;
inline constexpr std::int32_t kUnkId = 1;
inline constexpr const char* kPadToken = "<pad>";
inline constexpr const char* kUnkToken = "<unk>";

// Token ids ordered by descending training-corpus frequency, ties broken
// lexicographically; PAD and UNK occupy ids 0 and 1.
class Vocabulary {
 public:
  static Vocabulary build(const std::vector<std::vector<std::string>>& corpus,
                          std::size_t max_size = 10000);
  // Rebuild from a serialized id->token list (must start with PAD, UNK).
  static Vocabulary from_tokens(std::vector<std::string> id_to_token);

  std::int32_t id(const std::string& token) const;  // UNK when absent
  const std::string& token(std::int32_t id) const;
  bool contains(const std::string& token) const;
  std::size_t size() const { return id_to_token_.size(); }
  const std::vector<std::string>& id_to_token() const { return id_to_token_; }
  std::uint64_t fingerprint() const;

 private:
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, std::int32_t> token_to_id_;
};

// Same layout over single characters, built from the training tokens.
class CharVocabulary {
 public:
  static CharVocabulary build(
      const std::vector<std::vector<std::string>>& corpus);
  static CharVocabulary from_alphabet(const std::string& alphabet);

  std::int32_t id(char c) const;  // UNK when absent
  std::size_t size() const { return alphabet_.size() + 2; }
  // Characters for ids 2.., in id order.
  const std::string& alphabet() const { return alphabet_; }
  std::uint64_t fingerprint() const;

 private:
  std::string alphabet_;
  std::unordered_map<char, std::int32_t> char_to_id_;
};

}  // namespace safetext::data
