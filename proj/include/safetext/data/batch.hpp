#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "safetext/data/dataset.hpp"
#include "safetext/data/vocab.hpp"
#include "safetext/tensor.hpp"

namespace safetext::data {

inline constexpr std::size_t kDefaultMaxTokens = 200;
inline constexpr std::size_t kDefaultMaxChars = 16;

struct EncodedBatch {
  std::size_t b = 0;
  std::size_t t = 0;  // min(t_cap, longest example in this batch)
  std::size_t c = 0;  // 0 when character ids were not requested
  std::shared_ptr<const std::vector<std::int32_t>> word_ids;  // b*t
  std::shared_ptr<const std::vector<std::int32_t>> char_ids;  // b*t*c
  std::vector<std::int32_t> lengths;                          // clamped to t
  std::vector<std::array<bool, 3>> labels;

  Tensor label_matrix() const;                            // {b,3}
  std::vector<std::int32_t> label_vector(std::size_t category) const;
};

// Tokenizes, truncates to t_cap tokens (c_max chars per word), pads with PAD,
// and maps out-of-vocabulary words to UNK. Pass charvocab = nullptr to skip
// character ids.
EncodedBatch encode_batch(const std::vector<const Story*>& stories,
                          const Vocabulary& vocab,
                          const CharVocabulary* charvocab,
                          std::size_t t_cap = kDefaultMaxTokens,
                          std::size_t c_max = kDefaultMaxChars);

}  // namespace safetext::data
