#include "safetext/data/batch.hpp"

#include <algorithm>

#include "safetext/data/tokenize.hpp"
#include "safetext/errors.hpp"

namespace safetext::data {

Tensor EncodedBatch::label_matrix() const {
  Tensor m({b, 3});
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t c3 = 0; c3 < 3; ++c3)
      m.at(i, c3) = labels[i][c3] ? 1.0 : 0.0;
  return m;
}

std::vector<std::int32_t> EncodedBatch::label_vector(
    std::size_t category) const {
  if (category >= 3) throw ConfigError("label category out of range");
  std::vector<std::int32_t> out(b);
  for (std::size_t i = 0; i < b; ++i) out[i] = labels[i][category] ? 1 : 0;
  return out;
}

EncodedBatch encode_batch(const std::vector<const Story*>& stories,
                          const Vocabulary& vocab,
                          const CharVocabulary* charvocab, std::size_t t_cap,
                          std::size_t c_max) {
  if (stories.empty()) throw DataError("encode_batch: empty batch");
  if (t_cap == 0 || (charvocab != nullptr && c_max == 0))
    throw ConfigError("encode_batch: caps must be positive");

  EncodedBatch out;
  out.b = stories.size();

  std::vector<std::vector<std::string>> tokens(out.b);
  std::size_t longest = 1;
  for (std::size_t i = 0; i < out.b; ++i) {
    tokens[i] = tokenize(stories[i]->text);
    if (tokens[i].empty())
      throw DataError("encode_batch: story tokenizes to nothing");
    longest = std::max(longest, tokens[i].size());
  }
  out.t = std::min(t_cap, longest);
  out.c = charvocab ? c_max : 0;

  auto wids = std::make_shared<std::vector<std::int32_t>>(out.b * out.t, kPadId);
  auto cids = charvocab ? std::make_shared<std::vector<std::int32_t>>(
                              out.b * out.t * out.c, kPadId)
                        : nullptr;
  out.lengths.resize(out.b);
  out.labels.resize(out.b);

  for (std::size_t i = 0; i < out.b; ++i) {
    const std::size_t len = std::min(tokens[i].size(), out.t);
    out.lengths[i] = static_cast<std::int32_t>(len);
    out.labels[i] = stories[i]->labels;
    for (std::size_t tt = 0; tt < len; ++tt) {
      const std::string& tok = tokens[i][tt];
      (*wids)[i * out.t + tt] = vocab.id(tok);
      if (charvocab) {
        const std::size_t nc = std::min(tok.size(), out.c);
        for (std::size_t cc = 0; cc < nc; ++cc)
          (*cids)[(i * out.t + tt) * out.c + cc] = charvocab->id(tok[cc]);
      }
    }
  }
  out.word_ids = std::move(wids);
  out.char_ids = std::move(cids);
  return out;
}

}  // namespace safetext::data
