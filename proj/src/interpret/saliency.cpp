#include "safetext/interpret/saliency.hpp"

#include <cmath>

#include "safetext/data/tokenize.hpp"
#include "safetext/errors.hpp"

namespace safetext::interpret {

Tensor embedding_gradient(const Tensor& embeddings,
                          const ScoreBuilder& score_builder) {
  ad::Graph g;
  ad::NodeId leaf = g.input_grad(embeddings);
  ad::NodeId score = score_builder(g, leaf);
  if (g.val(score).size() != 1)
    throw ConfigError("saliency score must be a scalar");
  g.backward(score);
  if (!g.has_grad(leaf)) {
    Tensor zero(embeddings.shape());
    return zero;
  }
  return g.grad(leaf);
}

std::vector<SaliencyTerm> saliency_explain(models::Model& model,
                                           const data::Story& story,
                                           std::size_t target) {
  if (target >= model.config().num_classes())
    throw ConfigError("saliency target class out of range");
  auto tokens = data::tokenize(story.text);
  if (tokens.empty()) throw DataError("story has no tokens to explain");

  const data::Story* one[] = {&story};
  auto batch = model.encode({one[0]});
  Tensor emb = model.gather_word_embeddings(batch);

  Rng unused(0);
  auto builder = [&](ad::Graph& g, ad::NodeId leaf) {
    auto fwd = model.forward_from_embedding(g, leaf, batch, false, unused);
    return ad::select(g, fwd.logits, target);
  };
  Tensor grad = embedding_gradient(emb, builder);
  grad.require_finite("saliency gradient");

  const std::size_t d = model.config().embedding_dim;
  const std::size_t n = std::min<std::size_t>(tokens.size(), batch.t);
  std::vector<SaliencyTerm> terms;
  terms.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double ss = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double v = grad.vec()[i * d + j];
      ss += v * v;
    }
    terms.push_back({tokens[i], i, std::sqrt(ss)});
  }
  return terms;
}

}  // namespace safetext::interpret
