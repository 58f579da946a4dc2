#pragma once

#include <functional>
#include <string>
#include <vector>

#include "safetext/data/dataset.hpp"
#include "safetext/graph.hpp"
#include "safetext/models/model.hpp"
#include "safetext/tensor.hpp"

namespace safetext::interpret {

struct SaliencyTerm {
  std::string token;
  std::size_t position = 0;
  double weight = 0.0;  // L2 norm of the embedding-row gradient
};

// Builds a scalar score on top of an embedding leaf node.
using ScoreBuilder = std::function<ad::NodeId(ad::Graph&, ad::NodeId)>;

// Gradient of the score with respect to the embedding tensor.
Tensor embedding_gradient(const Tensor& embeddings,
                          const ScoreBuilder& score_builder);

// First-derivative saliency of the pre-activation class score for one story.
// `target` indexes the class column of the logit row.
std::vector<SaliencyTerm> saliency_explain(models::Model& model,
                                           const data::Story& story,
                                           std::size_t target);

}  // namespace safetext::interpret
