#pragma once

#include <array>
#include <optional>
#include <vector>

#include "safetext/data/batch.hpp"
#include "safetext/data/vocab.hpp"
#include "safetext/graph.hpp"
#include "safetext/models/config.hpp"
#include "safetext/rng.hpp"

namespace safetext::models {

// One neural classifier: embedding tables, the architecture-specific encoder,
// and the class head. Parameters are created once, seeded by config.seed, and
// shared across the graphs built per batch.
class Model {
 public:
  Model(ModelConfig cfg, data::Vocabulary vocab,
        std::optional<data::CharVocabulary> charvocab);

  struct Forward {
    ad::NodeId logits;    // {B, 2} single / {B, 3} multi
    ad::NodeId features;  // input of the final fully-connected layer
  };

  // {B,T,D} lookup into the word embedding table (differentiable to the table).
  ad::NodeId word_embeddings(ad::Graph& g, const data::EncodedBatch& batch);
  // Same values as a plain tensor, for building embedding-leaf graphs.
  Tensor gather_word_embeddings(const data::EncodedBatch& batch) const;

  // Encoder + head starting from a word-embedding node (either the table
  // lookup or an input_grad leaf holding the same values).
  Forward forward_from_embedding(ad::Graph& g, ad::NodeId emb,
                                 const data::EncodedBatch& batch, bool training,
                                 Rng& dropout_rng);
  Forward forward(ad::Graph& g, const data::EncodedBatch& batch, bool training,
                  Rng& dropout_rng);

  // Task-appropriate training loss (mean cross entropy / mean BCE).
  ad::NodeId loss_node(ad::Graph& g, const Forward& fwd,
                       const data::EncodedBatch& batch) const;
  // Forward pass plus loss in one call; dropout uses a config-seeded stream.
  ad::NodeId loss_node(ad::Graph& g, const data::EncodedBatch& batch,
                       bool training);

  // Per-token character vectors {B,T,char_output_dim} from the char branch.
  ad::NodeId char_features(ad::Graph& g, const data::EncodedBatch& batch);

  // Inference passes with dropout disabled.
  Tensor predict_logits(const data::EncodedBatch& batch);
  Tensor predict_probs(const data::EncodedBatch& batch);
  Tensor predict_features(const data::EncodedBatch& batch);

  data::EncodedBatch encode(const std::vector<const data::Story*>& stories) const;

  std::size_t feature_dim() const;
  const ModelConfig& config() const { return cfg_; }
  ad::ParameterSet& params() { return params_; }
  const ad::ParameterSet& params() const { return params_; }
  const data::Vocabulary& vocab() const { return vocab_; }
  const data::CharVocabulary* char_vocab() const {
    return charvocab_ ? &*charvocab_ : nullptr;
  }

 private:
  ad::NodeId encoder(ad::Graph& g, ad::NodeId rep,
                     const data::EncodedBatch& batch);

  ModelConfig cfg_;
  data::Vocabulary vocab_;
  std::optional<data::CharVocabulary> charvocab_;
  ad::ParameterSet params_;
};

// C = 1(sigma(F) >= t), one bit per category; boundary inclusive.
std::array<bool, 3> predict_multi(const double* activations, double threshold);
std::vector<std::array<bool, 3>> predict_multi(const Tensor& activations,
                                               double threshold);

}  // namespace safetext::models
