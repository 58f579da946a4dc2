#include "safetext/models/model.hpp"

#include <algorithm>

#include "safetext/errors.hpp"
#include "safetext/nn.hpp"

namespace safetext::models {

namespace {

void init_lstm_bias(Tensor& bias, std::size_t h) {
  bias.fill(0.0);
  for (std::size_t j = 0; j < h; ++j) bias[h + j] = 1.0;  // forget gate
}

}  // namespace

Model::Model(ModelConfig cfg, data::Vocabulary vocab,
             std::optional<data::CharVocabulary> charvocab)
    : cfg_(std::move(cfg)), vocab_(std::move(vocab)),
      charvocab_(std::move(charvocab)) {
  cfg_.validate();
  if (cfg_.use_char && !charvocab_)
    throw ConfigError("character-level architecture needs a char vocabulary");

  Rng rng(cfg_.seed);
  auto add_glorot = [&](const std::string& name, std::size_t rows,
                        std::size_t cols) {
    Tensor t({rows, cols});
    nn::glorot_fill(t, rows, cols, rng);
    params_.add(name, std::move(t));
  };

  {
    params_.add("embedding",
                Tensor::zeros({vocab_.size(), cfg_.embedding_dim}));
  }

  const bool has_conv = cfg_.arch != Arch::rnn;
  const bool has_lstm = cfg_.arch != Arch::cnn;

  std::size_t token_dim = cfg_.embedding_dim;
  if (cfg_.use_char) {
    Tensor cemb({charvocab_->size(), cfg_.char_embedding_dim});
    for (std::size_t i = 0; i < cemb.size(); ++i)
      cemb[i] = rng.uniform(-0.1, 0.1);
    params_.add("char_embedding", std::move(cemb));
    for (std::size_t w : cfg_.char_filter_widths) {
      add_glorot("char_conv.w" + std::to_string(w),
                 w * cfg_.char_embedding_dim, cfg_.char_filters_per_width);
      params_.add("char_conv.b" + std::to_string(w),
                  Tensor::zeros({cfg_.char_filters_per_width}));
    }
    token_dim += cfg_.char_output_dim();
  }

  std::size_t enc_in = token_dim;
  if (has_conv) {
    for (std::size_t w : cfg_.filter_widths) {
      add_glorot("conv.w" + std::to_string(w), w * token_dim,
                 cfg_.filters_per_width);
      params_.add("conv.b" + std::to_string(w),
                  Tensor::zeros({cfg_.filters_per_width}));
    }
    enc_in = cfg_.conv_output_dim();
  }

  if (has_lstm) {
    const std::size_t dirs = cfg_.bidirectional ? 2 : 1;
    for (std::size_t l = 0; l < cfg_.lstm_layers; ++l) {
      const std::size_t din = l == 0 ? enc_in : cfg_.lstm_hidden * dirs;
      for (std::size_t dir = 0; dir < dirs; ++dir) {
        const std::string tag =
            "lstm." + std::to_string(l) + (dir == 0 ? ".fwd" : ".bwd");
        add_glorot(tag + ".w_in", din, 4 * cfg_.lstm_hidden);
        add_glorot(tag + ".w_rec", cfg_.lstm_hidden, 4 * cfg_.lstm_hidden);
        Tensor bias({4 * cfg_.lstm_hidden});
        init_lstm_bias(bias, cfg_.lstm_hidden);
        params_.add(tag + ".bias", std::move(bias));
      }
    }
  }

  add_glorot("fc.w", feature_dim(), cfg_.num_classes());
  params_.add("fc.b", Tensor::zeros({cfg_.num_classes()}));

  // The word embedding table is filled after the layer weights so that layer
  // shapes do not shift the embedding stream.
  Tensor& emb = params_.find("embedding")->value;
  for (std::size_t i = 0; i < emb.size(); ++i) emb[i] = rng.uniform(-0.1, 0.1);
}

std::size_t Model::feature_dim() const {
  switch (cfg_.arch) {
    case Arch::cnn:
      return cfg_.conv_output_dim();
    case Arch::rnn:
    case Arch::cnn_rnn:
    case Arch::cnn_rnn_bidirec_char:
      return cfg_.lstm_hidden * (cfg_.bidirectional ? 2 : 1);
  }
  throw ConfigError("unknown architecture value");
}

ad::NodeId Model::word_embeddings(ad::Graph& g,
                                  const data::EncodedBatch& batch) {
  return ad::embedding_lookup(g, g.param(*params_.find("embedding")),
                              batch.word_ids, batch.b, batch.t);
}

Tensor Model::gather_word_embeddings(const data::EncodedBatch& batch) const {
  const Tensor& table = params_.find("embedding")->value;
  const std::size_t d = cfg_.embedding_dim;
  Tensor out({batch.b, batch.t, d});
  for (std::size_t i = 0; i < batch.b * batch.t; ++i) {
    const auto id = static_cast<std::size_t>((*batch.word_ids)[i]);
    std::copy_n(table.data() + id * d, d, out.data() + i * d);
  }
  return out;
}

ad::NodeId Model::char_features(ad::Graph& g, const data::EncodedBatch& batch) {
  if (!batch.char_ids || batch.c == 0)
    throw ConfigError("batch was encoded without character ids");
  // One conv instance per word: {B*T, C, char_dim}.
  ad::NodeId cemb =
      ad::embedding_lookup(g, g.param(*params_.find("char_embedding")),
                           batch.char_ids, batch.b * batch.t, batch.c);
  std::vector<nn::ConvFilterParams> banks;
  for (std::size_t w : cfg_.char_filter_widths)
    banks.push_back({w, g.param(*params_.find("char_conv.w" + std::to_string(w))),
                     g.param(*params_.find("char_conv.b" + std::to_string(w)))});
  ad::NodeId pooled = nn::conv_max_pool(g, cemb, banks);  // {B*T, char_out}
  return ad::reshape(g, pooled, {batch.b, batch.t, cfg_.char_output_dim()});
}

ad::NodeId Model::encoder(ad::Graph& g, ad::NodeId rep,
                          const data::EncodedBatch& batch) {
  const bool has_conv = cfg_.arch != Arch::rnn;

  std::vector<nn::ConvFilterParams> banks;
  if (has_conv) {
    for (std::size_t w : cfg_.filter_widths)
      banks.push_back({w, g.param(*params_.find("conv.w" + std::to_string(w))),
                       g.param(*params_.find("conv.b" + std::to_string(w)))});
  }

  if (cfg_.arch == Arch::cnn) return nn::conv_max_pool(g, rep, banks);

  ad::NodeId seq_in = rep;
  std::vector<std::int32_t> lengths = batch.lengths;
  if (has_conv) {
    seq_in = nn::conv_seq(g, rep, banks);
    const std::size_t tp = g.val(seq_in).dim(1);
    for (auto& len : lengths)
      len = std::min<std::int32_t>(static_cast<std::int32_t>(tp),
                                   std::max<std::int32_t>(1, len));
  }

  std::vector<nn::LstmLayerWeights> layers;
  const std::size_t dirs = cfg_.bidirectional ? 2 : 1;
  for (std::size_t l = 0; l < cfg_.lstm_layers; ++l) {
    nn::LstmLayerWeights lw{};
    const std::string base = "lstm." + std::to_string(l);
    lw.fwd = {g.param(*params_.find(base + ".fwd.w_in")),
              g.param(*params_.find(base + ".fwd.w_rec")),
              g.param(*params_.find(base + ".fwd.bias"))};
    if (dirs == 2)
      lw.bwd = {g.param(*params_.find(base + ".bwd.w_in")),
                g.param(*params_.find(base + ".bwd.w_rec")),
                g.param(*params_.find(base + ".bwd.bias"))};
    layers.push_back(lw);
  }
  return nn::lstm(g, seq_in, lengths, layers, cfg_.bidirectional).final;
}

Model::Forward Model::forward_from_embedding(ad::Graph& g, ad::NodeId emb,
                                             const data::EncodedBatch& batch,
                                             bool training, Rng& dropout_rng) {
  ad::NodeId rep = emb;
  if (cfg_.use_char) {
    ad::NodeId cf = char_features(g, batch);
    ad::NodeId flat_w =
        ad::reshape(g, emb, {batch.b * batch.t, cfg_.embedding_dim});
    ad::NodeId flat_c =
        ad::reshape(g, cf, {batch.b * batch.t, cfg_.char_output_dim()});
    rep = ad::reshape(
        g, ad::concat_cols(g, {flat_w, flat_c}),
        {batch.b, batch.t, cfg_.embedding_dim + cfg_.char_output_dim()});
  }

  ad::NodeId features = encoder(g, rep, batch);
  ad::NodeId head_in = features;
  if (training && cfg_.keep_prob < 1.0)
    head_in = nn::dropout(g, features, cfg_.keep_prob, true, dropout_rng);
  ad::NodeId logits = ad::affine(g, head_in, g.param(*params_.find("fc.w")),
                                 g.param(*params_.find("fc.b")));
  return {logits, features};
}

Model::Forward Model::forward(ad::Graph& g, const data::EncodedBatch& batch,
                              bool training, Rng& dropout_rng) {
  return forward_from_embedding(g, word_embeddings(g, batch), batch, training,
                                dropout_rng);
}

ad::NodeId Model::loss_node(ad::Graph& g, const Forward& fwd,
                            const data::EncodedBatch& batch) const {
  if (cfg_.task == Task::single) {
    std::vector<std::int32_t> labels = batch.label_vector(cfg_.category);
    return ad::softmax_xent(g, fwd.logits, std::move(labels));
  }
  return ad::sigmoid_bce(g, fwd.logits, batch.label_matrix());
}

ad::NodeId Model::loss_node(ad::Graph& g, const data::EncodedBatch& batch,
                            bool training) {
  Rng rng(Rng::seed_mix(cfg_.seed, 0x6c6f7373));
  Forward f = forward(g, batch, training, rng);
  return loss_node(g, f, batch);
}

Tensor Model::predict_logits(const data::EncodedBatch& batch) {
  ad::Graph g;
  Rng unused(0);
  Forward f = forward(g, batch, false, unused);
  Tensor out = g.val(f.logits);
  out.require_finite("logits");
  return out;
}

Tensor Model::predict_probs(const data::EncodedBatch& batch) {
  ad::Graph g;
  Rng unused(0);
  Forward f = forward(g, batch, false, unused);
  ad::NodeId probs = cfg_.task == Task::single ? ad::softmax_rows(g, f.logits)
                                               : ad::sigmoid(g, f.logits);
  Tensor out = g.val(probs);
  out.require_finite("probabilities");
  return out;
}

Tensor Model::predict_features(const data::EncodedBatch& batch) {
  ad::Graph g;
  Rng unused(0);
  Forward f = forward(g, batch, false, unused);
  Tensor out = g.val(f.features);
  out.require_finite("features");
  return out;
}

data::EncodedBatch Model::encode(
    const std::vector<const data::Story*>& stories) const {
  return data::encode_batch(stories, vocab_,
                            cfg_.use_char ? &*charvocab_ : nullptr, cfg_.t_max,
                            cfg_.c_max);
}

std::array<bool, 3> predict_multi(const double* activations, double threshold) {
  std::array<bool, 3> out{};
  for (std::size_t c = 0; c < 3; ++c) out[c] = activations[c] >= threshold;
  return out;
}

std::vector<std::array<bool, 3>> predict_multi(const Tensor& activations,
                                               double threshold) {
  if (activations.rank() != 2 || activations.dim(1) != 3)
    throw ConfigError("predict_multi expects a {B,3} activation matrix");
  std::vector<std::array<bool, 3>> out(activations.dim(0));
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = predict_multi(activations.data() + i * 3, threshold);
  return out;
}

}  // namespace safetext::models
