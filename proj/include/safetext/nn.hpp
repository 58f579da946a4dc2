#pragma once

#include <cstdint>
#include <vector>

#include "safetext/graph.hpp"
#include "safetext/rng.hpp"

namespace safetext::nn {

// One convolution filter bank: `weight` is {width*D, F} (taps stacked along
// rows, tap o occupying rows [o*D, (o+1)*D)), `bias` is {F}.
struct ConvFilterParams {
  std::size_t width;
  ad::NodeId weight;
  ad::NodeId bias;
};

// x {B,T,D}: valid convolution over time per filter bank, then max over
// positions; pooled outputs concatenated bank by bank -> {B, sum F}.
// Sequences shorter than the largest width are treated as zero-padded up to
// that width. Ties in the max go to the earliest position.
ad::NodeId conv_max_pool(ad::Graph& g, ad::NodeId x,
                         const std::vector<ConvFilterParams>& banks);

// Same filter banks without pooling: per-position feature vectors aligned to
// window starts, truncated to the shortest bank length so banks concatenate
// per position -> {B, T', sum F} with T' = max(T, max_width) - max_width + 1.
ad::NodeId conv_seq(ad::Graph& g, ad::NodeId x,
                    const std::vector<ConvFilterParams>& banks);

struct LstmDirWeights {
  ad::NodeId w_in;   // {Din, 4H}, gate order [input, forget, candidate, output]
  ad::NodeId w_rec;  // {H, 4H}
  ad::NodeId bias;   // {4H}
};

struct LstmLayerWeights {
  LstmDirWeights fwd;
  LstmDirWeights bwd;  // read only when bidirectional
};

struct LstmOut {
  ad::NodeId seq;    // {B, T, H*dirs}; per-step hidden states
  ad::NodeId final;  // {B, H*dirs}; last valid step per direction
};

// Stacked (optionally bidirectional) LSTM over x {B,T,D}. Steps at or beyond
// an example's length carry the previous state through, so the forward
// direction's state at T-1 equals its state at length-1 and the backward
// direction starts at length-1; `final` concatenates both directions.
LstmOut lstm(ad::Graph& g, ad::NodeId x,
             const std::vector<std::int32_t>& lengths,
             const std::vector<LstmLayerWeights>& layers, bool bidirectional);

// Inverted dropout: in training each element survives with probability
// keep_prob and is scaled by 1/keep_prob; identity otherwise.
ad::NodeId dropout(ad::Graph& g, ad::NodeId x, double keep_prob, bool training,
                   Rng& rng);
ad::NodeId dropout_seeded(ad::Graph& g, ad::NodeId x, double keep_prob,
                          bool training, std::uint64_t seed);

// Uniform Glorot fan-based fill.
void glorot_fill(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng);

}  // namespace safetext::nn
