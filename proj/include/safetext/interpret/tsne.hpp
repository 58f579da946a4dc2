#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "safetext/tensor.hpp"

namespace safetext::interpret {

struct TsneOptions {
  double perplexity = 30.0;
  std::size_t n_iters = 1000;
  double learning_rate = 200.0;
  double exaggeration = 12.0;
  std::size_t exaggeration_iters = 250;
  double momentum_start = 0.5;
  double momentum_final = 0.8;
  std::uint64_t seed = 1;
};

struct TsneResult {
  Tensor y;  // {N, 2}
  double initial_kl = 0.0;
  double final_kl = 0.0;
  std::size_t iterations = 0;
};

// Exact t-SNE to two dimensions: per-point bisection matches the conditional
// entropy to log(perplexity), gradient descent uses per-coordinate gains with
// momentum and early exaggeration.
TsneResult tsne(const Tensor& x, const TsneOptions& opts = {});

struct WordNeighbors {
  std::string word;
  // Cosine similarity in the original embedding space, most similar first.
  std::vector<std::pair<std::string, double>> original;
  // Euclidean distance in the projected plane, closest first.
  std::vector<std::pair<std::string, double>> projected;
};

// Nearest neighbors of each seed word; the seed itself is excluded. Unknown
// seeds raise DataError naming the closest spellings in the word list.
std::vector<WordNeighbors> seed_word_neighbors(
    const std::vector<std::string>& seeds,
    const std::vector<std::string>& words, const Tensor& embeddings,
    const Tensor& projected, std::size_t k);

}  // namespace safetext::interpret
