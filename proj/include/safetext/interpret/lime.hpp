#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "safetext/data/dataset.hpp"
#include "safetext/models/model.hpp"

namespace safetext::interpret {

struct LimeOptions {
  std::size_t n_samples = 1000;
  std::size_t top_k = 10;
  double kernel_width = 0.25;
  double ridge_l2 = 1e-3;
  std::uint64_t seed = 1;
};

struct LimeTerm {
  std::string token;
  std::size_t position = 0;
  double weight = 0.0;
};

struct LimeResult {
  std::vector<LimeTerm> terms;  // sorted by |weight| descending
  double intercept = 0.0;
  std::size_t samples_used = 0;
  std::size_t k_used = 0;
  bool k_reduced = false;  // story had fewer token positions than top_k
};

// Scores a batch of perturbed texts; must return one probability per text.
using TextScorer =
    std::function<std::vector<double>(const std::vector<std::string>&)>;

// Local linear explanation of any black-box text scorer. Token positions are
// the interpretable features; perturbations drop positions at random, samples
// are kernel-weighted by cosine distance from the full story, the top-k
// positions by ridge weight are refit with weighted least squares.
LimeResult lime_explain_text(const TextScorer& scorer, const std::string& text,
                             const LimeOptions& opts = {});

// Explains the model probability of class column `target`.
LimeResult lime_explain(models::Model& model, const data::Story& story,
                        std::size_t target, const LimeOptions& opts = {});

}  // namespace safetext::interpret
