#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "safetext/data/dataset.hpp"
#include "safetext/models/model.hpp"
#include "safetext/train/metrics.hpp"

namespace safetext::train {

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double dev_metric = 0.0;  // accuracy (single) or Hamming score (multi)
  bool improved = false;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  std::vector<double> first_epoch_batch_losses;
  std::size_t best_epoch = 0;
  double best_metric = 0.0;
  std::size_t epochs_run = 0;
  bool early_stopped = false;
  nlohmann::ordered_json to_json() const;
};

struct FitOptions {
  bool quiet = false;
  // Called after each epoch with the record just appended to the history.
  std::function<void(const EpochRecord&)> on_epoch;
};

// Minibatch training with gradient clipping, Adam, per-epoch dev evaluation,
// and early stopping. The model is left holding the best-epoch weights.
TrainResult fit(models::Model& model,
                const std::vector<const data::Story*>& train,
                const std::vector<const data::Story*>& dev,
                const FitOptions& opts = {});

// Inference over an arbitrary story list, batched at the model's batch size.
Tensor predict_probs_all(models::Model& model,
                         const std::vector<const data::Story*>& stories);
std::vector<int> predict_single(models::Model& model,
                                const std::vector<const data::Story*>& stories);
std::vector<std::array<bool, 3>> predict_multi_stories(
    models::Model& model, const std::vector<const data::Story*>& stories,
    double threshold);

std::vector<int> gold_single(const std::vector<const data::Story*>& stories,
                             std::size_t category);
std::vector<std::array<bool, 3>> gold_multi(
    const std::vector<const data::Story*>& stories);

struct ThresholdPoint {
  double threshold = 0.0;
  double hamming_score = 0.0;
};

struct ThresholdResult {
  double best_threshold = 0.0;
  double best_hamming = 0.0;
  std::vector<ThresholdPoint> grid;
  nlohmann::ordered_json to_json() const;
};

// Sweeps t in {0.30, 0.35, ..., 0.70} on the dev set; ties keep the smallest.
ThresholdResult tune_threshold(models::Model& model,
                               const std::vector<const data::Story*>& dev);

}  // namespace safetext::train
