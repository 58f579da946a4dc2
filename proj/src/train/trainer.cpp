#include "safetext/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "safetext/errors.hpp"
#include "safetext/optim.hpp"

namespace safetext::train {

namespace {

std::vector<const data::Story*> gather(
    const std::vector<const data::Story*>& stories,
    const std::vector<std::size_t>& order, std::size_t begin, std::size_t end) {
  std::vector<const data::Story*> out;
  out.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) out.push_back(stories[order[i]]);
  return out;
}

double dev_metric(models::Model& model,
                  const std::vector<const data::Story*>& dev) {
  const auto& cfg = model.config();
  if (cfg.task == models::Task::single) {
    auto pred = predict_single(model, dev);
    auto gold = gold_single(dev, cfg.category);
    return evaluate_single(pred, gold).accuracy;
  }
  auto pred = predict_multi_stories(model, dev, cfg.threshold);
  auto gold = gold_multi(dev);
  return evaluate_multi(pred, gold).hamming_score;
}

}  // namespace

TrainResult fit(models::Model& model,
                const std::vector<const data::Story*>& train,
                const std::vector<const data::Story*>& dev,
                const FitOptions& opts) {
  if (train.empty()) throw DataError("training set is empty");
  if (dev.empty()) throw DataError("dev set is empty");
  const auto& cfg = model.config();

  Rng shuffle_rng(Rng::seed_mix(cfg.seed, 0x73687566));
  Rng dropout_rng(Rng::seed_mix(cfg.seed, 0x64726f70));
  optim::AdamConfig acfg;
  acfg.lr = cfg.learning_rate;
  optim::Adam adam(model.params(), acfg);

  TrainResult result;
  std::vector<Tensor> best_values;
  std::size_t since_best = 0;

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < train.size();
         begin += cfg.batch_size) {
      const std::size_t end = std::min(begin + cfg.batch_size, train.size());
      auto batch = model.encode(gather(train, order, begin, end));

      ad::Graph g;
      auto fwd = model.forward(g, batch, true, dropout_rng);
      ad::NodeId loss = model.loss_node(g, fwd, batch);
      const double loss_val = g.val(loss)[0];
      if (!std::isfinite(loss_val))
        throw NumericError("training loss is not finite at epoch " +
                           std::to_string(epoch));
      model.params().zero_grad();
      g.backward(loss);
      optim::clip_global_norm(model.params(), cfg.clip_norm);
      adam.step(model.params());

      loss_sum += loss_val;
      ++batches;
      if (epoch == 1) result.first_epoch_batch_losses.push_back(loss_val);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(batches);
    rec.dev_metric = dev_metric(model, dev);
    rec.improved =
        result.history.empty() || rec.dev_metric > result.best_metric;
    if (rec.improved) {
      result.best_metric = rec.dev_metric;
      result.best_epoch = epoch;
      since_best = 0;
      best_values.clear();
      for (std::size_t i = 0; i < model.params().size(); ++i)
        best_values.push_back(model.params().at(i).value);
    } else {
      ++since_best;
    }
    result.history.push_back(rec);
    result.epochs_run = epoch;
    if (!opts.quiet)
      std::fprintf(stderr, "epoch %zu train_loss %.6f dev %.4f%s\n", epoch,
                   rec.train_loss, rec.dev_metric, rec.improved ? " *" : "");
    if (opts.on_epoch) opts.on_epoch(rec);

    if (since_best >= cfg.patience) {
      result.early_stopped = true;
      break;
    }
  }

  for (std::size_t i = 0; i < best_values.size(); ++i)
    model.params().at(i).value = best_values[i];
  return result;
}

nlohmann::ordered_json TrainResult::to_json() const {
  nlohmann::ordered_json j;
  j["epochs_run"] = epochs_run;
  j["best_epoch"] = best_epoch;
  j["best_dev_metric"] = best_metric;
  j["early_stopped"] = early_stopped;
  nlohmann::ordered_json hist = nlohmann::ordered_json::array();
  for (const auto& r : history)
    hist.push_back({{"epoch", r.epoch},
                    {"train_loss", r.train_loss},
                    {"dev_metric", r.dev_metric},
                    {"improved", r.improved}});
  j["history"] = hist;
  j["first_epoch_batch_losses"] = first_epoch_batch_losses;
  return j;
}

Tensor predict_probs_all(models::Model& model,
                         const std::vector<const data::Story*>& stories) {
  if (stories.empty()) throw DataError("prediction set is empty");
  const std::size_t classes = model.config().num_classes();
  Tensor out({stories.size(), classes});
  for (std::size_t begin = 0; begin < stories.size();
       begin += model.config().batch_size) {
    const std::size_t end =
        std::min(begin + model.config().batch_size, stories.size());
    std::vector<const data::Story*> chunk(stories.begin() + begin,
                                          stories.begin() + end);
    Tensor probs = model.predict_probs(model.encode(chunk));
    std::copy_n(probs.data(), probs.size(), out.data() + begin * classes);
  }
  return out;
}

std::vector<int> predict_single(
    models::Model& model, const std::vector<const data::Story*>& stories) {
  if (model.config().task != models::Task::single)
    throw ConfigError("predict_single requires a single-label model");
  Tensor probs = predict_probs_all(model, stories);
  std::vector<int> pred(stories.size());
  for (std::size_t i = 0; i < pred.size(); ++i)
    pred[i] = probs.at(i, 1) > probs.at(i, 0) ? 1 : 0;
  return pred;
}

std::vector<std::array<bool, 3>> predict_multi_stories(
    models::Model& model, const std::vector<const data::Story*>& stories,
    double threshold) {
  if (model.config().task != models::Task::multi)
    throw ConfigError("predict_multi requires a multi-label model");
  Tensor probs = predict_probs_all(model, stories);
  return models::predict_multi(probs, threshold);
}

std::vector<int> gold_single(const std::vector<const data::Story*>& stories,
                             std::size_t category) {
  if (category >= 3) throw ConfigError("category index out of range");
  std::vector<int> gold(stories.size());
  for (std::size_t i = 0; i < stories.size(); ++i)
    gold[i] = stories[i]->labels[category] ? 1 : 0;
  return gold;
}

std::vector<std::array<bool, 3>> gold_multi(
    const std::vector<const data::Story*>& stories) {
  std::vector<std::array<bool, 3>> gold(stories.size());
  for (std::size_t i = 0; i < stories.size(); ++i) gold[i] = stories[i]->labels;
  return gold;
}

ThresholdResult tune_threshold(models::Model& model,
                               const std::vector<const data::Story*>& dev) {
  if (model.config().task != models::Task::multi)
    throw ConfigError("threshold tuning applies to the multi-label task");
  if (dev.empty()) throw DataError("dev set is empty");

  Tensor probs = predict_probs_all(model, dev);
  auto gold = gold_multi(dev);

  ThresholdResult result;
  result.best_hamming = -1.0;
  for (int step = 0; step <= 8; ++step) {
    const double t = 0.30 + 0.05 * step;
    auto pred = models::predict_multi(probs, t);
    const double h = evaluate_multi(pred, gold).hamming_score;
    result.grid.push_back({t, h});
    if (h > result.best_hamming) {
      result.best_hamming = h;
      result.best_threshold = t;
    }
  }
  return result;
}

nlohmann::ordered_json ThresholdResult::to_json() const {
  nlohmann::ordered_json j;
  j["best_threshold"] = best_threshold;
  j["best_hamming_score"] = best_hamming;
  nlohmann::ordered_json grid_json = nlohmann::ordered_json::array();
  for (const auto& p : grid)
    grid_json.push_back(
        {{"threshold", p.threshold}, {"hamming_score", p.hamming_score}});
  j["grid"] = grid_json;
  return j;
}

}  // namespace safetext::train
