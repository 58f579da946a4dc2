#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "common/testutil.hpp"
#include "safetext/data/dataset.hpp"
#include "safetext/errors.hpp"
#include "safetext/models/model.hpp"
#include "safetext/train/metrics.hpp"
#include "safetext/train/trainer.hpp"

using namespace safetext;
using models::Arch;
using models::ModelConfig;
using models::Task;

namespace {

// Independent multi-label oracle: count mismatched bits directly.
train::MultiEval bitcount_oracle(const std::vector<std::array<bool, 3>>& pred,
                                 const std::vector<std::array<bool, 3>>& gold) {
  train::MultiEval e;
  e.total = pred.size();
  std::size_t exact = 0;
  std::size_t wrong_bits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    int w = 0;
    for (int c = 0; c < 3; ++c) w += pred[i][c] != gold[i][c];
    wrong_bits += static_cast<std::size_t>(w);
    if (w == 0) ++exact;
  }
  e.exact_match = static_cast<double>(exact) / static_cast<double>(e.total);
  e.hamming_score = 1.0 - static_cast<double>(wrong_bits) /
                              (3.0 * static_cast<double>(e.total));
  return e;
}

std::array<bool, 3> bits(int mask) {
  return {(mask & 1) != 0, (mask & 2) != 0, (mask & 4) != 0};
}

std::vector<const data::Story*> ptrs(const std::vector<data::Story>& v) {
  std::vector<const data::Story*> p;
  for (const auto& s : v) p.push_back(&s);
  return p;
}

ModelConfig fast_config(Arch arch, Task task) {
  ModelConfig cfg = ModelConfig::preset(arch, task);
  cfg.vocab_size = 200;
  cfg.embedding_dim = 16;
  cfg.filters_per_width = 8;
  cfg.filter_widths = {2, 3};
  cfg.lstm_hidden = 16;
  cfg.lstm_layers = 1;
  cfg.char_embedding_dim = 6;
  cfg.char_filters_per_width = 4;
  cfg.char_filter_widths = {2, 3};
  cfg.t_max = 24;
  cfg.batch_size = 16;
  cfg.max_epochs = 12;
  cfg.patience = 12;
  cfg.learning_rate = 5e-3;
  cfg.seed = 5;
  return cfg;
}

}  // namespace

TEST_CASE("single-label metrics count correctly") {
  std::vector<int> pred = {1, 0, 1, 1};
  std::vector<int> gold = {1, 0, 0, 1};
  auto e = train::evaluate_single(pred, gold);
  CHECK(e.total == 4);
  CHECK(e.correct == 3);
  CHECK(e.accuracy == doctest::Approx(0.75));
  CHECK(e.precision == doctest::Approx(2.0 / 3.0));
  CHECK(e.recall == doctest::Approx(1.0));
  CHECK_THROWS_AS(train::evaluate_single({}, {}), DataError);
  CHECK_THROWS_AS(train::evaluate_single({1}, {1, 0}), ConfigError);
}

TEST_CASE("multi-label worked examples") {
  // One story, one wrong bit: Hamming loss 1/3, score 2/3.
  {
    std::vector<std::array<bool, 3>> pred = {{true, false, false}};
    std::vector<std::array<bool, 3>> gold = {{true, true, false}};
    auto e = train::evaluate_multi(pred, gold);
    CHECK(e.exact_match == 0.0);
    CHECK(std::abs(e.hamming_score - 2.0 / 3.0) < 1e-15);
  }
  // Two stories with one and two wrong bits: mean loss (1/3 + 2/3)/2 = 0.5.
  {
    std::vector<std::array<bool, 3>> pred = {{true, false, false},
                                             {false, true, false}};
    std::vector<std::array<bool, 3>> gold = {{true, true, false},
                                             {true, false, false}};
    auto e = train::evaluate_multi(pred, gold);
    CHECK(e.exact_match == 0.0);
    CHECK(std::abs(e.hamming_score - 0.5) < 1e-15);
  }
  // Perfect prediction.
  {
    std::vector<std::array<bool, 3>> both = {{true, false, true},
                                             {false, false, false}};
    auto e = train::evaluate_multi(both, both);
    CHECK(e.exact_match == 1.0);
    CHECK(e.hamming_score == 1.0);
  }
}

TEST_CASE("multi-label metrics match the bit-count oracle on random data") {
  Rng rng(314);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.bounded(12);
    std::vector<std::array<bool, 3>> pred(n), gold(n);
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = bits(static_cast<int>(rng.bounded(8)));
      gold[i] = bits(static_cast<int>(rng.bounded(8)));
    }
    auto got = train::evaluate_multi(pred, gold);
    auto want = bitcount_oracle(pred, gold);
    CHECK(got.exact_match == want.exact_match);
    CHECK(std::abs(got.hamming_score - want.hamming_score) < 1e-15);
    CHECK(got.exact_match <= got.hamming_score + 1e-15);
  }
}

TEST_CASE("per-category precision and recall") {
  std::vector<std::array<bool, 3>> pred = {{true, false, false},
                                           {true, true, false},
                                           {false, false, false}};
  std::vector<std::array<bool, 3>> gold = {{true, false, false},
                                           {false, true, false},
                                           {true, false, false}};
  auto e = train::evaluate_multi(pred, gold);
  CHECK(e.precision[0] == doctest::Approx(0.5));
  CHECK(e.recall[0] == doctest::Approx(0.5));
  CHECK(e.precision[1] == doctest::Approx(1.0));
  CHECK(e.recall[1] == doctest::Approx(1.0));
  CHECK(e.precision[2] == 0.0);
  CHECK(e.recall[2] == 0.0);
  auto j = e.to_json();
  CHECK(j["per_category"]["commenting"]["precision"] == doctest::Approx(0.5));
}

TEST_CASE("training reduces loss and improves dev accuracy on synthetic data") {
  auto stories = testutil::make_synth_corpus(160, 21);
  std::vector<const data::Story*> all = ptrs(stories);
  std::vector<const data::Story*> tr(all.begin(), all.begin() + 128);
  std::vector<const data::Story*> dev(all.begin() + 128, all.end());

  ModelConfig cfg = fast_config(Arch::cnn, Task::single);
  cfg.category = 1;  // keyword "stare" controls this bit
  models::Model model(cfg, data::build_vocab(tr, cfg.vocab_size),
                      std::nullopt);
  train::FitOptions opts;
  opts.quiet = true;
  auto result = train::fit(model, tr, dev, opts);

  REQUIRE(!result.history.empty());
  CHECK(result.first_epoch_batch_losses.size() ==
        (tr.size() + cfg.batch_size - 1) / cfg.batch_size);
  CHECK(result.history.back().train_loss <
        result.history.front().train_loss);
  CHECK(result.best_metric >= 0.9);
  CHECK(result.best_epoch >= 1);
  CHECK(result.epochs_run <= cfg.max_epochs);

  // The model retains the best-epoch weights.
  auto pred = train::predict_single(model, dev);
  auto gold = train::gold_single(dev, cfg.category);
  CHECK(train::evaluate_single(pred, gold).accuracy ==
        doctest::Approx(result.best_metric));
}

TEST_CASE("multi-label training fits the synthetic corpus") {
  auto stories = testutil::make_synth_corpus(160, 22);
  std::vector<const data::Story*> all = ptrs(stories);
  std::vector<const data::Story*> tr(all.begin(), all.begin() + 128);
  std::vector<const data::Story*> dev(all.begin() + 128, all.end());

  ModelConfig cfg = fast_config(Arch::cnn, Task::multi);
  models::Model model(cfg, data::build_vocab(tr, cfg.vocab_size),
                      std::nullopt);
  train::FitOptions opts;
  opts.quiet = true;
  auto result = train::fit(model, tr, dev, opts);
  CHECK(result.best_metric >= 0.9);

  auto pred = train::predict_multi_stories(model, dev, cfg.threshold);
  auto gold = train::gold_multi(dev);
  auto e = train::evaluate_multi(pred, gold);
  CHECK(e.hamming_score == doctest::Approx(result.best_metric));
}

TEST_CASE("training is deterministic for a fixed seed") {
  auto stories = testutil::make_synth_corpus(64, 23);
  std::vector<const data::Story*> all = ptrs(stories);
  std::vector<const data::Story*> tr(all.begin(), all.begin() + 48);
  std::vector<const data::Story*> dev(all.begin() + 48, all.end());

  ModelConfig cfg = fast_config(Arch::cnn, Task::multi);
  cfg.max_epochs = 3;
  auto vocab = data::build_vocab(tr, cfg.vocab_size);
  train::FitOptions opts;
  opts.quiet = true;

  models::Model a(cfg, vocab, std::nullopt);
  auto ra = train::fit(a, tr, dev, opts);
  models::Model b(cfg, vocab, std::nullopt);
  auto rb = train::fit(b, tr, dev, opts);

  CHECK(a.params().value_fingerprint() == b.params().value_fingerprint());
  REQUIRE(ra.history.size() == rb.history.size());
  for (std::size_t i = 0; i < ra.history.size(); ++i) {
    CHECK(ra.history[i].train_loss == rb.history[i].train_loss);
    CHECK(ra.history[i].dev_metric == rb.history[i].dev_metric);
  }
}

TEST_CASE("early stopping halts after patience epochs without improvement") {
  auto stories = testutil::make_synth_corpus(48, 24);
  std::vector<const data::Story*> all = ptrs(stories);
  std::vector<const data::Story*> tr(all.begin(), all.begin() + 32);
  std::vector<const data::Story*> dev(all.begin() + 32, all.end());

  ModelConfig cfg = fast_config(Arch::cnn, Task::single);
  cfg.learning_rate = 1e-15;  // weights barely move, so epoch 1 stays best
  cfg.max_epochs = 50;
  cfg.patience = 3;
  models::Model model(cfg, data::build_vocab(tr, cfg.vocab_size),
                      std::nullopt);
  train::FitOptions opts;
  opts.quiet = true;
  auto result = train::fit(model, tr, dev, opts);
  CHECK(result.early_stopped);
  CHECK(result.epochs_run == 1 + cfg.patience);
  CHECK(result.best_epoch == 1);
}

TEST_CASE("empty sets are rejected") {
  auto stories = testutil::make_synth_corpus(8, 25);
  auto all = ptrs(stories);
  ModelConfig cfg = fast_config(Arch::cnn, Task::single);
  models::Model model(cfg, data::build_vocab(all, cfg.vocab_size),
                      std::nullopt);
  CHECK_THROWS_AS(train::fit(model, {}, all), DataError);
  CHECK_THROWS_AS(train::fit(model, all, {}), DataError);
  CHECK_THROWS_AS(train::predict_probs_all(model, {}), DataError);
}

TEST_CASE("threshold tuning sweeps the grid and prefers the smallest tie") {
  auto stories = testutil::make_synth_corpus(96, 26);
  std::vector<const data::Story*> all = ptrs(stories);
  std::vector<const data::Story*> tr(all.begin(), all.begin() + 64);
  std::vector<const data::Story*> dev(all.begin() + 64, all.end());

  ModelConfig cfg = fast_config(Arch::cnn, Task::multi);
  models::Model model(cfg, data::build_vocab(tr, cfg.vocab_size),
                      std::nullopt);
  train::FitOptions opts;
  opts.quiet = true;
  train::fit(model, tr, dev, opts);

  auto result = train::tune_threshold(model, dev);
  REQUIRE(result.grid.size() == 9);
  CHECK(result.grid.front().threshold == doctest::Approx(0.30));
  CHECK(result.grid.back().threshold == doctest::Approx(0.70));
  for (const auto& p : result.grid) {
    CHECK(p.hamming_score <= result.best_hamming);
    if (p.hamming_score == result.best_hamming)
      CHECK(result.best_threshold <= p.threshold);
  }

  // Ties keep the smallest threshold: with an untrained constant model every
  // grid point scores the same, so 0.30 must win.
  ModelConfig flat_cfg = fast_config(Arch::cnn, Task::multi);
  models::Model flat(flat_cfg, data::build_vocab(tr, flat_cfg.vocab_size),
                     std::nullopt);
  flat.params().find("fc.w")->value.fill(0.0);
  flat.params().find("fc.b")->value.fill(0.0);
  auto tie = train::tune_threshold(flat, dev);
  CHECK(tie.best_threshold == doctest::Approx(0.30));

  // Single-label models cannot tune a multi-label threshold.
  ModelConfig scfg = fast_config(Arch::cnn, Task::single);
  models::Model single(scfg, data::build_vocab(tr, scfg.vocab_size),
                       std::nullopt);
  CHECK_THROWS_AS(train::tune_threshold(single, dev), ConfigError);
  CHECK_THROWS_AS(train::tune_threshold(model, {}), DataError);
}
