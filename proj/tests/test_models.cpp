#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "common/testutil.hpp"
#include "safetext/data/batch.hpp"
#include "safetext/data/dataset.hpp"
#include "safetext/data/vocab.hpp"
#include "safetext/errors.hpp"
#include "safetext/models/baselines.hpp"
#include "safetext/models/config.hpp"
#include "safetext/models/model.hpp"

using namespace safetext;
using models::Arch;
using models::ModelConfig;
using models::Task;

namespace {

data::Vocabulary tiny_vocab() {
  std::vector<std::vector<std::string>> corpus = {
      {"the", "driver", "kept", "staring"},
      {"a", "man", "made", "a", "comment"},
      {"he", "tried", "to", "grab", "my", "arm"},
      {"the", "crowd", "was", "dense"},
  };
  return data::Vocabulary::build(corpus, 64);
}

data::CharVocabulary tiny_charvocab() {
  std::vector<std::vector<std::string>> corpus = {
      {"abcdefghijklmnopqrstuvwxyz", ".", ","}};
  return data::CharVocabulary::build(corpus);
}

ModelConfig small_config(Arch arch, Task task) {
  ModelConfig cfg = ModelConfig::preset(arch, task);
  cfg.vocab_size = 64;
  cfg.embedding_dim = 6;
  cfg.filters_per_width = 3;
  cfg.filter_widths = {2, 3};
  cfg.lstm_hidden = 5;
  cfg.lstm_layers = (arch == Arch::rnn) ? 2 : 1;
  cfg.char_embedding_dim = 4;
  cfg.char_filters_per_width = 2;
  cfg.char_filter_widths = {2, 3};
  cfg.t_max = 12;
  cfg.c_max = 8;
  cfg.seed = 11;
  return cfg;
}

std::vector<data::Story> sample_stories() {
  return {
      {"The driver kept staring at me.", "", {false, true, false}},
      {"A man made a rude comment and tried to grab my arm.",
       "",
       {true, false, true}},
      {"The crowd was dense.", "", {false, false, false}},
  };
}

std::vector<const data::Story*> ptrs(const std::vector<data::Story>& v) {
  std::vector<const data::Story*> p;
  for (const auto& s : v) p.push_back(&s);
  return p;
}

}  // namespace

TEST_CASE("single-label probability rows sum to one") {
  auto vocab = tiny_vocab();
  for (Arch arch : {Arch::cnn, Arch::rnn, Arch::cnn_rnn}) {
    ModelConfig cfg = small_config(arch, Task::single);
    models::Model model(cfg, vocab, std::nullopt);
    auto stories = sample_stories();
    auto batch = model.encode(ptrs(stories));
    Tensor probs = model.predict_probs(batch);
    REQUIRE(probs.dim(0) == 3);
    REQUIRE(probs.dim(1) == 2);
    for (int i = 0; i < 3; ++i) {
      const double s = probs.at(i, 0) + probs.at(i, 1);
      CHECK(std::abs(s - 1.0) < 1e-12);
      CHECK(probs.at(i, 0) > 0.0);
      CHECK(probs.at(i, 1) > 0.0);
    }
  }
}

TEST_CASE("zeroed final layer yields uniform probabilities") {
  auto vocab = tiny_vocab();

  ModelConfig cfg = small_config(Arch::cnn, Task::single);
  models::Model single(cfg, vocab, std::nullopt);
  single.params().find("fc.w")->value.fill(0.0);
  single.params().find("fc.b")->value.fill(0.0);
  auto stories = sample_stories();
  auto batch = single.encode(ptrs(stories));
  Tensor p = single.predict_probs(batch);
  for (int i = 0; i < 3; ++i)
    for (int c = 0; c < 2; ++c) CHECK(std::abs(p.at(i, c) - 0.5) < 1e-15);

  ModelConfig mcfg = small_config(Arch::cnn, Task::multi);
  models::Model multi(mcfg, vocab, std::nullopt);
  multi.params().find("fc.w")->value.fill(0.0);
  multi.params().find("fc.b")->value.fill(0.0);
  Tensor q = multi.predict_probs(multi.encode(ptrs(stories)));
  REQUIRE(q.dim(1) == 3);
  for (int i = 0; i < 3; ++i)
    for (int c = 0; c < 3; ++c) CHECK(std::abs(q.at(i, c) - 0.5) < 1e-15);
}

TEST_CASE("construction and prediction are bitwise deterministic") {
  auto vocab = tiny_vocab();
  auto cv = tiny_charvocab();
  for (Arch arch :
       {Arch::cnn, Arch::rnn, Arch::cnn_rnn, Arch::cnn_rnn_bidirec_char}) {
    ModelConfig cfg = small_config(arch, Task::multi);
    std::optional<data::CharVocabulary> oc;
    if (cfg.use_char) oc = cv;
    models::Model a(cfg, vocab, oc);
    models::Model b(cfg, vocab, oc);
    CHECK(a.params().value_fingerprint() == b.params().value_fingerprint());

    auto stories = sample_stories();
    Tensor pa = a.predict_probs(a.encode(ptrs(stories)));
    Tensor pb = b.predict_probs(b.encode(ptrs(stories)));
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i)
      CHECK(pa.vec()[i] == pb.vec()[i]);
  }
}

TEST_CASE("different seeds give different weights") {
  auto vocab = tiny_vocab();
  ModelConfig cfg = small_config(Arch::cnn, Task::single);
  models::Model a(cfg, vocab, std::nullopt);
  cfg.seed = 12;
  models::Model b(cfg, vocab, std::nullopt);
  CHECK(a.params().value_fingerprint() != b.params().value_fingerprint());
}

TEST_CASE("cnn-rnn preset keeps 300 features per position") {
  ModelConfig cfg = ModelConfig::preset(Arch::cnn_rnn, Task::single);
  CHECK(cfg.conv_output_dim() == 300);
  CHECK(cfg.lstm_hidden == 300);
  ModelConfig bc = ModelConfig::preset(Arch::cnn_rnn_bidirec_char, Task::multi);
  CHECK(bc.char_output_dim() == 300);
  CHECK(bc.bidirectional);
  CHECK(bc.use_char);
}

TEST_CASE("zero-weight lstm head ignores the input") {
  auto vocab = tiny_vocab();
  ModelConfig cfg = small_config(Arch::rnn, Task::single);
  models::Model model(cfg, vocab, std::nullopt);
  for (std::size_t i = 0; i < model.params().size(); ++i) {
    auto& p = model.params().at(i);
    if (p.name.rfind("lstm.", 0) == 0) p.value.fill(0.0);
  }
  auto stories = sample_stories();
  Tensor logits = model.predict_logits(model.encode(ptrs(stories)));
  for (int c = 0; c < 2; ++c) {
    CHECK(std::abs(logits.at(0, c) - logits.at(1, c)) < 1e-12);
    CHECK(std::abs(logits.at(0, c) - logits.at(2, c)) < 1e-12);
  }
}

TEST_CASE("embedding gradient is sparse over used rows") {
  auto vocab = tiny_vocab();
  ModelConfig cfg = small_config(Arch::cnn, Task::single);
  models::Model model(cfg, vocab, std::nullopt);
  std::vector<data::Story> one = {{"the driver kept staring", "", {true, false, false}}};
  auto batch = model.encode(ptrs(one));

  ad::Graph g;
  model.params().zero_grad();
  ad::NodeId loss = model.loss_node(g, batch, false);
  g.backward(loss);
  const Tensor& grad = model.params().find("embedding")->grad;

  std::vector<bool> used(vocab.size(), false);
  for (int32_t id : *batch.word_ids) used[static_cast<std::size_t>(id)] = true;
  const auto D = static_cast<std::size_t>(cfg.embedding_dim);
  for (std::size_t r = 0; r < vocab.size(); ++r) {
    double norm = 0.0;
    for (std::size_t d = 0; d < D; ++d) {
      const double v = grad.vec()[r * D + d];
      norm += v * v;
    }
    if (!used[r]) {
      CHECK(norm == 0.0);
    }
  }
  // The words that do appear should receive gradient somewhere.
  double used_norm = 0.0;
  for (std::size_t r = 0; r < vocab.size(); ++r) {
    if (!used[r]) continue;
    for (std::size_t d = 0; d < D; ++d) {
      const double v = grad.vec()[r * D + d];
      used_norm += v * v;
    }
  }
  CHECK(used_norm > 0.0);
}

TEST_CASE("char branch output feeds the token dimension") {
  auto vocab = tiny_vocab();
  auto cv = tiny_charvocab();
  ModelConfig cfg = small_config(Arch::cnn_rnn_bidirec_char, Task::multi);
  models::Model model(cfg, vocab, cv);
  CHECK(cfg.char_output_dim() == 4);

  std::vector<data::Story> stories = {
      {"staring staring", "", {false, true, false}}};
  auto batch = model.encode(ptrs(stories));
  REQUIRE(batch.char_ids != nullptr);

  ad::Graph g;
  ad::NodeId ch = model.char_features(g, batch);
  const Tensor& cf = g.val(ch);
  REQUIRE(cf.rank() == 3);
  CHECK(cf.dim(0) == 1);
  CHECK(cf.dim(1) == batch.t);
  CHECK(cf.dim(2) == cfg.char_output_dim());
  // Identical words produce identical per-token character vectors.
  for (std::size_t d = 0; d < cfg.char_output_dim(); ++d)
    CHECK(cf.at(0, 0, d) == cf.at(0, 1, d));
}

TEST_CASE("all-pad rows still produce a deterministic constant vector") {
  auto vocab = tiny_vocab();
  auto cv = tiny_charvocab();
  ModelConfig cfg = small_config(Arch::cnn_rnn_bidirec_char, Task::multi);
  models::Model model(cfg, vocab, cv);
  std::vector<data::Story> stories = {
      {"staring", "", {false, true, false}},
      {"staring staring staring", "", {false, true, false}}};
  auto batch = model.encode(ptrs(stories));
  REQUIRE(batch.t == 3);

  ad::Graph g;
  ad::NodeId ch = model.char_features(g, batch);
  const Tensor& cf = g.val(ch);
  // Rows 1 and 2 of story 0 are padding; both should match each other.
  for (std::size_t d = 0; d < cfg.char_output_dim(); ++d)
    CHECK(cf.at(0, 1, d) == cf.at(0, 2, d));
}

TEST_CASE("multi-label thresholding follows the inclusive rule") {
  {
    const double probs[3] = {0.9, 0.4, 0.5};
    auto out = models::predict_multi(probs, 0.5);
    CHECK(out == std::array<bool, 3>{true, false, true});
  }
  {
    const double probs[3] = {0.5, 0.5, 0.5};
    auto out = models::predict_multi(probs, 0.5);
    CHECK(out == std::array<bool, 3>{true, true, true});
  }
  {
    Tensor p = Tensor::from({2, 3}, {0.31, 0.44, 0.7, 0.29, 0.46, 0.69});
    auto low = models::predict_multi(p, 0.30);
    auto high = models::predict_multi(p, 0.45);
    CHECK(low[0] == std::array<bool, 3>{true, true, true});
    CHECK(low[1] == std::array<bool, 3>{false, true, true});
    CHECK(high[0] == std::array<bool, 3>{false, false, true});
    CHECK(high[1] == std::array<bool, 3>{false, true, true});
    // Raising the threshold can only turn predictions off.
    for (double t = 0.30; t <= 0.70; t += 0.05) {
      auto a = models::predict_multi(p, t);
      auto b = models::predict_multi(p, t + 0.05);
      for (int i = 0; i < 2; ++i)
        for (int c = 0; c < 3; ++c)
          if (b[i][c]) CHECK(a[i][c]);
    }
  }
}

TEST_CASE("model loss gradients match finite differences") {
  auto vocab = tiny_vocab();
  auto cv = tiny_charvocab();
  auto stories = sample_stories();
  Rng pick(99);

  for (Arch arch :
       {Arch::cnn, Arch::rnn, Arch::cnn_rnn, Arch::cnn_rnn_bidirec_char}) {
    for (Task task : {Task::single, Task::multi}) {
      ModelConfig cfg = small_config(arch, task);
      cfg.keep_prob = 1.0;  // dropout off so the loss is deterministic
      std::optional<data::CharVocabulary> oc;
      if (cfg.use_char) oc = cv;
      models::Model model(cfg, vocab, oc);
      auto batch = model.encode(ptrs(stories));

      auto build = [&](ad::Graph& g) {
        return model.loss_node(g, batch, false);
      };
      auto report = testutil::fd_check_params(model.params(), build, 1e-5, 60, &pick);
      INFO("arch=", models::arch_name(arch), " task=", static_cast<int>(task),
           " max_rel=", report.max_rel);
      CHECK(report.checked > 0);
      CHECK(report.max_rel < 1e-4);
    }
  }
}

TEST_CASE("prediction does not mutate parameters") {
  auto vocab = tiny_vocab();
  ModelConfig cfg = small_config(Arch::cnn_rnn, Task::multi);
  models::Model model(cfg, vocab, std::nullopt);
  auto stories = sample_stories();
  const std::uint64_t before = model.params().value_fingerprint();
  (void)model.predict_probs(model.encode(ptrs(stories)));
  (void)model.predict_features(model.encode(ptrs(stories)));
  CHECK(model.params().value_fingerprint() == before);
}

TEST_CASE("feature tap matches the fc input width") {
  auto vocab = tiny_vocab();
  for (Arch arch : {Arch::cnn, Arch::rnn, Arch::cnn_rnn}) {
    ModelConfig cfg = small_config(arch, Task::single);
    models::Model model(cfg, vocab, std::nullopt);
    auto stories = sample_stories();
    Tensor f = model.predict_features(model.encode(ptrs(stories)));
    CHECK(f.dim(0) == 3);
    CHECK(f.dim(1) == model.feature_dim());
  }
}

TEST_CASE("config validation rejects bad settings") {
  ModelConfig cfg = ModelConfig::preset(Arch::cnn, Task::single);
  cfg.category = 7;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = ModelConfig::preset(Arch::cnn, Task::single);
  cfg.filter_widths = {0};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = ModelConfig::preset(Arch::cnn, Task::single);
  cfg.filter_widths = {cfg.t_max + 1};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = ModelConfig::preset(Arch::cnn, Task::single);
  cfg.keep_prob = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = ModelConfig::preset(Arch::cnn, Task::single);
  cfg.threshold = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = ModelConfig::preset(Arch::cnn, Task::single);
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("config json round-trips through overrides") {
  ModelConfig cfg = ModelConfig::preset(Arch::cnn_rnn_bidirec_char, Task::multi);
  cfg.seed = 77;
  cfg.threshold = 0.35;
  auto j = cfg.to_json();
  ModelConfig back = ModelConfig::from_json(j);
  CHECK(back.arch == cfg.arch);
  CHECK(back.task == cfg.task);
  CHECK(back.seed == 77);
  CHECK(back.threshold == doctest::Approx(0.35));
  CHECK(back.to_json() == j);

  nlohmann::json partial = {{"arch", "lstm"}, {"task", "single"},
                            {"lstm_hidden", 40}};
  ModelConfig p = ModelConfig::from_json(partial);
  CHECK(p.arch == Arch::rnn);
  CHECK(p.lstm_hidden == 40);
  CHECK(p.lstm_layers == 2);
  CHECK(p.batch_size == 64);

  nlohmann::json bad = {{"arch", "transformer"}, {"task", "single"}};
  CHECK_THROWS_AS(ModelConfig::from_json(bad), ConfigError);
}

TEST_CASE("char model requires char vocabulary and char ids") {
  auto vocab = tiny_vocab();
  ModelConfig cfg = small_config(Arch::cnn_rnn_bidirec_char, Task::multi);
  CHECK_THROWS_AS(models::Model(cfg, vocab, std::nullopt), ConfigError);
}

TEST_CASE("tfidf rows are l2 normalized and train-vocab bound") {
  auto stories = sample_stories();
  auto train = ptrs(stories);
  auto vec = models::TfidfVectorizer::fit(train, 100);
  CHECK(vec.dim() > 0);
  for (const auto* s : train) {
    auto row = vec.transform(*s);
    double ss = 0.0;
    for (const auto& [j, v] : row) {
      CHECK(j < vec.dim());
      ss += v * v;
    }
    CHECK(std::abs(ss - 1.0) < 1e-12);
  }
  data::Story unseen{"zzz qqq www", "", {false, false, false}};
  CHECK(vec.transform(unseen).empty());
}

TEST_CASE("tfidf max_features keeps the most frequent terms") {
  std::vector<data::Story> stories = {
      {"alpha beta", "", {false, false, false}},
      {"alpha beta gamma", "", {false, false, false}},
      {"alpha delta", "", {false, false, false}},
  };
  auto vec = models::TfidfVectorizer::fit(ptrs(stories), 2);
  REQUIRE(vec.dim() == 2);
  CHECK(vec.terms()[0] == "alpha");
  CHECK(vec.terms()[1] == "beta");
}

TEST_CASE("logistic regression separates a linear toy problem") {
  std::vector<data::Story> stories;
  std::vector<int> y;
  for (int i = 0; i < 20; ++i) {
    if (i % 2 == 0) {
      stories.push_back({"a harmless quiet walk home", "", {false, false, false}});
      y.push_back(0);
    } else {
      stories.push_back({"he kept staring and staring", "", {false, true, false}});
      y.push_back(1);
    }
  }
  auto train = ptrs(stories);
  auto vec = models::TfidfVectorizer::fit(train, 100);
  auto x = vec.transform(train);
  auto lr = models::LogisticModel::fit(x, y, vec.dim());
  int correct = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (lr.predict(x[i]) == y[i]) ++correct;
  CHECK(correct == static_cast<int>(x.size()));
  CHECK(lr.prob(x[1]) > 0.5);
  CHECK(lr.prob(x[0]) < 0.5);
}

TEST_CASE("single-class training sets are rejected") {
  std::vector<models::TfidfVectorizer::SparseRow> x = {{{0, 1.0}}, {{1, 1.0}}};
  std::vector<int> y = {1, 1};
  CHECK_THROWS_AS(models::LogisticModel::fit(x, y, 2), DataError);
  CHECK_THROWS_AS(models::GaussianNB::fit(x, y, 2), DataError);
}

TEST_CASE("gaussian nb places the boundary between symmetric means") {
  // One feature, class 0 centered at -1, class 1 at +1, equal variance.
  std::vector<models::TfidfVectorizer::SparseRow> x = {
      {{0, -1.2}}, {{0, -0.8}}, {{0, 0.8}}, {{0, 1.2}}};
  std::vector<int> y = {0, 0, 1, 1};
  auto nb = models::GaussianNB::fit(x, y, 1);
  CHECK(nb.predict({{0, -0.5}}) == 0);
  CHECK(nb.predict({{0, 0.5}}) == 1);
  // At x = 0 the log joints are equal up to floating point noise.
  CHECK(std::abs(nb.log_joint({{0, 0.0}}, 0) - nb.log_joint({{0, 0.0}}, 1)) <
        1e-9);
}

TEST_CASE("gaussian nb variance floor handles constant features") {
  std::vector<models::TfidfVectorizer::SparseRow> x = {
      {{0, 1.0}, {1, 0.3}}, {{0, 1.0}, {1, 0.4}},
      {{0, 1.0}, {1, 0.6}}, {{0, 1.0}, {1, 0.7}}};
  std::vector<int> y = {0, 0, 1, 1};
  auto nb = models::GaussianNB::fit(x, y, 2);
  CHECK(std::isfinite(nb.log_joint(x[0], 0)));
  CHECK(nb.predict(x[0]) == 0);
  CHECK(nb.predict(x[3]) == 1);
}

TEST_CASE("gaussian nb counts zero entries in moments") {
  // Feature 0 is nonzero only in one of two class-0 rows: mean must be 0.25.
  std::vector<models::TfidfVectorizer::SparseRow> x = {
      {{0, 0.5}}, {}, {{1, 1.0}}, {{1, 1.0}}};
  std::vector<int> y = {0, 0, 1, 1};
  auto nb = models::GaussianNB::fit(x, y, 2);
  // mean0 = 0.25, var0 = ((0.5-0.25)^2 + (0-0.25)^2)/2 = 0.0625.
  // Verify through the score of a probe row (log joint difference shifts
  // with the mean): probe at exactly the mean maximizes the class-0 term.
  const double at_mean = nb.log_joint({{0, 0.25}}, 0);
  const double off_mean = nb.log_joint({{0, 0.6}}, 0);
  CHECK(at_mean > off_mean);
  const double lo = nb.log_joint({{0, 0.24}}, 0);
  const double hi = nb.log_joint({{0, 0.26}}, 0);
  CHECK(at_mean >= lo);
  CHECK(at_mean >= hi);
}
