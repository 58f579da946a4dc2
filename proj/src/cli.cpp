#include "safetext/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "safetext/data/dataset.hpp"
#include "safetext/data/tokenize.hpp"
#include "safetext/errors.hpp"
#include "safetext/interpret/cluster.hpp"
#include "safetext/interpret/lime.hpp"
#include "safetext/interpret/saliency.hpp"
#include "safetext/interpret/svg.hpp"
#include "safetext/interpret/tsne.hpp"
#include "safetext/io/artifacts.hpp"
#include "safetext/models/model.hpp"
#include "safetext/train/metrics.hpp"
#include "safetext/train/trainer.hpp"

namespace fs = std::filesystem;

namespace safetext {

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  bool quiet = false;
};

std::string out_path(const CommonArgs& c, const std::string& name) {
  fs::create_directories(c.out_dir);
  return (fs::path(c.out_dir) / name).string();
}

void say(const CommonArgs& c, const std::string& line) {
  if (!c.quiet) std::fprintf(stdout, "%s\n", line.c_str());
}

// ---- dataset plumbing ------------------------------------------------------

struct SplitArgs {
  std::string train_file, dev_file, test_file;
};

struct LoadedData {
  data::LoadResult loaded;
  data::Splits splits;
};

LoadedData load_and_split(const std::string& data_path, const SplitArgs& sp,
                          std::uint64_t seed) {
  LoadedData out;
  out.loaded = data::load_stories(data_path);
  const bool any = !sp.train_file.empty() || !sp.dev_file.empty() ||
                   !sp.test_file.empty();
  const bool all = !sp.train_file.empty() && !sp.dev_file.empty() &&
                   !sp.test_file.empty();
  if (any && !all)
    throw ConfigError(
        "provide --split-train, --split-dev, and --split-test together");
  if (all) {
    out.splits = data::load_split_files(sp.train_file, sp.dev_file,
                                        sp.test_file,
                                        out.loaded.stories.size());
  } else {
    out.splits = data::stratified_split(out.loaded.stories.size(),
                                        out.loaded.stories, seed);
  }
  return out;
}

const std::vector<std::size_t>& subset_indices(const data::Splits& sp,
                                               const std::string& name) {
  if (name == "train") return sp.train;
  if (name == "dev") return sp.dev;
  if (name == "test") return sp.test;
  throw ConfigError("unknown subset: " + name);
}

std::vector<const data::Story*> subset_stories(const LoadedData& d,
                                               const std::string& name) {
  if (name == "all") {
    std::vector<const data::Story*> out;
    out.reserve(d.loaded.stories.size());
    for (const auto& s : d.loaded.stories) out.push_back(&s);
    return out;
  }
  return data::select(d.loaded.stories, subset_indices(d.splits, name));
}

// ---- config resolution -----------------------------------------------------

models::ModelConfig resolve_train_config(const CommonArgs& c,
                                         const std::string& arch,
                                         const std::string& task,
                                         int category) {
  nlohmann::json j;
  if (!c.config_path.empty()) {
    j = io::read_json_file(c.config_path);
    if (!j.is_object()) throw ConfigError("config file must hold an object");
  }
  if (!arch.empty()) j["arch"] = arch;
  if (!task.empty()) j["task"] = task;
  if (category >= 0) j["category"] = category;
  if (!j.contains("arch"))
    throw ConfigError("specify --arch or a config file with an \"arch\" key");
  if (!j.contains("task")) j["task"] = "multi";
  models::ModelConfig cfg = models::ModelConfig::from_json(j);
  if (c.seed) cfg.seed = *c.seed;
  cfg.validate();
  return cfg;
}

std::size_t load_pretrained_embeddings(models::Model& model,
                                       const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open embedding file: " + path);
  auto* emb = model.params().find("embedding");
  const std::size_t d = model.config().embedding_dim;
  std::string line;
  std::size_t loaded = 0, lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    std::vector<double> vals;
    double v;
    while (ss >> v) vals.push_back(v);
    if (vals.size() != d)
      throw DataError("embedding line " + std::to_string(lineno) + " has " +
                      std::to_string(vals.size()) + " values, expected " +
                      std::to_string(d));
    if (!model.vocab().contains(word)) continue;
    const auto id = static_cast<std::size_t>(model.vocab().id(word));
    std::copy(vals.begin(), vals.end(), emb->value.data() + id * d);
    ++loaded;
  }
  return loaded;
}

// ---- subcommand handlers ---------------------------------------------------

struct TrainArgs {
  std::string data_path;
  std::string arch, task;
  int category = -1;
  SplitArgs sp;
  std::string embeddings_path;
};

int cmd_train(const CommonArgs& c, const TrainArgs& a) {
  models::ModelConfig cfg = resolve_train_config(c, a.arch, a.task, a.category);
  auto d = load_and_split(a.data_path, a.sp, cfg.seed);
  auto tr = data::select(d.loaded.stories, d.splits.train);
  auto dev = data::select(d.loaded.stories, d.splits.dev);

  auto vocab = data::build_vocab(tr, cfg.vocab_size);
  std::optional<data::CharVocabulary> cv;
  if (cfg.use_char) cv = data::build_char_vocab(tr);
  models::Model model(cfg, std::move(vocab), std::move(cv));

  std::size_t pretrained = 0;
  if (!a.embeddings_path.empty())
    pretrained = load_pretrained_embeddings(model, a.embeddings_path);

  train::FitOptions opts;
  opts.quiet = c.quiet;
  auto result = train::fit(model, tr, dev, opts);

  const auto ck_path = out_path(c, "checkpoint.json");
  io::save_checkpoint(model, ck_path);

  nlohmann::ordered_json hist = result.to_json();
  hist["skipped_empty_rows"] = d.loaded.skipped_empty;
  hist["train_size"] = tr.size();
  hist["dev_size"] = dev.size();
  hist["test_size"] = d.splits.test.size();
  if (!a.embeddings_path.empty()) hist["pretrained_rows"] = pretrained;
  io::write_json_file(out_path(c, "train_history.json"), hist);

  std::vector<io::ManifestInput> inputs = {{"stories", a.data_path}};
  if (!a.embeddings_path.empty())
    inputs.push_back({"embeddings", a.embeddings_path});
  if (!a.sp.train_file.empty()) {
    inputs.push_back({"split_train", a.sp.train_file});
    inputs.push_back({"split_dev", a.sp.dev_file});
    inputs.push_back({"split_test", a.sp.test_file});
  }
  io::write_manifest(out_path(c, "train_manifest.json"), "train",
                     cfg.to_json(), inputs);

  std::ostringstream msg;
  msg << "train: best dev "
      << (cfg.task == models::Task::single ? "accuracy" : "hamming_score")
      << " " << result.best_metric << " at epoch " << result.best_epoch
      << "; checkpoint " << ck_path;
  say(c, msg.str());
  return 0;
}

struct EvalArgs {
  std::string data_path, checkpoint;
  std::string subset = "test";
  SplitArgs sp;
  double threshold = -1.0;
};

nlohmann::ordered_json eval_subset(models::Model& model,
                                   const std::vector<const data::Story*>& set,
                                   double threshold) {
  if (model.config().task == models::Task::single) {
    auto pred = train::predict_single(model, set);
    auto gold = train::gold_single(set, model.config().category);
    return train::evaluate_single(pred, gold).to_json();
  }
  auto pred = train::predict_multi_stories(model, set, threshold);
  auto gold = train::gold_multi(set);
  return train::evaluate_multi(pred, gold).to_json();
}

int cmd_eval(const CommonArgs& c, const EvalArgs& a) {
  auto model = io::load_checkpoint(a.checkpoint);
  const std::uint64_t seed = c.seed ? *c.seed : model->config().seed;
  auto d = load_and_split(a.data_path, a.sp, seed);
  auto set = subset_stories(d, a.subset);
  if (set.empty()) throw DataError("subset '" + a.subset + "' is empty");
  const double threshold =
      a.threshold > 0.0 ? a.threshold : model->config().threshold;

  nlohmann::ordered_json j;
  j["subset"] = a.subset;
  j["size"] = set.size();
  if (model->config().task == models::Task::multi) j["threshold"] = threshold;
  j["metrics"] = eval_subset(*model, set, threshold);
  io::write_json_file(out_path(c, "eval_report.json"), j);
  io::write_manifest(out_path(c, "eval_manifest.json"), "eval",
                     model->config().to_json(),
                     {{"checkpoint", a.checkpoint}, {"stories", a.data_path}});

  std::ostringstream msg;
  if (model->config().task == models::Task::single)
    msg << "eval[" << a.subset
        << "]: accuracy " << j["metrics"]["accuracy"].get<double>();
  else
    msg << "eval[" << a.subset << "]: hamming_score "
        << j["metrics"]["hamming_score"].get<double>() << " exact_match "
        << j["metrics"]["exact_match"].get<double>();
  say(c, msg.str());
  return 0;
}

int cmd_report(const CommonArgs& c, const EvalArgs& a) {
  auto model = io::load_checkpoint(a.checkpoint);
  const std::uint64_t seed = c.seed ? *c.seed : model->config().seed;
  auto d = load_and_split(a.data_path, a.sp, seed);
  const double threshold =
      a.threshold > 0.0 ? a.threshold : model->config().threshold;

  nlohmann::ordered_json j;
  j["task"] =
      model->config().task == models::Task::single ? "single" : "multi";
  if (model->config().task == models::Task::multi) j["threshold"] = threshold;

  const auto jsonl_path = out_path(c, "predictions.jsonl");
  std::ofstream jsonl(jsonl_path);
  if (!jsonl) throw DataError("cannot write " + jsonl_path);

  for (const std::string subset : {"train", "dev", "test"}) {
    auto set = subset_stories(d, subset);
    if (set.empty()) {
      j[subset] = nullptr;
      continue;
    }
    j[subset] = eval_subset(*model, set, threshold);

    Tensor probs = train::predict_probs_all(*model, set);
    const auto& idx = subset_indices(d.splits, subset);
    for (std::size_t i = 0; i < set.size(); ++i) {
      nlohmann::ordered_json line;
      line["index"] = idx[i];
      line["subset"] = subset;
      if (model->config().task == models::Task::single) {
        const auto cat = model->config().category;
        line["gold"] = set[i]->labels[cat] ? 1 : 0;
        line["prob"] = probs.at(i, 1);
        line["pred"] = probs.at(i, 1) > probs.at(i, 0) ? 1 : 0;
      } else {
        line["gold"] = {set[i]->labels[0] ? 1 : 0, set[i]->labels[1] ? 1 : 0,
                        set[i]->labels[2] ? 1 : 0};
        line["probs"] = {probs.at(i, 0), probs.at(i, 1), probs.at(i, 2)};
        auto bits = models::predict_multi(probs.data() + i * 3, threshold);
        line["pred"] = {bits[0] ? 1 : 0, bits[1] ? 1 : 0, bits[2] ? 1 : 0};
      }
      jsonl << line.dump() << '\n';
    }
  }
  if (!jsonl.good()) throw DataError("failed writing " + jsonl_path);
  jsonl.close();

  io::write_json_file(out_path(c, "report.json"), j);
  io::write_manifest(out_path(c, "report_manifest.json"), "report",
                     model->config().to_json(),
                     {{"checkpoint", a.checkpoint}, {"stories", a.data_path}});
  say(c, "report: wrote report.json and predictions.jsonl");
  return 0;
}

struct ExplainArgs {
  std::string data_path, checkpoint;
  std::size_t index = 0;
  std::string method = "both";
  int target = -1;
  std::size_t samples = 1000;
  std::size_t top_k = 10;
};

int cmd_explain(const CommonArgs& c, const ExplainArgs& a) {
  if (a.method != "both" && a.method != "lime" && a.method != "saliency")
    throw ConfigError("--method must be lime, saliency, or both");
  auto model = io::load_checkpoint(a.checkpoint);
  auto d = data::load_stories(a.data_path);
  if (a.index >= d.stories.size())
    throw DataError("story index " + std::to_string(a.index) +
                    " is out of range (have " +
                    std::to_string(d.stories.size()) + ")");
  const data::Story& story = d.stories[a.index];
  const bool single = model->config().task == models::Task::single;

  std::vector<std::size_t> targets;
  if (a.target >= 0) {
    if (static_cast<std::size_t>(a.target) >= model->config().num_classes())
      throw ConfigError("--target is out of range for this model");
    targets.push_back(static_cast<std::size_t>(a.target));
  } else if (single) {
    targets.push_back(1);
  } else {
    targets = {0, 1, 2};
  }

  auto target_name = [&](std::size_t t) {
    return single ? (t == 1 ? std::string("positive") : std::string("negative"))
                  : std::string(data::kCategories[t]);
  };

  nlohmann::ordered_json j;
  j["index"] = a.index;
  j["text"] = story.text;
  j["tokens"] = data::tokenize(story.text);
  nlohmann::ordered_json explanations = nlohmann::ordered_json::array();

  for (std::size_t t : targets) {
    nlohmann::ordered_json e;
    e["target"] = target_name(t);
    if (a.method != "saliency") {
      interpret::LimeOptions opts;
      opts.n_samples = a.samples;
      opts.top_k = a.top_k;
      opts.seed = c.seed ? *c.seed : model->config().seed;
      auto res = interpret::lime_explain(*model, story, t, opts);
      nlohmann::ordered_json terms = nlohmann::ordered_json::array();
      for (const auto& term : res.terms)
        terms.push_back({{"token", term.token},
                         {"position", term.position},
                         {"weight", term.weight}});
      e["lime"] = {{"terms", terms},
                   {"intercept", res.intercept},
                   {"samples", res.samples_used},
                   {"k", res.k_used},
                   {"k_reduced", res.k_reduced}};

      auto tokens = data::tokenize(story.text);
      std::vector<double> weights(tokens.size(), 0.0);
      for (const auto& term : res.terms)
        if (term.position < weights.size())
          weights[term.position] = term.weight;
      interpret::write_token_heatmap_svg(
          out_path(c, "lime_" + std::to_string(a.index) + "_" +
                          target_name(t) + ".svg"),
          tokens, weights, "lime " + target_name(t));
    }
    if (a.method != "lime") {
      auto terms = interpret::saliency_explain(*model, story, t);
      nlohmann::ordered_json out = nlohmann::ordered_json::array();
      std::vector<std::string> tokens;
      std::vector<double> weights;
      for (const auto& term : terms) {
        out.push_back({{"token", term.token},
                       {"position", term.position},
                       {"weight", term.weight}});
        tokens.push_back(term.token);
        weights.push_back(term.weight);
      }
      e["saliency"] = {{"terms", out}};
      interpret::write_token_heatmap_svg(
          out_path(c, "saliency_" + std::to_string(a.index) + "_" +
                          target_name(t) + ".svg"),
          tokens, weights, "saliency " + target_name(t));
    }
    explanations.push_back(std::move(e));
  }
  j["explanations"] = std::move(explanations);

  io::write_json_file(
      out_path(c, "explain_" + std::to_string(a.index) + ".json"), j);
  io::write_manifest(out_path(c, "explain_manifest.json"), "explain",
                     model->config().to_json(),
                     {{"checkpoint", a.checkpoint}, {"stories", a.data_path}});
  say(c, "explain: wrote explain_" + std::to_string(a.index) + ".json");
  return 0;
}

struct ClusterArgs {
  std::string data_path, checkpoint;
  std::string subset = "all";
  SplitArgs sp;
  std::size_t k = 0;  // 0 selects k by silhouette
};

int cmd_cluster(const CommonArgs& c, const ClusterArgs& a) {
  auto model = io::load_checkpoint(a.checkpoint);
  const std::uint64_t seed = c.seed ? *c.seed : model->config().seed;
  auto d = load_and_split(a.data_path, a.sp, seed);
  auto set = subset_stories(d, a.subset);
  if (set.empty()) throw DataError("subset '" + a.subset + "' is empty");

  Tensor acts = interpret::extract_activations(*model, set);

  nlohmann::ordered_json j;
  j["subset"] = a.subset;
  j["size"] = set.size();
  std::size_t k = a.k;
  if (k == 0) {
    auto sel = interpret::choose_k(acts, 2, 12, seed);
    k = sel.k;
    nlohmann::ordered_json scores = nlohmann::ordered_json::array();
    for (const auto& [kk, s] : sel.scores)
      scores.push_back({{"k", kk}, {"silhouette", s}});
    j["k_selection"] = scores;
  }
  auto km = interpret::kmeans(acts, k, Rng::seed_mix(seed, k));
  j["k"] = k;
  j["inertia"] = km.inertia;
  j["iterations"] = km.iterations;
  j["silhouette"] = interpret::silhouette(acts, km.assignments, k, seed);

  auto sums = interpret::summarize_clusters(set, acts, km);
  nlohmann::ordered_json clusters = nlohmann::ordered_json::array();
  for (const auto& s : sums) {
    nlohmann::ordered_json sj;
    sj["cluster"] = s.cluster;
    sj["count"] = s.count;
    sj["top_terms"] = s.top_terms;
    nlohmann::ordered_json near = nlohmann::ordered_json::array();
    for (std::size_t i : s.nearest_stories) {
      std::string snippet = set[i]->text;
      if (snippet.size() > 120) snippet = snippet.substr(0, 117) + "...";
      near.push_back({{"index", i}, {"snippet", snippet}});
    }
    sj["nearest"] = std::move(near);
    clusters.push_back(std::move(sj));
  }
  j["clusters"] = std::move(clusters);
  io::write_json_file(out_path(c, "clusters.json"), j);

  const auto jsonl_path = out_path(c, "cluster_assignments.jsonl");
  std::ofstream jsonl(jsonl_path);
  if (!jsonl) throw DataError("cannot write " + jsonl_path);
  for (std::size_t i = 0; i < set.size(); ++i) {
    nlohmann::ordered_json line;
    line["index"] = i;
    line["cluster"] = km.assignments[i];
    jsonl << line.dump() << '\n';
  }
  if (!jsonl.good()) throw DataError("failed writing " + jsonl_path);

  io::write_manifest(out_path(c, "cluster_manifest.json"), "cluster",
                     model->config().to_json(),
                     {{"checkpoint", a.checkpoint}, {"stories", a.data_path}});
  std::ostringstream msg;
  msg << "cluster: k " << k << " silhouette " << j["silhouette"].get<double>();
  say(c, msg.str());
  return 0;
}

struct TsneArgs {
  std::string checkpoint;
  std::size_t max_words = 2000;
  double perplexity = 30.0;
  std::size_t iters = 1000;
  std::string seed_words;  // comma separated
  std::size_t neighbors = 10;
};

int cmd_tsne(const CommonArgs& c, const TsneArgs& a) {
  auto model = io::load_checkpoint(a.checkpoint);
  const auto& vocab = model->vocab();
  if (vocab.size() <= 2) throw DataError("checkpoint vocabulary is empty");
  const std::size_t n_words =
      std::min<std::size_t>(a.max_words, vocab.size() - 2);

  // Vocabulary ids are frequency-ordered, so the first rows after the
  // specials are the most frequent words.
  std::vector<std::string> words;
  words.reserve(n_words);
  for (std::size_t i = 0; i < n_words; ++i)
    words.push_back(vocab.token(static_cast<std::int32_t>(i + 2)));

  const auto& table = model->params().find("embedding")->value;
  const std::size_t dim = model->config().embedding_dim;
  Tensor x({n_words, dim});
  for (std::size_t i = 0; i < n_words; ++i)
    std::copy_n(table.data() + (i + 2) * dim, dim, x.data() + i * dim);

  interpret::TsneOptions opts;
  opts.perplexity = a.perplexity;
  opts.n_iters = a.iters;
  opts.seed = c.seed ? *c.seed : model->config().seed;
  auto res = interpret::tsne(x, opts);

  nlohmann::ordered_json j;
  j["words"] = n_words;
  j["perplexity"] = a.perplexity;
  j["iterations"] = res.iterations;
  j["initial_kl"] = res.initial_kl;
  j["final_kl"] = res.final_kl;

  const auto jsonl_path = out_path(c, "tsne_points.jsonl");
  std::ofstream jsonl(jsonl_path);
  if (!jsonl) throw DataError("cannot write " + jsonl_path);
  for (std::size_t i = 0; i < n_words; ++i) {
    nlohmann::ordered_json line;
    line["word"] = words[i];
    line["x"] = res.y.at(i, 0);
    line["y"] = res.y.at(i, 1);
    jsonl << line.dump() << '\n';
  }
  if (!jsonl.good()) throw DataError("failed writing " + jsonl_path);

  if (!a.seed_words.empty()) {
    std::vector<std::string> seeds;
    std::stringstream ss(a.seed_words);
    std::string w;
    while (std::getline(ss, w, ',')) {
      if (!w.empty()) seeds.push_back(w);
    }
    auto neigh =
        interpret::seed_word_neighbors(seeds, words, x, res.y, a.neighbors);
    nlohmann::ordered_json nj = nlohmann::ordered_json::array();
    for (const auto& wn : neigh) {
      nlohmann::ordered_json entry;
      entry["word"] = wn.word;
      nlohmann::ordered_json orig = nlohmann::ordered_json::array();
      for (const auto& [tok, sim] : wn.original)
        orig.push_back({{"word", tok}, {"cosine", sim}});
      nlohmann::ordered_json proj = nlohmann::ordered_json::array();
      for (const auto& [tok, dist] : wn.projected)
        proj.push_back({{"word", tok}, {"distance", dist}});
      entry["original_space"] = std::move(orig);
      entry["projected_space"] = std::move(proj);
      nj.push_back(std::move(entry));
    }
    j["seed_neighbors"] = std::move(nj);
  }

  io::write_json_file(out_path(c, "tsne.json"), j);
  io::write_manifest(out_path(c, "tsne_manifest.json"), "tsne",
                     model->config().to_json(),
                     {{"checkpoint", a.checkpoint}});
  std::ostringstream msg;
  msg << "tsne: " << n_words << " words, kl " << res.initial_kl << " -> "
      << res.final_kl;
  say(c, msg.str());
  return 0;
}

struct TuneArgs {
  std::string data_path, checkpoint;
  SplitArgs sp;
};

int cmd_tune_threshold(const CommonArgs& c, const TuneArgs& a) {
  auto model = io::load_checkpoint(a.checkpoint);
  const std::uint64_t seed = c.seed ? *c.seed : model->config().seed;
  auto d = load_and_split(a.data_path, a.sp, seed);
  auto dev = data::select(d.loaded.stories, d.splits.dev);
  auto result = train::tune_threshold(*model, dev);

  io::write_json_file(out_path(c, "threshold.json"), result.to_json());
  io::write_manifest(out_path(c, "tune_threshold_manifest.json"),
                     "tune-threshold", model->config().to_json(),
                     {{"checkpoint", a.checkpoint}, {"stories", a.data_path}});
  std::ostringstream msg;
  msg << "tune-threshold: best " << result.best_threshold << " hamming_score "
      << result.best_hamming;
  say(c, msg.str());
  return 0;
}

void add_split_options(CLI::App* cmd, SplitArgs& sp) {
  cmd->add_option("--split-train", sp.train_file,
                  "file of zero-based train indices, one per line");
  cmd->add_option("--split-dev", sp.dev_file, "file of dev indices");
  cmd->add_option("--split-test", sp.test_file, "file of test indices");
}

}  // namespace

int run_cli(int argc, char** argv) {
  CommonArgs common;
  TrainArgs train_args;
  EvalArgs eval_args, report_args;
  ExplainArgs explain_args;
  ClusterArgs cluster_args;
  TsneArgs tsne_args;
  TuneArgs tune_args;

  CLI::App app{"neural harassment-story classifiers with interpretability "
               "reports"};
  app.require_subcommand(1);
  app.add_option("--config", common.config_path, "json config file")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", common.seed, "seed override");
  app.add_option("--out", common.out_dir, "output directory");
  app.add_flag("--quiet", common.quiet, "suppress progress output");

  auto* t = app.add_subcommand("train", "fit a classifier");
  t->add_option("--data", train_args.data_path, "story csv")
      ->required()
      ->check(CLI::ExistingFile);
  t->add_option("--arch", train_args.arch,
                "cnn | rnn | cnn-rnn | cnn-rnn-bidirec-char");
  t->add_option("--task", train_args.task, "single | multi");
  t->add_option("--category", train_args.category,
                "label column for the single task (0 commenting, 1 ogling, "
                "2 groping)");
  t->add_option("--embeddings", train_args.embeddings_path,
                "optional word vectors, one 'word v1..vD' per line")
      ->check(CLI::ExistingFile);
  add_split_options(t, train_args.sp);

  auto* e = app.add_subcommand("eval", "score a checkpoint on one subset");
  e->add_option("--data", eval_args.data_path, "story csv")
      ->required()
      ->check(CLI::ExistingFile);
  e->add_option("--checkpoint", eval_args.checkpoint, "checkpoint json")
      ->required()
      ->check(CLI::ExistingFile);
  e->add_option("--subset", eval_args.subset, "train | dev | test | all");
  e->add_option("--threshold", eval_args.threshold,
                "multi-label decision threshold");
  add_split_options(e, eval_args.sp);

  auto* r = app.add_subcommand("report",
                               "metrics for every subset plus per-story "
                               "predictions");
  r->add_option("--data", report_args.data_path, "story csv")
      ->required()
      ->check(CLI::ExistingFile);
  r->add_option("--checkpoint", report_args.checkpoint, "checkpoint json")
      ->required()
      ->check(CLI::ExistingFile);
  r->add_option("--threshold", report_args.threshold,
                "multi-label decision threshold");
  add_split_options(r, report_args.sp);

  auto* x = app.add_subcommand("explain", "lime and saliency for one story");
  x->add_option("--data", explain_args.data_path, "story csv")
      ->required()
      ->check(CLI::ExistingFile);
  x->add_option("--checkpoint", explain_args.checkpoint, "checkpoint json")
      ->required()
      ->check(CLI::ExistingFile);
  x->add_option("--index", explain_args.index, "story row, zero-based")
      ->required();
  x->add_option("--method", explain_args.method, "lime | saliency | both");
  x->add_option("--target", explain_args.target,
                "class column to explain (default: positive class / all "
                "categories)");
  x->add_option("--samples", explain_args.samples, "lime perturbations");
  x->add_option("--top-k", explain_args.top_k, "lime terms to keep");

  auto* k = app.add_subcommand("cluster",
                               "k-means over penultimate activations");
  k->add_option("--data", cluster_args.data_path, "story csv")
      ->required()
      ->check(CLI::ExistingFile);
  k->add_option("--checkpoint", cluster_args.checkpoint, "checkpoint json")
      ->required()
      ->check(CLI::ExistingFile);
  k->add_option("--subset", cluster_args.subset, "train | dev | test | all");
  k->add_option("--k", cluster_args.k,
                "cluster count (default: best silhouette over 2..12)");
  add_split_options(k, cluster_args.sp);

  auto* s = app.add_subcommand("tsne", "project word embeddings to the plane");
  s->add_option("--checkpoint", tsne_args.checkpoint, "checkpoint json")
      ->required()
      ->check(CLI::ExistingFile);
  s->add_option("--max-words", tsne_args.max_words,
                "how many of the most frequent words to project");
  s->add_option("--perplexity", tsne_args.perplexity, "tsne perplexity");
  s->add_option("--iters", tsne_args.iters, "gradient descent iterations");
  s->add_option("--seed-words", tsne_args.seed_words,
                "comma-separated words to report neighbors for");
  s->add_option("--neighbors", tsne_args.neighbors, "neighbors per seed word");

  auto* th = app.add_subcommand("tune-threshold",
                                "sweep the multi-label threshold on dev");
  th->add_option("--data", tune_args.data_path, "story csv")
      ->required()
      ->check(CLI::ExistingFile);
  th->add_option("--checkpoint", tune_args.checkpoint, "checkpoint json")
      ->required()
      ->check(CLI::ExistingFile);
  add_split_options(th, tune_args.sp);

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(t)) return cmd_train(common, train_args);
    if (app.got_subcommand(e)) return cmd_eval(common, eval_args);
    if (app.got_subcommand(r)) return cmd_report(common, report_args);
    if (app.got_subcommand(x)) return cmd_explain(common, explain_args);
    if (app.got_subcommand(k)) return cmd_cluster(common, cluster_args);
    if (app.got_subcommand(s)) return cmd_tsne(common, tsne_args);
    if (app.got_subcommand(th)) return cmd_tune_threshold(common, tune_args);
    throw ConfigError("no subcommand given");
  } catch (const NumericError& err) {
    std::fprintf(stderr, "numeric error: %s\n", err.what());
    return 3;
  } catch (const DataError& err) {
    std::fprintf(stderr, "data error: %s\n", err.what());
    return 2;
  } catch (const ConfigError& err) {
    std::fprintf(stderr, "usage error: %s\n", err.what());
    return 1;
  } catch (const nlohmann::json::exception& err) {
    std::fprintf(stderr, "data error: %s\n", err.what());
    return 2;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
}

}  // namespace safetext
