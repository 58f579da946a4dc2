#include "safetext/models/config.hpp"

#include "safetext/errors.hpp"

namespace safetext::models {

const char* arch_name(Arch a) {
  switch (a) {
    case Arch::cnn: return "cnn";
    case Arch::rnn: return "rnn";
    case Arch::cnn_rnn: return "cnn-rnn";
    case Arch::cnn_rnn_bidirec_char: return "cnn-rnn-bidirec-char";
  }
  throw ConfigError("unknown architecture value");
}

const char* task_name(Task t) {
  return t == Task::single ? "single" : "multi";
}

Arch parse_arch(const std::string& s) {
  if (s == "cnn") return Arch::cnn;
  if (s == "rnn" || s == "lstm") return Arch::rnn;
  if (s == "cnn-rnn" || s == "cnn-lstm") return Arch::cnn_rnn;
  if (s == "cnn-rnn-bidirec-char") return Arch::cnn_rnn_bidirec_char;
  throw ConfigError("unknown architecture '" + s +
                    "' (expected cnn, rnn, cnn-rnn, or cnn-rnn-bidirec-char)");
}

Task parse_task(const std::string& s) {
  if (s == "single") return Task::single;
  if (s == "multi") return Task::multi;
  throw ConfigError("unknown task '" + s + "' (expected single or multi)");
}

ModelConfig ModelConfig::preset(Arch arch, Task task) {
  ModelConfig c;
  c.arch = arch;
  c.task = task;
  switch (arch) {
    case Arch::cnn:
      c.filters_per_width = 128;
      c.batch_size = 128;
      c.keep_prob = 0.80;
      break;
    case Arch::rnn:
      c.lstm_layers = 2;
      c.lstm_hidden = 60;
      c.batch_size = 64;
      c.keep_prob = 0.75;
      break;
    case Arch::cnn_rnn:
      c.filters_per_width = 100;
      c.embedding_dim = 300;
      c.lstm_hidden = 300;
      c.batch_size = 64;
      c.keep_prob = 0.75;
      break;
    case Arch::cnn_rnn_bidirec_char:
      c.filters_per_width = 100;
      c.embedding_dim = 300;
      c.lstm_hidden = 300;
      c.bidirectional = true;
      c.use_char = true;
      c.char_filters_per_width = 100;
      c.batch_size = 64;
      c.keep_prob = 0.75;
      break;
  }
  return c;
}

void ModelConfig::validate() const {
  if (task == Task::single && category >= 3)
    throw ConfigError("single-label category must be 0, 1, or 2");
  if (vocab_size < 3) throw ConfigError("vocab_size must be at least 3");
  if (embedding_dim == 0) throw ConfigError("embedding_dim must be positive");
  const bool has_conv = arch != Arch::rnn;
  if (has_conv) {
    if (filter_widths.empty() || filters_per_width == 0)
      throw ConfigError("convolutional architectures need filter widths and counts");
    for (std::size_t w : filter_widths)
      if (w == 0 || w > t_max)
        throw ConfigError("filter width must be in [1, t_max]");
  }
  const bool has_lstm = arch != Arch::cnn;
  if (has_lstm && (lstm_layers == 0 || lstm_hidden == 0))
    throw ConfigError("recurrent architectures need lstm_layers and lstm_hidden");
  if (use_char) {
    if (char_embedding_dim == 0 || char_filter_widths.empty() ||
        char_filters_per_width == 0)
      throw ConfigError("character embeddings need dims, widths, and counts");
    for (std::size_t w : char_filter_widths)
      if (w == 0 || w > c_max)
        throw ConfigError("char filter width must be in [1, c_max]");
  }
  if (keep_prob <= 0.0 || keep_prob > 1.0)
    throw ConfigError("keep_prob must be in (0, 1]");
  if (threshold <= 0.0 || threshold >= 1.0)
    throw ConfigError("threshold must be in (0, 1)");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (t_max == 0 || c_max == 0) throw ConfigError("t_max and c_max must be positive");
  if (learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
  if (clip_norm <= 0.0) throw ConfigError("clip_norm must be positive");
  if (max_epochs == 0) throw ConfigError("max_epochs must be positive");
}

nlohmann::ordered_json ModelConfig::to_json() const {
  nlohmann::ordered_json j;
  j["arch"] = arch_name(arch);
  j["task"] = task_name(task);
  j["category"] = category;
  j["vocab_size"] = vocab_size;
  j["embedding_dim"] = embedding_dim;
  j["filter_widths"] = filter_widths;
  j["filters_per_width"] = filters_per_width;
  j["lstm_layers"] = lstm_layers;
  j["lstm_hidden"] = lstm_hidden;
  j["bidirectional"] = bidirectional;
  j["use_char"] = use_char;
  j["char_embedding_dim"] = char_embedding_dim;
  j["char_filter_widths"] = char_filter_widths;
  j["char_filters_per_width"] = char_filters_per_width;
  j["keep_prob"] = keep_prob;
  j["batch_size"] = batch_size;
  j["threshold"] = threshold;
  j["t_max"] = t_max;
  j["c_max"] = c_max;
  j["learning_rate"] = learning_rate;
  j["clip_norm"] = clip_norm;
  j["max_epochs"] = max_epochs;
  j["patience"] = patience;
  j["seed"] = seed;
  return j;
}

void ModelConfig::apply_overrides(const nlohmann::json& j) {
  try {
    if (j.contains("arch")) arch = parse_arch(j.at("arch").get<std::string>());
    if (j.contains("task")) task = parse_task(j.at("task").get<std::string>());
    if (j.contains("category")) category = j.at("category").get<std::size_t>();
    if (j.contains("vocab_size")) vocab_size = j.at("vocab_size").get<std::size_t>();
    if (j.contains("embedding_dim"))
      embedding_dim = j.at("embedding_dim").get<std::size_t>();
    if (j.contains("filter_widths"))
      filter_widths = j.at("filter_widths").get<std::vector<std::size_t>>();
    if (j.contains("filters_per_width"))
      filters_per_width = j.at("filters_per_width").get<std::size_t>();
    if (j.contains("lstm_layers")) lstm_layers = j.at("lstm_layers").get<std::size_t>();
    if (j.contains("lstm_hidden")) lstm_hidden = j.at("lstm_hidden").get<std::size_t>();
    if (j.contains("bidirectional")) bidirectional = j.at("bidirectional").get<bool>();
    if (j.contains("use_char")) use_char = j.at("use_char").get<bool>();
    if (j.contains("char_embedding_dim"))
      char_embedding_dim = j.at("char_embedding_dim").get<std::size_t>();
    if (j.contains("char_filter_widths"))
      char_filter_widths =
          j.at("char_filter_widths").get<std::vector<std::size_t>>();
    if (j.contains("char_filters_per_width"))
      char_filters_per_width = j.at("char_filters_per_width").get<std::size_t>();
    if (j.contains("keep_prob")) keep_prob = j.at("keep_prob").get<double>();
    if (j.contains("batch_size")) batch_size = j.at("batch_size").get<std::size_t>();
    if (j.contains("threshold")) threshold = j.at("threshold").get<double>();
    if (j.contains("t_max")) t_max = j.at("t_max").get<std::size_t>();
    if (j.contains("c_max")) c_max = j.at("c_max").get<std::size_t>();
    if (j.contains("learning_rate"))
      learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("clip_norm")) clip_norm = j.at("clip_norm").get<double>();
    if (j.contains("max_epochs")) max_epochs = j.at("max_epochs").get<std::size_t>();
    if (j.contains("patience")) patience = j.at("patience").get<std::size_t>();
    if (j.contains("seed")) seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig base;
  if (j.contains("arch") && j.contains("task"))
    base = preset(parse_arch(j.at("arch").get<std::string>()),
                  parse_task(j.at("task").get<std::string>()));
  base.apply_overrides(j);
  return base;
}

}  // namespace safetext::models
