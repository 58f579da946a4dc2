#include "safetext/models/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "safetext/data/tokenize.hpp"
#include "safetext/errors.hpp"

namespace safetext::models {

TfidfVectorizer TfidfVectorizer::fit(
    const std::vector<const data::Story*>& train, std::size_t max_features) {
  if (train.empty()) throw DataError("tf-idf: empty training set");
  if (max_features == 0) throw ConfigError("tf-idf: max_features must be > 0");
  std::unordered_map<std::string, std::size_t> df;
  for (const data::Story* s : train) {
    auto toks = data::tokenize(s->text);
    std::sort(toks.begin(), toks.end());
    toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
    for (const auto& t : toks) ++df[t];
  }
  if (df.empty()) throw DataError("tf-idf: no tokens in training set");
  std::vector<std::pair<std::string, std::size_t>> ranked(df.begin(), df.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > max_features) ranked.resize(max_features);

  TfidfVectorizer v;
  const double n = static_cast<double>(train.size());
  for (const auto& [term, count] : ranked) {
    v.index_.emplace(term, v.terms_.size());
    v.terms_.push_back(term);
    v.idf_.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) +
                     1.0);
  }
  return v;
}

TfidfVectorizer::SparseRow TfidfVectorizer::transform(
    const data::Story& story) const {
  std::unordered_map<std::size_t, double> counts;
  for (const auto& tok : data::tokenize(story.text)) {
    auto it = index_.find(tok);
    if (it != index_.end()) counts[it->second] += 1.0;
  }
  SparseRow row(counts.begin(), counts.end());
  std::sort(row.begin(), row.end());
  double ss = 0.0;
  for (auto& [j, val] : row) {
    val *= idf_[j];
    ss += val * val;
  }
  if (ss > 0.0) {
    const double inv = 1.0 / std::sqrt(ss);
    for (auto& [j, val] : row) val *= inv;
  }
  return row;
}

std::vector<TfidfVectorizer::SparseRow> TfidfVectorizer::transform(
    const std::vector<const data::Story*>& stories) const {
  std::vector<SparseRow> rows;
  rows.reserve(stories.size());
  for (const data::Story* s : stories) rows.push_back(transform(*s));
  return rows;
}

namespace {

void check_binary_labels(const std::vector<int>& y, const char* who) {
  bool saw[2] = {false, false};
  for (int v : y) {
    if (v != 0 && v != 1)
      throw DataError(std::string(who) + ": labels must be 0 or 1");
    saw[v] = true;
  }
  if (!saw[0] || !saw[1])
    throw DataError(std::string(who) +
                    ": training set contains only one class");
}

}  // namespace

LogisticModel LogisticModel::fit(
    const std::vector<TfidfVectorizer::SparseRow>& x, const std::vector<int>& y,
    std::size_t dim, double l2, std::size_t epochs, double lr) {
  if (x.size() != y.size() || x.empty())
    throw DataError("logistic: features and labels must align and be nonempty");
  check_binary_labels(y, "logistic");

  LogisticModel m;
  m.w_.assign(dim, 0.0);
  m.b_ = 0.0;
  const double n = static_cast<double>(x.size());
  std::vector<double> gw(dim);
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    for (std::size_t j = 0; j < dim; ++j) gw[j] = (l2 / n) * m.w_[j];
    double gb = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double z = m.b_;
      for (const auto& [j, val] : x[i]) z += m.w_[j] * val;
      const double p = 1.0 / (1.0 + std::exp(-z));
      const double err = (p - static_cast<double>(y[i])) / n;
      for (const auto& [j, val] : x[i]) gw[j] += err * val;
      gb += err;
    }
    for (std::size_t j = 0; j < dim; ++j) m.w_[j] -= lr * gw[j];
    m.b_ -= lr * gb;
  }
  return m;
}

double LogisticModel::prob(const TfidfVectorizer::SparseRow& row) const {
  double z = b_;
  for (const auto& [j, val] : row) {
    if (j < w_.size()) z += w_[j] * val;
  }
  return 1.0 / (1.0 + std::exp(-z));
}

GaussianNB GaussianNB::fit(const std::vector<TfidfVectorizer::SparseRow>& x,
                           const std::vector<int>& y, std::size_t dim,
                           double var_floor) {
  if (x.size() != y.size() || x.empty())
    throw DataError("gnb: features and labels must align and be nonempty");
  check_binary_labels(y, "gnb");

  GaussianNB m;
  m.dim_ = dim;
  std::size_t count[2] = {0, 0};
  for (int cls = 0; cls < 2; ++cls) {
    m.mean_[cls].assign(dim, 0.0);
    m.var_[cls].assign(dim, 0.0);
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    ++count[y[i]];
    for (const auto& [j, val] : x[i]) m.mean_[y[i]][j] += val;
  }
  for (int cls = 0; cls < 2; ++cls)
    for (std::size_t j = 0; j < dim; ++j)
      m.mean_[cls][j] /= static_cast<double>(count[cls]);
  for (std::size_t i = 0; i < x.size(); ++i) {
    // Accumulate (x - mean)^2 for the nonzero entries; zero entries are folded
    // in afterwards as count * mean^2 minus the nonzero correction.
    for (const auto& [j, val] : x[i]) {
      const double d = val - m.mean_[y[i]][j];
      m.var_[y[i]][j] += d * d - m.mean_[y[i]][j] * m.mean_[y[i]][j];
    }
  }
  const double total = static_cast<double>(x.size());
  for (int cls = 0; cls < 2; ++cls) {
    const double nc = static_cast<double>(count[cls]);
    m.log_prior_[cls] = std::log(nc / total);
    m.baseline_[cls] = m.log_prior_[cls];
    for (std::size_t j = 0; j < dim; ++j) {
      double v =
          (m.var_[cls][j] + nc * m.mean_[cls][j] * m.mean_[cls][j]) / nc;
      if (v < var_floor) v = var_floor;
      m.var_[cls][j] = v;
      m.baseline_[cls] +=
          -0.5 * std::log(2.0 * std::numbers::pi * v) -
          0.5 * m.mean_[cls][j] * m.mean_[cls][j] / v;
    }
  }
  return m;
}

double GaussianNB::log_joint(const TfidfVectorizer::SparseRow& row,
                             int cls) const {
  if (cls != 0 && cls != 1) throw ConfigError("gnb: class must be 0 or 1");
  double score = baseline_[cls];
  for (const auto& [j, val] : row) {
    if (j >= dim_) continue;
    // Replace the x = 0 contribution with the actual one:
    // -(x - mu)^2 / (2 v) + mu^2 / (2 v) = (2 x mu - x^2) / (2 v).
    score += (2.0 * val * mean_[cls][j] - val * val) / (2.0 * var_[cls][j]);
  }
  return score;
}

}  // namespace safetext::models
