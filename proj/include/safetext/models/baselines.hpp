#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "safetext/data/dataset.hpp"

namespace safetext::models {

// L2-normalized TF-IDF rows over the training vocabulary (raw term counts,
// smoothed idf = ln((1+n)/(1+df)) + 1).
class TfidfVectorizer {
 public:
  using SparseRow = std::vector<std::pair<std::size_t, double>>;

  static TfidfVectorizer fit(const std::vector<const data::Story*>& train,
                             std::size_t max_features = 10000);

  SparseRow transform(const data::Story& story) const;
  std::vector<SparseRow> transform(
      const std::vector<const data::Story*>& stories) const;

  std::size_t dim() const { return terms_.size(); }
  const std::vector<std::string>& terms() const { return terms_; }
  const std::vector<double>& idf() const { return idf_; }

 private:
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> terms_;
  std::vector<double> idf_;
};

// Gradient-trained binary logistic regression with L2 = 1.0 (penalty applied
// per-example alongside the mean log loss).
class LogisticModel {
 public:
  static LogisticModel fit(const std::vector<TfidfVectorizer::SparseRow>& x,
                           const std::vector<int>& y, std::size_t dim,
                           double l2 = 1.0, std::size_t epochs = 300,
                           double lr = 0.1);

  double prob(const TfidfVectorizer::SparseRow& row) const;
  int predict(const TfidfVectorizer::SparseRow& row) const {
    return prob(row) >= 0.5 ? 1 : 0;
  }
  const std::vector<double>& weights() const { return w_; }
  double bias() const { return b_; }

 private:
  std::vector<double> w_;
  double b_ = 0.0;
};

// Binary Gaussian Naive Bayes over the same features; zeros count as observed
// values and every variance is floored.
class GaussianNB {
 public:
  static GaussianNB fit(const std::vector<TfidfVectorizer::SparseRow>& x,
                        const std::vector<int>& y, std::size_t dim,
                        double var_floor = 1e-9);

  double log_joint(const TfidfVectorizer::SparseRow& row, int cls) const;
  int predict(const TfidfVectorizer::SparseRow& row) const {
    return log_joint(row, 1) > log_joint(row, 0) ? 1 : 0;
  }

 private:
  std::size_t dim_ = 0;
  double log_prior_[2] = {0.0, 0.0};
  std::vector<double> mean_[2], var_[2];
  double baseline_[2] = {0.0, 0.0};  // score with every feature at zero
};

}  // namespace safetext::models
