#include "safetext/interpret/lime.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "safetext/data/tokenize.hpp"
#include "safetext/errors.hpp"
#include "safetext/rng.hpp"
#include "safetext/train/trainer.hpp"

namespace safetext::interpret {

namespace {

// Gaussian elimination with partial pivoting; A is n x n row-major.
std::vector<double> solve_linear(std::vector<double> a, std::vector<double> b,
                                 std::size_t n) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
    if (std::abs(a[pivot * n + col]) < 1e-300)
      throw NumericError("singular system in weighted least squares");
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c)
        std::swap(a[col * n + c], a[pivot * n + c]);
      std::swap(b[col], b[pivot]);
    }
    const double inv = 1.0 / a[col * n + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] * inv;
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t ri = n; ri-- > 0;) {
    double acc = b[ri];
    for (std::size_t c = ri + 1; c < n; ++c) acc -= a[ri * n + c] * x[c];
    x[ri] = acc / a[ri * n + ri];
  }
  return x;
}

// Weighted ridge fit of y on the selected binary columns plus an intercept.
// The intercept is not penalized. Returns {intercept, coef...}.
std::vector<double> weighted_ridge(const std::vector<std::vector<char>>& masks,
                                   const std::vector<std::size_t>& columns,
                                   const std::vector<double>& y,
                                   const std::vector<double>& w, double l2) {
  const std::size_t p = columns.size() + 1;
  std::vector<double> ata(p * p, 0.0), aty(p, 0.0);
  std::vector<double> row(p);
  for (std::size_t i = 0; i < masks.size(); ++i) {
    row[0] = 1.0;
    for (std::size_t j = 0; j < columns.size(); ++j)
      row[j + 1] = masks[i][columns[j]] ? 1.0 : 0.0;
    for (std::size_t r = 0; r < p; ++r) {
      if (row[r] == 0.0) continue;
      const double wr = w[i] * row[r];
      for (std::size_t c = 0; c < p; ++c) ata[r * p + c] += wr * row[c];
      aty[r] += wr * y[i];
    }
  }
  for (std::size_t j = 1; j < p; ++j) ata[j * p + j] += l2;
  return solve_linear(std::move(ata), std::move(aty), p);
}

}  // namespace

LimeResult lime_explain_text(const TextScorer& scorer, const std::string& text,
                             const LimeOptions& opts) {
  if (opts.n_samples < 2)
    throw ConfigError("lime needs at least two perturbation samples");
  if (opts.top_k == 0) throw ConfigError("lime top_k must be positive");
  if (opts.kernel_width <= 0.0)
    throw ConfigError("lime kernel width must be positive");
  if (opts.ridge_l2 < 0.0)
    throw ConfigError("lime ridge strength must be nonnegative");

  const auto tokens = data::tokenize(text);
  if (tokens.empty()) throw DataError("story has no tokens to explain");
  const std::size_t m = tokens.size();

  Rng rng(opts.seed);
  std::vector<std::vector<char>> masks;
  std::vector<std::string> texts;
  masks.reserve(opts.n_samples);
  texts.reserve(opts.n_samples);
  for (std::size_t s = 0; s < opts.n_samples; ++s) {
    std::vector<char> mask(m, 1);
    if (s > 0) {
      bool any = false;
      for (std::size_t j = 0; j < m; ++j) {
        mask[j] = rng.bernoulli(0.5) ? 1 : 0;
        any = any || mask[j];
      }
      if (!any) mask[rng.bounded(m)] = 1;
    }
    std::string joined;
    for (std::size_t j = 0; j < m; ++j) {
      if (!mask[j]) continue;
      if (!joined.empty()) joined += ' ';
      joined += tokens[j];
    }
    masks.push_back(std::move(mask));
    texts.push_back(std::move(joined));
  }

  const std::vector<double> y = scorer(texts);
  if (y.size() != masks.size())
    throw ConfigError("lime scorer returned the wrong number of values");
  for (double v : y)
    if (!std::isfinite(v))
      throw NumericError("lime scorer produced a non-finite probability");

  // Exponential kernel over cosine distance from the unperturbed story. For a
  // binary mask with k of m positions kept the cosine similarity is sqrt(k/m).
  std::vector<double> w(masks.size());
  for (std::size_t i = 0; i < masks.size(); ++i) {
    const auto kept = static_cast<double>(
        std::count(masks[i].begin(), masks[i].end(), char(1)));
    const double dist = 1.0 - std::sqrt(kept / static_cast<double>(m));
    w[i] = std::exp(-(dist * dist) /
                    (opts.kernel_width * opts.kernel_width));
  }

  std::vector<std::size_t> all(m);
  std::iota(all.begin(), all.end(), 0);
  const auto full = weighted_ridge(masks, all, y, w, opts.ridge_l2);

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double fa = std::abs(full[a + 1]), fb = std::abs(full[b + 1]);
    if (fa != fb) return fa > fb;
    return a < b;
  });

  LimeResult res;
  res.samples_used = masks.size();
  res.k_used = std::min(opts.top_k, m);
  res.k_reduced = opts.top_k > m;
  std::vector<std::size_t> chosen(order.begin(), order.begin() + res.k_used);
  std::sort(chosen.begin(), chosen.end());

  const auto refit = weighted_ridge(masks, chosen, y, w, opts.ridge_l2);
  res.intercept = refit[0];
  for (std::size_t j = 0; j < chosen.size(); ++j)
    res.terms.push_back({tokens[chosen[j]], chosen[j], refit[j + 1]});
  std::sort(res.terms.begin(), res.terms.end(),
            [](const LimeTerm& a, const LimeTerm& b) {
              const double fa = std::abs(a.weight), fb = std::abs(b.weight);
              if (fa != fb) return fa > fb;
              return a.position < b.position;
            });
  return res;
}

LimeResult lime_explain(models::Model& model, const data::Story& story,
                        std::size_t target, const LimeOptions& opts) {
  if (target >= model.config().num_classes())
    throw ConfigError("lime target class out of range");
  TextScorer scorer = [&](const std::vector<std::string>& texts) {
    std::vector<data::Story> perturbed(texts.size());
    std::vector<const data::Story*> ptrs(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
      perturbed[i].text = texts[i];
      ptrs[i] = &perturbed[i];
    }
    Tensor probs = train::predict_probs_all(model, ptrs);
    std::vector<double> out(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i)
      out[i] = probs.at(i, target);
    return out;
  };
  return lime_explain_text(scorer, story.text, opts);
}

}  // namespace safetext::interpret
