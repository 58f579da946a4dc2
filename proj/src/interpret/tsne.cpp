#include "safetext/interpret/tsne.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "safetext/errors.hpp"
#include "safetext/kernels/kernels.hpp"
#include "safetext/rng.hpp"

namespace ker = safetext::kernels;

namespace safetext::interpret {

namespace {

constexpr double kProbFloor = 1e-12;

// Symmetrized, normalized affinities from the perplexity-calibrated
// conditional distributions.
std::vector<double> joint_affinities(const Tensor& x, double perplexity) {
  const std::size_t n = x.dim(0), d = x.dim(1);
  std::vector<double> d2(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = x.data()[i * d + c] - x.data()[j * d + c];
        s += diff * diff;
      }
      d2[i * n + j] = d2[j * n + i] = s;
    }

  const double target_entropy = std::log(perplexity);
  std::vector<double> p(n * n, 0.0), row(n);
  for (std::size_t i = 0; i < n; ++i) {
    double beta = 1.0, lo = 0.0, hi = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 64; ++it) {
      double sum = 0.0, weighted = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) {
          row[j] = 0.0;
          continue;
        }
        row[j] = std::exp(-beta * d2[i * n + j]);
        sum += row[j];
        weighted += row[j] * d2[i * n + j];
      }
      if (sum <= 0.0) break;
      // Entropy of the conditional distribution in nats.
      const double entropy = std::log(sum) + beta * weighted / sum;
      const double diff = entropy - target_entropy;
      if (std::abs(diff) < 1e-5) break;
      if (diff > 0.0) {  // entropy too high: sharpen
        lo = beta;
        beta = std::isfinite(hi) ? 0.5 * (lo + hi) : beta * 2.0;
      } else {
        hi = beta;
        beta = 0.5 * (lo + hi);
      }
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) sum += row[j];
    if (sum <= 0.0) {
      // Degenerate row (all duplicates at distance zero elsewhere); spread
      // the mass uniformly over the other points.
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) p[i * n + j] = 1.0 / static_cast<double>(n - 1);
    } else {
      for (std::size_t j = 0; j < n; ++j) p[i * n + j] = row[j] / sum;
    }
  }

  std::vector<double> joint(n * n, 0.0);
  const double scale = 1.0 / (2.0 * static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      joint[i * n + j] =
          std::max((p[i * n + j] + p[j * n + i]) * scale, kProbFloor);
    }
  return joint;
}

// Low-dimensional affinities q and the unnormalized kernel, returning the
// normalizer.
double low_dim_kernel(const Tensor& y, std::vector<double>& num) {
  const std::size_t n = y.dim(0);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = y.data()[i * 2] - y.data()[j * 2];
      const double dy = y.data()[i * 2 + 1] - y.data()[j * 2 + 1];
      const double v = 1.0 / (1.0 + dx * dx + dy * dy);
      num[i * n + j] = num[j * n + i] = v;
      z += 2.0 * v;
    }
  return z;
}

double kl_divergence(const std::vector<double>& p, const std::vector<double>& num,
                     double z, std::size_t n) {
  double kl = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double q = std::max(num[i * n + j] / z, kProbFloor);
      kl += p[i * n + j] * std::log(p[i * n + j] / q);
    }
  return kl;
}

}  // namespace

TsneResult tsne(const Tensor& x, const TsneOptions& opts) {
  if (x.rank() != 2) throw ConfigError("tsne expects an {N,D} matrix");
  if (opts.perplexity <= 1.0) throw ConfigError("perplexity must exceed one");
  if (opts.n_iters == 0) throw ConfigError("tsne needs at least one iteration");
  const std::size_t n = x.dim(0);
  if (static_cast<double>(n) < 3.0 * opts.perplexity)
    throw DataError("tsne: " + std::to_string(n) +
                    " points cannot support perplexity " +
                    std::to_string(opts.perplexity) +
                    "; use a smaller perplexity");

  const auto p = joint_affinities(x, opts.perplexity);

  TsneResult res;
  res.y = Tensor({n, 2});
  Rng rng(opts.seed);
  for (std::size_t i = 0; i < res.y.size(); ++i)
    res.y[i] = rng.normal() * 1e-4;

  std::vector<double> num(n * n, 0.0);
  std::vector<double> vel(n * 2, 0.0), gains(n * 2, 1.0), grad(n * 2, 0.0);

  {
    const double z = low_dim_kernel(res.y, num);
    res.initial_kl = kl_divergence(p, num, z, n);
  }

  for (std::size_t iter = 0; iter < opts.n_iters; ++iter) {
    const double ex = iter < opts.exaggeration_iters ? opts.exaggeration : 1.0;
    const double momentum = iter < opts.exaggeration_iters
                                ? opts.momentum_start
                                : opts.momentum_final;
    const double z = low_dim_kernel(res.y, num);

    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double q = std::max(num[i * n + j] / z, kProbFloor);
        const double mult = (ex * p[i * n + j] - q) * num[i * n + j];
        grad[i * 2] += 4.0 * mult * (res.y.data()[i * 2] - res.y.data()[j * 2]);
        grad[i * 2 + 1] +=
            4.0 * mult * (res.y.data()[i * 2 + 1] - res.y.data()[j * 2 + 1]);
      }

    for (std::size_t c = 0; c < n * 2; ++c) {
      const bool same_sign = (grad[c] > 0.0) == (vel[c] > 0.0);
      gains[c] = same_sign ? gains[c] * 0.8 : gains[c] + 0.2;
      gains[c] = std::max(gains[c], 0.01);
      vel[c] = momentum * vel[c] - opts.learning_rate * gains[c] * grad[c];
      res.y[c] += vel[c];
    }

    double cx = 0.0, cy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      cx += res.y.data()[i * 2];
      cy += res.y.data()[i * 2 + 1];
    }
    cx /= static_cast<double>(n);
    cy /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      res.y[i * 2] -= cx;
      res.y[i * 2 + 1] -= cy;
    }
    res.iterations = iter + 1;
  }

  const double z = low_dim_kernel(res.y, num);
  res.final_kl = kl_divergence(p, num, z, n);
  res.y.require_finite("tsne embedding");
  return res;
}

namespace {

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

std::vector<WordNeighbors> seed_word_neighbors(
    const std::vector<std::string>& seeds,
    const std::vector<std::string>& words, const Tensor& embeddings,
    const Tensor& projected, std::size_t k) {
  const std::size_t n = words.size();
  if (embeddings.dim(0) != n || projected.dim(0) != n)
    throw ConfigError("word list does not match the embedding rows");
  if (n < 2) throw DataError("need at least two words to find neighbors");
  if (k == 0) throw ConfigError("neighbor count must be positive");
  k = std::min(k, n - 1);
  const std::size_t d = embeddings.dim(1);

  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i)
    norms[i] = std::sqrt(ker::sumsq(embeddings.data() + i * d, d));

  std::vector<WordNeighbors> out;
  for (const auto& seed : seeds) {
    const auto it = std::find(words.begin(), words.end(), seed);
    if (it == words.end()) {
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), 0);
      std::partial_sort(order.begin(), order.begin() + std::min<std::size_t>(3, n),
                        order.end(), [&](std::size_t a, std::size_t b) {
                          const auto da = edit_distance(seed, words[a]);
                          const auto db = edit_distance(seed, words[b]);
                          if (da != db) return da < db;
                          return words[a] < words[b];
                        });
      std::string msg = "seed word '" + seed + "' is not in the word list;"
                        " closest spellings:";
      for (std::size_t j = 0; j < std::min<std::size_t>(3, n); ++j)
        msg += " " + words[order[j]];
      throw DataError(msg);
    }
    const std::size_t s = static_cast<std::size_t>(it - words.begin());

    WordNeighbors wn;
    wn.word = seed;

    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < n; ++i)
      if (i != s) order.push_back(i);

    auto by_cosine = order;
    std::sort(by_cosine.begin(), by_cosine.end(),
              [&](std::size_t a, std::size_t b) {
                const double denom_a = norms[s] * norms[a];
                const double denom_b = norms[s] * norms[b];
                const double ca =
                    denom_a > 0.0
                        ? ker::dot(embeddings.data() + s * d,
                                   embeddings.data() + a * d, d) / denom_a
                        : -1.0;
                const double cb =
                    denom_b > 0.0
                        ? ker::dot(embeddings.data() + s * d,
                                   embeddings.data() + b * d, d) / denom_b
                        : -1.0;
                if (ca != cb) return ca > cb;
                return words[a] < words[b];
              });
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t i = by_cosine[j];
      const double denom = norms[s] * norms[i];
      const double c = denom > 0.0
                           ? ker::dot(embeddings.data() + s * d,
                                      embeddings.data() + i * d, d) / denom
                           : 0.0;
      wn.original.emplace_back(words[i], c);
    }

    auto by_euclid = order;
    auto planar = [&](std::size_t a) {
      const double dx = projected.data()[s * 2] - projected.data()[a * 2];
      const double dy =
          projected.data()[s * 2 + 1] - projected.data()[a * 2 + 1];
      return std::sqrt(dx * dx + dy * dy);
    };
    std::sort(by_euclid.begin(), by_euclid.end(),
              [&](std::size_t a, std::size_t b) {
                const double da = planar(a), db = planar(b);
                if (da != db) return da < db;
                return words[a] < words[b];
              });
    for (std::size_t j = 0; j < k; ++j)
      wn.projected.emplace_back(words[by_euclid[j]], planar(by_euclid[j]));

    out.push_back(std::move(wn));
  }
  return out;
}

}  // namespace safetext::interpret
