#include "safetext/interpret/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "safetext/errors.hpp"
#include "safetext/kernels/kernels.hpp"
#include "safetext/models/baselines.hpp"
#include "safetext/rng.hpp"

namespace ker = safetext::kernels;

namespace safetext::interpret {

namespace {

double sq_dist(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    const double diff = a[j] - b[j];
    s += diff * diff;
  }
  return s;
}

}  // namespace

KMeansResult kmeans(const Tensor& x, std::size_t k, std::uint64_t seed,
                    std::size_t max_iters) {
  if (x.rank() != 2) throw ConfigError("kmeans expects an {N,D} matrix");
  const std::size_t n = x.dim(0), d = x.dim(1);
  if (k == 0) throw ConfigError("kmeans needs at least one cluster");
  if (k > n)
    throw DataError("kmeans: " + std::to_string(k) + " clusters but only " +
                    std::to_string(n) + " points");

  Rng rng(seed);
  KMeansResult res;
  res.centroids = Tensor({k, d});

  // k-means++ seeding.
  std::vector<double> best_d2(n, std::numeric_limits<double>::infinity());
  std::size_t first = rng.bounded(n);
  std::copy_n(x.data() + first * d, d, res.centroids.data());
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d2 =
          sq_dist(x.data() + i * d, res.centroids.data() + (c - 1) * d, d);
      best_d2[i] = std::min(best_d2[i], d2);
      total += best_d2[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      double r = rng.uniform() * total;
      for (std::size_t i = 0; i < n; ++i) {
        r -= best_d2[i];
        if (r <= 0.0) {
          pick = i;
          break;
        }
        pick = i;
      }
    } else {
      pick = rng.bounded(n);
    }
    std::copy_n(x.data() + pick * d, d, res.centroids.data() + c * d);
  }

  res.assignments.assign(n, -1);
  std::vector<int> prev(n, -2);
  std::vector<std::size_t> counts(k);
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    // Assignment pass; ties go to the lowest cluster index.
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int arg = 0;
      for (std::size_t c = 0; c < k; ++c) {
        const double d2 = sq_dist(x.data() + i * d,
                                  res.centroids.data() + c * d, d);
        if (d2 < best) {
          best = d2;
          arg = static_cast<int>(c);
        }
      }
      res.assignments[i] = arg;
      inertia += best;
    }
    res.inertia = inertia;
    res.inertia_history.push_back(inertia);
    res.iterations = iter + 1;
    if (res.assignments == prev) break;
    prev = res.assignments;

    // Update pass.
    res.centroids.fill(0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(res.assignments[i]);
      ++counts[c];
      ker::axpy(1.0, x.data() + i * d, res.centroids.data() + c * d, d);
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        ker::scale(1.0 / static_cast<double>(counts[c]),
                   res.centroids.data() + c * d, d);
      } else {
        // Reseed an emptied cluster to the point farthest from its centroid.
        std::size_t far = 0;
        double far_d2 = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const auto a = static_cast<std::size_t>(res.assignments[i]);
          const double d2 =
              sq_dist(x.data() + i * d, res.centroids.data() + a * d, d);
          if (d2 > far_d2) {
            far_d2 = d2;
            far = i;
          }
        }
        std::copy_n(x.data() + far * d, d, res.centroids.data() + c * d);
      }
    }
  }
  return res;
}

double silhouette(const Tensor& x, const std::vector<int>& assignments,
                  std::size_t k, std::uint64_t seed, std::size_t max_points) {
  if (x.rank() != 2) throw ConfigError("silhouette expects an {N,D} matrix");
  const std::size_t n = x.dim(0), d = x.dim(1);
  if (assignments.size() != n)
    throw ConfigError("silhouette: assignment count does not match rows");
  if (k < 2) throw ConfigError("silhouette needs at least two clusters");
  if (max_points < 2) throw ConfigError("silhouette sample is too small");

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (n > max_points) {
    Rng rng(Rng::seed_mix(seed, 0x73696c));
    rng.shuffle(idx);
    idx.resize(max_points);
    std::sort(idx.begin(), idx.end());
  }
  const std::size_t s = idx.size();

  std::vector<double> sums(k);
  std::vector<std::size_t> counts(k);
  double total = 0.0;
  std::size_t scored = 0;
  for (std::size_t a = 0; a < s; ++a) {
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t b = 0; b < s; ++b) {
      if (b == a) continue;
      const auto c = static_cast<std::size_t>(assignments[idx[b]]);
      sums[c] += std::sqrt(sq_dist(x.data() + idx[a] * d,
                                   x.data() + idx[b] * d, d));
      ++counts[c];
    }
    const auto own = static_cast<std::size_t>(assignments[idx[a]]);
    if (counts[own] == 0) {
      ++scored;  // singleton in the sample scores zero
      continue;
    }
    const double ai = sums[own] / static_cast<double>(counts[own]);
    double bi = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c == own || counts[c] == 0) continue;
      bi = std::min(bi, sums[c] / static_cast<double>(counts[c]));
    }
    if (!std::isfinite(bi)) {
      ++scored;
      continue;
    }
    const double denom = std::max(ai, bi);
    total += denom > 0.0 ? (bi - ai) / denom : 0.0;
    ++scored;
  }
  if (scored == 0) throw DataError("silhouette: nothing to score");
  return total / static_cast<double>(scored);
}

KSelection choose_k(const Tensor& x, std::size_t k_min, std::size_t k_max,
                    std::uint64_t seed) {
  const std::size_t n = x.dim(0);
  if (k_min < 2) throw ConfigError("choose_k starts at two clusters");
  if (k_max < k_min) throw ConfigError("choose_k range is empty");
  if (n < 3) throw DataError("choose_k needs at least three points");
  k_max = std::min(k_max, n - 1);

  KSelection sel;
  sel.silhouette = -2.0;
  for (std::size_t k = k_min; k <= k_max; ++k) {
    auto km = kmeans(x, k, Rng::seed_mix(seed, k));
    const double s = silhouette(x, km.assignments, k, seed);
    sel.scores.emplace_back(k, s);
    if (s > sel.silhouette) {
      sel.silhouette = s;
      sel.k = k;
    }
  }
  return sel;
}

Tensor extract_activations(models::Model& model,
                           const std::vector<const data::Story*>& stories) {
  if (stories.empty()) throw DataError("no stories to extract activations for");
  const std::size_t dim = model.feature_dim();
  Tensor out({stories.size(), dim});
  const std::size_t bs = model.config().batch_size;
  for (std::size_t begin = 0; begin < stories.size(); begin += bs) {
    const std::size_t end = std::min(begin + bs, stories.size());
    std::vector<const data::Story*> chunk(stories.begin() + begin,
                                          stories.begin() + end);
    Tensor f = model.predict_features(model.encode(chunk));
    std::copy_n(f.data(), f.size(), out.data() + begin * dim);
  }
  return out;
}

std::vector<ClusterSummary> summarize_clusters(
    const std::vector<const data::Story*>& stories, const Tensor& activations,
    const KMeansResult& km) {
  const std::size_t n = stories.size();
  if (activations.dim(0) != n || km.assignments.size() != n)
    throw ConfigError("cluster summary inputs do not align");
  const std::size_t k = km.centroids.dim(0);
  const std::size_t d = km.centroids.dim(1);
  if (activations.dim(1) != d)
    throw ConfigError("activation width does not match the centroids");

  auto vec = models::TfidfVectorizer::fit(stories, 10000);
  std::vector<std::vector<double>> term_mass(k,
                                             std::vector<double>(vec.dim()));
  std::vector<std::size_t> counts(k);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(km.assignments[i]);
    ++counts[c];
    for (const auto& [j, v] : vec.transform(*stories[i])) term_mass[c][j] += v;
  }

  std::vector<ClusterSummary> out;
  for (std::size_t c = 0; c < k; ++c) {
    ClusterSummary s;
    s.cluster = c;
    s.count = counts[c];

    std::vector<std::size_t> term_order(vec.dim());
    std::iota(term_order.begin(), term_order.end(), 0);
    std::sort(term_order.begin(), term_order.end(),
              [&](std::size_t a, std::size_t b) {
                if (term_mass[c][a] != term_mass[c][b])
                  return term_mass[c][a] > term_mass[c][b];
                return vec.terms()[a] < vec.terms()[b];
              });
    for (std::size_t j = 0; j < term_order.size() && s.top_terms.size() < 10;
         ++j) {
      if (term_mass[c][term_order[j]] <= 0.0) break;
      s.top_terms.push_back(vec.terms()[term_order[j]]);
    }

    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i)
      if (static_cast<std::size_t>(km.assignments[i]) == c)
        members.push_back(i);
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      const double da =
          sq_dist(activations.data() + a * d, km.centroids.data() + c * d, d);
      const double db =
          sq_dist(activations.data() + b * d, km.centroids.data() + c * d, d);
      if (da != db) return da < db;
      return a < b;
    });
    if (members.size() > 3) members.resize(3);
    s.nearest_stories = members;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace safetext::interpret
