#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "safetext/data/dataset.hpp"
#include "safetext/models/model.hpp"
#include "safetext/tensor.hpp"

namespace safetext::interpret {

struct KMeansResult {
  std::vector<int> assignments;  // one cluster id per row of x
  Tensor centroids;              // {k, d}
  double inertia = 0.0;
  std::size_t iterations = 0;
  std::vector<double> inertia_history;  // recorded after each assignment pass
};

// k-means++ seeding followed by Lloyd iterations; an emptied cluster is
// reseeded to the point farthest from its current centroid.
KMeansResult kmeans(const Tensor& x, std::size_t k, std::uint64_t seed,
                    std::size_t max_iters = 100);

// Mean silhouette over at most `max_points` sampled rows.
double silhouette(const Tensor& x, const std::vector<int>& assignments,
                  std::size_t k, std::uint64_t seed,
                  std::size_t max_points = 2000);

struct KSelection {
  std::size_t k = 0;
  double silhouette = 0.0;
  std::vector<std::pair<std::size_t, double>> scores;
};

// Runs kmeans for each k in [k_min, k_max] and keeps the best silhouette;
// ties keep the smaller k.
KSelection choose_k(const Tensor& x, std::size_t k_min, std::size_t k_max,
                    std::uint64_t seed);

// Penultimate-layer activations (the input of the final fully-connected
// layer), one row per story.
Tensor extract_activations(models::Model& model,
                           const std::vector<const data::Story*>& stories);

struct ClusterSummary {
  std::size_t cluster = 0;
  std::size_t count = 0;
  std::vector<std::string> top_terms;        // up to 10, by mean tf-idf
  std::vector<std::size_t> nearest_stories;  // up to 3, by centroid distance
};

std::vector<ClusterSummary> summarize_clusters(
    const std::vector<const data::Story*>& stories, const Tensor& activations,
    const KMeansResult& km);

}  // namespace safetext::interpret
