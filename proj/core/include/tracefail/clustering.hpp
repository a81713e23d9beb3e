#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tracefail/detector.hpp"

namespace tracefail {

/// How an experiment is turned into a feature vector.
///  Vmm: confirmed spurious counts per symbol, then confirmed missing counts (2d).
///  Lcs: every LCS difference, confirmed or filtered, same layout (2d).
///  Seq: raw per-symbol occurrence counts in the faulty trace (d).
enum class Representation { Vmm, Lcs, Seq };

std::string_view to_string(Representation r);
Representation parse_representation(std::string_view text);

struct FeatureVector {
  std::string experiment_id;
  std::vector<double> values;
};

std::vector<FeatureVector> build_vectors(std::span<const AnomalyReport> reports, std::size_t d,
                                         Representation representation);

double squared_euclidean(std::span<const double> a, std::span<const double> b);

/// Symmetric pairwise squared-Euclidean distances.
class DistanceMatrix {
 public:
  explicit DistanceMatrix(std::span<const FeatureVector> vectors);
  [[nodiscard]] double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  [[nodiscard]] std::size_t size() const { return n_; }
  /// Number of pairwise-distinct vectors.
  [[nodiscard]] std::size_t distinct_count() const { return distinct_; }

 private:
  std::size_t n_;
  std::size_t distinct_ = 0;
  std::vector<double> data_;
};

struct ClusterResult {
  std::size_t k = 0;
  std::vector<std::size_t> assignments;  // vector index -> cluster index
  std::vector<std::size_t> medoids;      // cluster index -> vector index
  double global_silhouette = 0.0;
  std::size_t iterations = 0;
  std::vector<double> objective_trace;   // total distance to medoids after each iteration
};

inline constexpr std::size_t kMaxKMedoidsIterations = 100;
inline constexpr std::size_t kKMedoidsRestarts = 10;

/// K-Medoids by alternating assignment and medoid update. Seeding: a random
/// first medoid drawn from `seed`, then greedy farthest-point picks (ties to
/// the lowest index). Nearest-medoid ties go to the lowest cluster index; a
/// medoid is only replaced by a strictly better member. Runs
/// kKMedoidsRestarts times and keeps the lowest final objective (earliest
/// run on ties). objective_trace ends with the final objective.
ClusterResult kmedoids(const DistanceMatrix& distances, std::size_t k, std::uint64_t seed);
ClusterResult kmedoids(std::span<const FeatureVector> vectors, std::size_t k, std::uint64_t seed);

/// Global silhouette: per-sample widths averaged within each cluster, then
/// across clusters. Singleton clusters and a_i = b_i = 0 contribute 0.
double silhouette(const DistanceMatrix& distances, std::span<const std::size_t> assignments, std::size_t k);
double silhouette(std::span<const FeatureVector> vectors, const ClusterResult& result);

struct KSelection {
  std::size_t best_k = 0;
  std::vector<std::pair<std::size_t, double>> curve;  // (K, global silhouette)
  std::vector<ClusterResult> results;                 // aligned with curve
  [[nodiscard]] const ClusterResult& best() const;
};

/// Clusters for every K in [k_min, k_max] and keeps the silhouette argmax
/// (ties to the smallest K). K values above the number of distinct vectors
/// are skipped.
KSelection select_k(const DistanceMatrix& distances, std::size_t k_min, std::size_t k_max, std::uint64_t seed);
KSelection select_k(std::span<const FeatureVector> vectors, std::size_t k_min, std::size_t k_max, std::uint64_t seed);

struct PurityResult {
  double overall = 0.0;
  std::vector<double> per_cluster;
};

/// Weighted purity against class labels (index-aligned with the vectors).
PurityResult purity(const ClusterResult& result, std::span<const std::string> labels);

struct SymbolWeight {
  Symbol symbol;
  double weight = 0.0;
};

struct ClusterSummary {
  std::size_t cluster = 0;
  std::size_t size = 0;
  std::string medoid_id;
  std::vector<SymbolWeight> top_spurious;  // for Seq: most frequent symbols
  std::vector<SymbolWeight> top_missing;
};

/// Largest summed feature entries per cluster, `top_n` per polarity.
std::vector<ClusterSummary> summarize_clusters(const ClusterResult& result, std::span<const FeatureVector> vectors,
                                               Representation representation, std::size_t d, std::size_t top_n = 3);

}  // namespace tracefail
