#include "tracefail/clustering.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <optional>

#include "tracefail/error.hpp"
#include "tracefail/rng.hpp"

namespace tracefail {

std::string_view to_string(Representation r) {
  switch (r) {
    case Representation::Vmm:
      return "vmm";
    case Representation::Lcs:
      return "lcs";
    case Representation::Seq:
      return "seq";
  }
  return "?";
}

Representation parse_representation(std::string_view text) {
  if (text == "vmm") return Representation::Vmm;
  if (text == "lcs") return Representation::Lcs;
  if (text == "seq") return Representation::Seq;
  throw InvalidArgument("unknown representation '" + std::string(text) + "' (expected vmm, lcs or seq)");
}

std::vector<FeatureVector> build_vectors(std::span<const AnomalyReport> reports, std::size_t d,
                                         Representation representation) {
  const std::size_t width = representation == Representation::Seq ? d : 2 * d;
  std::vector<FeatureVector> out;
  out.reserve(reports.size());
  for (const auto& report : reports) {
    FeatureVector v{report.experiment_id, std::vector<double>(width, 0.0)};
    for (const auto& e : report.events) {
      if (e.symbol.id >= d) {
        throw InvalidArgument("report " + report.experiment_id + " uses symbol " + std::to_string(e.symbol.id) +
                              " outside a dictionary of size " + std::to_string(d));
      }
      switch (representation) {
        case Representation::Vmm:
          if (e.label == EventLabel::Spurious) v.values[e.symbol.id] += 1.0;
          if (e.label == EventLabel::Missing) v.values[d + e.symbol.id] += 1.0;
          break;
        case Representation::Lcs:
          if (faulty_side(e.label)) v.values[e.symbol.id] += 1.0;
          if (reference_side(e.label)) v.values[d + e.symbol.id] += 1.0;
          break;
        case Representation::Seq:
          if (e.faulty_pos) v.values[e.symbol.id] += 1.0;
          break;
      }
    }
    out.push_back(std::move(v));
  }
  return out;
}

double squared_euclidean(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw InvalidArgument("feature vectors differ in length");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    sum += diff * diff;
  }
  return sum;
}

DistanceMatrix::DistanceMatrix(std::span<const FeatureVector> vectors) : n_(vectors.size()), data_(n_ * n_, 0.0) {
  for (std::size_t i = 0; i < n_; ++i) {
    bool duplicate = false;
    for (std::size_t j = 0; j < i; ++j) {
      const double dist = squared_euclidean(vectors[i].values, vectors[j].values);
      data_[i * n_ + j] = dist;
      data_[j * n_ + i] = dist;
      duplicate = duplicate || dist == 0.0;
    }
    distinct_ += duplicate ? 0 : 1;
  }
}

namespace {

double assign(const DistanceMatrix& dist, const std::vector<std::size_t>& medoids, std::vector<std::size_t>& assignments) {
  double objective = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < medoids.size(); ++c) {
      const double d = dist(i, medoids[c]);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    assignments[i] = best;
    objective += best_d;
  }
  return objective;
}

}  // namespace

namespace {

ClusterResult kmedoids_from(const DistanceMatrix& dist, std::size_t k, std::size_t first) {
  const std::size_t n = dist.size();
  ClusterResult result;
  result.k = k;
  result.medoids.push_back(first);
  std::vector<double> nearest(n);
  for (std::size_t i = 0; i < n; ++i) nearest[i] = dist(i, result.medoids[0]);
  while (result.medoids.size() < k) {
    const auto far = static_cast<std::size_t>(std::max_element(nearest.begin(), nearest.end()) - nearest.begin());
    result.medoids.push_back(far);
    for (std::size_t i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], dist(i, far));
  }

  result.assignments.assign(n, 0);
  std::vector<std::vector<std::size_t>> members(k);
  while (result.iterations < kMaxKMedoidsIterations) {
    ++result.iterations;
    result.objective_trace.push_back(assign(dist, result.medoids, result.assignments));

    for (auto& m : members) m.clear();
    for (std::size_t i = 0; i < n; ++i) members[result.assignments[i]].push_back(i);

    bool changed = false;
    for (std::size_t c = 0; c < k; ++c) {
      auto cost = [&](std::size_t candidate) {
        double sum = 0.0;
        for (const std::size_t i : members[c]) sum += dist(candidate, i);
        return sum;
      };
      std::size_t best = result.medoids[c];
      double best_cost = cost(best);
      for (const std::size_t candidate : members[c]) {
        const double cand_cost = cost(candidate);
        if (cand_cost < best_cost) {
          best_cost = cand_cost;
          best = candidate;
        }
      }
      if (best != result.medoids[c]) {
        result.medoids[c] = best;
        changed = true;
      }
    }
    if (!changed) {
      break;
    }
  }
  // Assignments are final for the last medoid set.
  result.objective_trace.push_back(assign(dist, result.medoids, result.assignments));
  return result;
}

}  // namespace

ClusterResult kmedoids(const DistanceMatrix& dist, std::size_t k, std::uint64_t seed) {
  if (k < 2) {
    throw InvalidArgument("K-Medoids needs K >= 2");
  }
  if (k > dist.distinct_count()) {
    throw InvalidArgument("K = " + std::to_string(k) + " exceeds the " + std::to_string(dist.distinct_count()) +
                          " distinct feature vectors");
  }
  Rng rng(seed);
  std::optional<ClusterResult> best;
  for (std::size_t r = 0; r < kKMedoidsRestarts; ++r) {
    auto run = kmedoids_from(dist, k, static_cast<std::size_t>(rng.below(dist.size())));
    if (!best || run.objective_trace.back() < best->objective_trace.back()) best = std::move(run);
  }
  best->global_silhouette = silhouette(dist, best->assignments, k);
  return std::move(*best);
}

ClusterResult kmedoids(std::span<const FeatureVector> vectors, std::size_t k, std::uint64_t seed) {
  return kmedoids(DistanceMatrix(vectors), k, seed);
}

double silhouette(const DistanceMatrix& dist, std::span<const std::size_t> assignments, std::size_t k) {
  if (k < 2) {
    throw InvalidArgument("silhouette needs K >= 2");
  }
  const std::size_t n = dist.size();
  if (assignments.size() != n) {
    throw InvalidArgument("assignment count does not match the distance matrix");
  }
  std::vector<std::size_t> sizes(k, 0);
  for (const auto a : assignments) {
    if (a >= k) throw InvalidArgument("cluster index out of range");
    ++sizes[a];
  }

  std::vector<double> width_sum(k, 0.0);
  std::vector<double> sums(k);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t own = assignments[i];
    if (sizes[own] == 1) {
      continue;  // singleton: width 0
    }
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) sums[assignments[j]] += dist(i, j);
    }
    const double a = sums[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c != own && sizes[c] > 0) b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
    }
    const double denom = std::max(a, b);
    if (denom > 0.0 && b != std::numeric_limits<double>::infinity()) {
      width_sum[own] += (b - a) / denom;
    }
  }

  double total = 0.0;
  std::size_t clusters = 0;
  for (std::size_t c = 0; c < k; ++c) {
    if (sizes[c] > 0) {
      total += width_sum[c] / static_cast<double>(sizes[c]);
      ++clusters;
    }
  }
  return clusters == 0 ? 0.0 : total / static_cast<double>(clusters);
}

double silhouette(std::span<const FeatureVector> vectors, const ClusterResult& result) {
  return silhouette(DistanceMatrix(vectors), result.assignments, result.k);
}

const ClusterResult& KSelection::best() const {
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve[i].first == best_k) return results[i];
  }
  throw InvalidArgument("empty K selection");
}

KSelection select_k(const DistanceMatrix& dist, std::size_t k_min, std::size_t k_max, std::uint64_t seed) {
  if (k_min < 2 || k_max < k_min) {
    throw InvalidArgument("K range must satisfy 2 <= k_min <= k_max");
  }
  const std::size_t upper = std::min(k_max, dist.distinct_count());
  if (upper < k_min) {
    throw InvalidArgument("only " + std::to_string(dist.distinct_count()) + " distinct feature vectors; cannot form " +
                          std::to_string(k_min) + " clusters");
  }
  KSelection sel;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = k_min; k <= upper; ++k) {
    auto r = kmedoids(dist, k, seed);
    sel.curve.emplace_back(k, r.global_silhouette);
    if (r.global_silhouette > best) {
      best = r.global_silhouette;
      sel.best_k = k;
    }
    sel.results.push_back(std::move(r));
  }
  return sel;
}

KSelection select_k(std::span<const FeatureVector> vectors, std::size_t k_min, std::size_t k_max, std::uint64_t seed) {
  return select_k(DistanceMatrix(vectors), k_min, k_max, seed);
}

PurityResult purity(const ClusterResult& result, std::span<const std::string> labels) {
  if (labels.size() != result.assignments.size()) {
    throw InvalidArgument("ground truth does not label every experiment");
  }
  std::vector<std::map<std::string_view, std::size_t>> tallies(result.k);
  std::vector<std::size_t> sizes(result.k, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ++tallies[result.assignments[i]][labels[i]];
    ++sizes[result.assignments[i]];
  }
  PurityResult out;
  std::size_t majority_total = 0;
  for (std::size_t c = 0; c < result.k; ++c) {
    std::size_t majority = 0;
    for (const auto& [_, count] : tallies[c]) majority = std::max(majority, count);
    out.per_cluster.push_back(sizes[c] == 0 ? 0.0 : static_cast<double>(majority) / static_cast<double>(sizes[c]));
    majority_total += majority;
  }
  out.overall = labels.empty() ? 0.0 : static_cast<double>(majority_total) / static_cast<double>(labels.size());
  return out;
}

std::vector<ClusterSummary> summarize_clusters(const ClusterResult& result, std::span<const FeatureVector> vectors,
                                               Representation representation, std::size_t d, std::size_t top_n) {
  const std::size_t width = representation == Representation::Seq ? d : 2 * d;
  std::vector<std::vector<double>> sums(result.k, std::vector<double>(width, 0.0));
  std::vector<ClusterSummary> out(result.k);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const auto c = result.assignments[i];
    ++out[c].size;
    for (std::size_t f = 0; f < width; ++f) sums[c][f] += vectors[i].values[f];
  }
  auto top = [&](const std::vector<double>& s, std::size_t offset) {
    std::vector<SymbolWeight> w;
    for (std::size_t f = 0; f < d; ++f) {
      if (s[offset + f] > 0.0) w.push_back({Symbol{static_cast<std::uint32_t>(f)}, s[offset + f]});
    }
    std::stable_sort(w.begin(), w.end(), [](const SymbolWeight& a, const SymbolWeight& b) { return a.weight > b.weight; });
    if (w.size() > top_n) w.resize(top_n);
    return w;
  };
  for (std::size_t c = 0; c < result.k; ++c) {
    out[c].cluster = c;
    out[c].medoid_id = vectors[result.medoids[c]].experiment_id;
    out[c].top_spurious = top(sums[c], 0);
    if (representation != Representation::Seq) out[c].top_missing = top(sums[c], d);
  }
  return out;
}

}  // namespace tracefail
