#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tracefail/clustering.hpp"
#include "tracefail/detector.hpp"
#include "tracefail/ground_truth.hpp"

namespace tracefail {

struct AnalysisSettings {
  Thresholds thresholds;
  std::size_t max_order = 5;
  std::size_t workers = 1;
};

/// summary.json: settings, per-experiment counts and, when ground truth is
/// given, LCS versus LCS+VMM detection metrics.
nlohmann::json summary_json(std::span<const AnomalyReport> reports, const SymbolTable& table,
                            const AnalysisSettings& settings, const GroundTruth* truth,
                            std::optional<double> elapsed_seconds);

struct ClusterSettings {
  Representation representation = Representation::Vmm;
  std::size_t k_min = 2;
  std::size_t k_max = 20;
  std::uint64_t seed = 0;
};

/// cluster.json: K curve, chosen K, assignments, medoids, per-cluster top
/// anomalies and, when labels are given, purity.
nlohmann::json cluster_json(const KSelection& selection, std::span<const FeatureVector> vectors,
                            const SymbolTable& table, const ClusterSettings& settings,
                            const std::vector<std::string>* labels);

std::string html_escape(std::string_view text);

/// Failure-mode distribution page. Reads only the JSON documents.
std::string render_index_html(const nlohmann::json& cluster, const nlohmann::json& summary,
                              const std::optional<std::string>& generated_at);

/// Anomaly timeline of one experiment. Reads only the JSON documents.
std::string render_timeline_html(const nlohmann::json& report, const nlohmann::json& symbols,
                                 const std::optional<std::string>& generated_at);

}  // namespace tracefail
