#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tracefail/trace_model.hpp"

namespace tracefail {

enum class Polarity { Spurious, Missing };

std::string_view to_string(Polarity p);

/// One anomaly planted by the campaign simulator.
struct PlantedAnomaly {
  Polarity polarity = Polarity::Spurious;
  EventKey key;
  /// Spurious: index of the planted event in the faulty trace after idle
  /// filtering. Missing: index of the removed event in the workload backbone.
  std::size_t position = 0;
  friend bool operator==(const PlantedAnomaly&, const PlantedAnomaly&) = default;
};

struct ExperimentTruth {
  std::string experiment_id;
  std::string mode_label;
  std::vector<PlantedAnomaly> planted;
  friend bool operator==(const ExperimentTruth&, const ExperimentTruth&) = default;
};

struct GroundTruth {
  std::string campaign;
  std::uint64_t seed = 0;
  std::vector<ExperimentTruth> experiments;

  [[nodiscard]] std::map<std::string, std::size_t> class_sizes() const;
  [[nodiscard]] const ExperimentTruth* find(std::string_view experiment_id) const;
  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

void to_json(nlohmann::json& j, const GroundTruth& truth);
void from_json(const nlohmann::json& j, GroundTruth& truth);

GroundTruth load_ground_truth(const std::string& path);

}  // namespace tracefail
