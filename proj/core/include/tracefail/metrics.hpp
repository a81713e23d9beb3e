#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tracefail/detector.hpp"
#include "tracefail/ground_truth.hpp"

namespace tracefail {

/// Which labels count as alarms. `Lcs` is the plain alignment baseline: every
/// LCS difference is an alarm, whatever the VMM said about it.
enum class Approach { Lcs, LcsVmm };

std::string_view to_string(Approach a);
bool is_alarm(EventLabel label, Approach approach);

/// Per-event ground truth for one report.
struct EventTruth {
  std::vector<bool> anomalous;  // index-aligned with report.events
  std::size_t unresolved = 0;   // planted anomalies with no counterpart event
};

/// Maps an experiment's planted anomalies onto the events of its report.
///
/// A planted anomaly is assigned to an unassigned report event with the same
/// event key on the matching side of the alignment (faulty side for spurious,
/// reference side for missing). LCS differences are preferred over common
/// events; spurious ties go to the event closest to the planted position,
/// remaining ties to the earliest event.
EventTruth resolve_truth(const AnomalyReport& report, const ExperimentTruth& truth, const SymbolTable& table);

struct DetectionMetrics {
  std::size_t hits = 0;
  std::size_t false_alarms = 0;
  std::size_t total_anomalous = 0;
  std::size_t total_non_anomalous = 0;
  std::optional<double> hit_rate;          // undefined when total_anomalous == 0
  std::optional<double> false_alarm_rate;  // undefined when total_non_anomalous == 0
};

void to_json(nlohmann::json& j, const DetectionMetrics& m);

/// hit rate = hits / anomalous events; false-alarm rate = false alarms / non-anomalous events.
DetectionMetrics score_metrics(std::span<const AnomalyReport> reports, std::span<const EventTruth> truth,
                               Approach approach);

/// Resolves `truth` for every report, then scores. Reports without a ground
/// truth entry are an error.
DetectionMetrics score_campaign(std::span<const AnomalyReport> reports, const GroundTruth& truth,
                                const SymbolTable& table, Approach approach);

}  // namespace tracefail
