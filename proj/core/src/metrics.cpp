#include "tracefail/metrics.hpp"

#include <cstdlib>
#include <limits>
#include <tuple>

#include <nlohmann/json.hpp>

#include "tracefail/error.hpp"

namespace tracefail {

using nlohmann::json;

std::string_view to_string(Approach a) { return a == Approach::Lcs ? "lcs" : "lcs_vmm"; }

bool is_alarm(EventLabel label, Approach approach) {
  switch (label) {
    case EventLabel::Common:
      return false;
    case EventLabel::Spurious:
    case EventLabel::Missing:
      return true;
    case EventLabel::FilteredSpurious:
    case EventLabel::FilteredMissing:
      return approach == Approach::Lcs;
  }
  return false;
}

EventTruth resolve_truth(const AnomalyReport& report, const ExperimentTruth& truth, const SymbolTable& table) {
  EventTruth out;
  out.anomalous.assign(report.events.size(), false);

  for (const auto& planted : truth.planted) {
    const auto symbol = table.find(planted.key);
    if (!symbol) {
      ++out.unresolved;
      continue;
    }
    const bool spurious = planted.polarity == Polarity::Spurious;

    std::size_t best = report.events.size();
    std::tuple<int, std::size_t, std::size_t> best_rank{};
    for (std::size_t i = 0; i < report.events.size(); ++i) {
      const auto& e = report.events[i];
      if (out.anomalous[i] || e.symbol != *symbol) {
        continue;
      }
      const auto pos = spurious ? e.faulty_pos : e.reference_pos;
      if (!pos) {
        continue;
      }
      const int tier = e.label == EventLabel::Common ? 1 : 0;
      const std::size_t distance =
          spurious ? static_cast<std::size_t>(std::llabs(static_cast<long long>(*pos) - static_cast<long long>(planted.position)))
                   : 0;
      const std::tuple<int, std::size_t, std::size_t> rank{tier, distance, *pos};
      if (best == report.events.size() || rank < best_rank) {
        best = i;
        best_rank = rank;
      }
    }
    if (best == report.events.size()) {
      ++out.unresolved;
    } else {
      out.anomalous[best] = true;
    }
  }
  return out;
}

void to_json(json& j, const DetectionMetrics& m) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  j = {{"hits", m.hits},
       {"false_alarms", m.false_alarms},
       {"total_anomalous", m.total_anomalous},
       {"total_non_anomalous", m.total_non_anomalous},
       {"hit_rate", opt(m.hit_rate)},
       {"false_alarm_rate", opt(m.false_alarm_rate)}};
}

DetectionMetrics score_metrics(std::span<const AnomalyReport> reports, std::span<const EventTruth> truth,
                               Approach approach) {
  if (reports.size() != truth.size()) {
    throw InvalidArgument("ground truth does not cover every report");
  }
  DetectionMetrics m;
  for (std::size_t r = 0; r < reports.size(); ++r) {
    const auto& events = reports[r].events;
    const auto& labels = truth[r].anomalous;
    if (labels.size() != events.size()) {
      throw InvalidArgument("ground truth does not cover every event of " + reports[r].experiment_id);
    }
    m.total_anomalous += truth[r].unresolved;
    for (std::size_t i = 0; i < events.size(); ++i) {
      const bool alarm = is_alarm(events[i].label, approach);
      if (labels[i]) {
        ++m.total_anomalous;
        m.hits += alarm ? 1 : 0;
      } else {
        ++m.total_non_anomalous;
        m.false_alarms += alarm ? 1 : 0;
      }
    }
  }
  if (m.total_anomalous > 0) {
    m.hit_rate = static_cast<double>(m.hits) / static_cast<double>(m.total_anomalous);
  }
  if (m.total_non_anomalous > 0) {
    m.false_alarm_rate = static_cast<double>(m.false_alarms) / static_cast<double>(m.total_non_anomalous);
  }
  return m;
}

DetectionMetrics score_campaign(std::span<const AnomalyReport> reports, const GroundTruth& truth,
                                const SymbolTable& table, Approach approach) {
  std::vector<EventTruth> resolved;
  resolved.reserve(reports.size());
  for (const auto& r : reports) {
    const auto* et = truth.find(r.experiment_id);
    if (et == nullptr) {
      throw InvalidArgument("no ground truth for experiment " + r.experiment_id);
    }
    resolved.push_back(resolve_truth(r, *et, table));
  }
  return score_metrics(reports, resolved, approach);
}

}  // namespace tracefail
