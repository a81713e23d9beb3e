#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tracefail/alignment.hpp"
#include "tracefail/trace_model.hpp"
#include "tracefail/vmm.hpp"

namespace tracefail {

/// VMM confirmation thresholds. An LCS difference on the faulty side is
/// spurious when P < eps_spurious; one on the reference side is missing when
/// P > eps_missing. Equality filters the event.
struct Thresholds {
  double eps_spurious = 0.20;
  double eps_missing = 0.80;

  void validate() const;
  friend bool operator==(const Thresholds&, const Thresholds&) = default;
};

enum class EventLabel { Common, Spurious, Missing, FilteredSpurious, FilteredMissing };

std::string_view to_string(EventLabel label);
EventLabel parse_event_label(std::string_view text);

/// True for labels on the faulty side of the alignment.
constexpr bool faulty_side(EventLabel l) { return l == EventLabel::Spurious || l == EventLabel::FilteredSpurious; }
constexpr bool reference_side(EventLabel l) { return l == EventLabel::Missing || l == EventLabel::FilteredMissing; }

struct ReportEvent {
  EventLabel label = EventLabel::Common;
  Symbol symbol;
  std::optional<std::size_t> faulty_pos;     // set for Common and *Spurious
  std::optional<std::size_t> reference_pos;  // set for Common and *Missing
  std::optional<double> probability;         // set for every non-Common event
  friend bool operator==(const ReportEvent&, const ReportEvent&) = default;
};

struct LabelCounts {
  std::size_t common = 0;
  std::size_t spurious = 0;
  std::size_t missing = 0;
  std::size_t filtered_spurious = 0;
  std::size_t filtered_missing = 0;
  friend bool operator==(const LabelCounts&, const LabelCounts&) = default;
};

/// Classification of every event of one experiment. Events are listed in
/// alignment order: each common pair is preceded by the faulty-only and then
/// the reference-only events that lie before it.
struct AnomalyReport {
  std::string experiment_id;
  std::string selected_reference_id;
  std::size_t reference_index = 0;
  double similarity = 0.0;
  std::size_t faulty_length = 0;
  std::size_t reference_length = 0;
  std::vector<ReportEvent> events;
  bool degenerate = false;         // empty faulty sequence
  std::optional<std::string> error;  // set when the experiment could not be analyzed
  std::vector<std::string> warnings;

  [[nodiscard]] LabelCounts counts() const;
  friend bool operator==(const AnomalyReport&, const AnomalyReport&) = default;
};

void to_json(nlohmann::json& j, const AnomalyReport& report);
void from_json(const nlohmann::json& j, AnomalyReport& report);

/// Labels the LCS differences of one experiment with a model trained without
/// the reference trace. `model` must not have seen `reference`.
AnomalyReport classify(const SymbolSequence& faulty, const SymbolSequence& reference, const VmmModel& model,
                       const Thresholds& thresholds);

/// Full per-experiment procedure: pick the most similar fault-free trace,
/// train a VMM on the remaining pool members, classify the differences.
AnomalyReport analyze_experiment(const SymbolSequence& faulty, std::span<const SymbolSequence> pool,
                                 const Thresholds& thresholds, std::size_t max_order, std::size_t alphabet_size);

/// Analyzes many experiments against one fault-free pool. Leave-one-out models
/// depend only on which pool member is excluded, so each is trained at most
/// once and shared. Thread-safe.
class CampaignAnalyzer {
 public:
  CampaignAnalyzer(std::vector<SymbolSequence> pool, std::size_t alphabet_size, Thresholds thresholds,
                   std::size_t max_order = VmmModel::kDefaultOrder);
  ~CampaignAnalyzer();
  CampaignAnalyzer(const CampaignAnalyzer&) = delete;
  CampaignAnalyzer& operator=(const CampaignAnalyzer&) = delete;

  /// Never throws for per-experiment problems; they are recorded in the report.
  [[nodiscard]] AnomalyReport analyze(const SymbolSequence& faulty) const;
  /// The model trained on every pool member except `excluded`.
  [[nodiscard]] const VmmModel& leave_one_out_model(std::size_t excluded) const;

  [[nodiscard]] const std::vector<SymbolSequence>& pool() const { return pool_; }
  [[nodiscard]] const Thresholds& thresholds() const { return thresholds_; }

 private:
  struct ModelCache;
  std::vector<SymbolSequence> pool_;
  std::size_t alphabet_size_;
  Thresholds thresholds_;
  std::size_t max_order_;
  std::unique_ptr<ModelCache> cache_;
};

/// One report per faulty sequence, in input order, computed on `workers`
/// threads. Output does not depend on the worker count.
std::vector<AnomalyReport> analyze_campaign(std::span<const SymbolSequence> faulty_set,
                                            std::span<const SymbolSequence> pool, const Thresholds& thresholds,
                                            std::size_t max_order, std::size_t alphabet_size, std::size_t workers = 1);

}  // namespace tracefail
