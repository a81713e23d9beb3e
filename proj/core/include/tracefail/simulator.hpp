#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tracefail/ground_truth.hpp"
#include "tracefail/trace_model.hpp"

namespace tracefail {

// Symbols in this header index the workload vocabulary, not a SymbolTable
// built by the analysis side. The two meet only through event keys.

/// An event that may appear just before backbone[position].
struct OptionalEvent {
  std::size_t position = 0;  // 0..backbone length (== length: after the last event)
  Symbol symbol;
  friend bool operator==(const OptionalEvent&, const OptionalEvent&) = default;
};

struct NoiseModel {
  double swap_prob = 0.0;            // adjacent transposition, per position
  double optional_event_prob = 0.0;  // inclusion probability of each optional event
  std::vector<OptionalEvent> optional_events;
  double idle_rate = 0.0;            // background idle event between any two events
};

struct WorkloadSpec {
  std::string name = "workload";
  std::vector<EventKey> vocabulary;  // symbol id -> event key; its size is the alphabet size d
  std::vector<Symbol> backbone;      // deterministic workload skeleton
  NoiseModel noise;
  std::vector<Symbol> idle_types;    // disjoint from backbone and optional symbols
  std::uint64_t seed = 0;

  [[nodiscard]] std::size_t alphabet_size() const { return vocabulary.size(); }
  void validate() const;
};

/// d distinct keys spread over a handful of components, all with status "OK".
std::vector<EventKey> default_vocabulary(std::size_t d);

/// `length` symbols drawn uniformly from [first, last].
std::vector<Symbol> random_backbone(std::size_t length, Symbol first, Symbol last, std::uint64_t seed);

/// `count` bursts of `slots` optional events each, spread evenly over the
/// backbone (never before position 0); symbols drawn uniformly from [first, last].
std::vector<OptionalEvent> optional_bursts(std::size_t backbone_length, std::size_t count, std::size_t slots,
                                           Symbol first, Symbol last, std::uint64_t seed);

/// Insert before backbone[position] (position == length appends).
struct Insert {
  std::size_t position = 0;
  Symbol symbol;
};
/// Remove backbone[position].
struct Delete {
  std::size_t position = 0;
};
/// Keep backbone[position]'s sender and API, answer with another status.
struct ReplaceStatus {
  std::size_t position = 0;
  std::string status;
};
using Edit = std::variant<Insert, Delete, ReplaceStatus>;

std::string format_edit(const Edit& edit);
/// "insert P S", "delete P", "replace P STATUS".
Edit parse_edit(std::string_view text);

struct FaultSpec {
  std::string mode_label;
  std::vector<Edit> edits;
  void validate(const WorkloadSpec& workload) const;
};

struct CatalogOptions {
  std::size_t modes = 4;
  std::size_t inserts = 2;   // per mode
  std::size_t deletes = 1;   // per mode; each removes `delete_run` consecutive events
  std::size_t delete_run = 1;
  std::size_t replaces = 1;  // per mode
  Symbol error_first;        // inserted symbols are drawn from [error_first, error_last]
  Symbol error_last;
  std::string error_status = "ERR";
  /// Edits land at or after this backbone position. Near the start of a
  /// trace the model has too little history to expect any event strongly.
  std::size_t min_position = 8;
  std::uint64_t seed = 0;
};

/// Random catalog of distinct failure modes; edit positions never overlap
/// within a mode.
std::vector<FaultSpec> random_catalog(const WorkloadSpec& workload, const CatalogOptions& options);

/// Noise-only run of the workload. Trace `index` is an independent draw.
Trace gen_faultfree_trace(const WorkloadSpec& spec, std::size_t index);
std::vector<Trace> gen_faultfree(const WorkloadSpec& spec, std::size_t count);

/// Background-only trace containing every idle type at least once.
Trace gen_idle(const WorkloadSpec& spec, std::size_t index);

/// Noise first, then the fault's edits. Spurious ground-truth positions index
/// the trace after idle events are removed.
std::pair<Trace, ExperimentTruth> gen_faulty(const WorkloadSpec& spec, const FaultSpec& fault, std::size_t index);

struct CampaignPlan {
  WorkloadSpec workload;
  std::vector<FaultSpec> catalog;
  std::size_t n_faultfree = 20;
  std::size_t n_per_fault = 25;
  std::size_t n_idle = 1;
};

struct Campaign {
  std::vector<Trace> faultfree;
  std::vector<Trace> faulty;
  std::vector<Trace> idle;
  GroundTruth truth;
};

Campaign simulate_campaign(const CampaignPlan& plan);

/// Writes `<out>/{faultfree,faulty,idle}/<id>.jsonl` and `<out>/ground_truth.json`.
GroundTruth gen_campaign(const CampaignPlan& plan, const std::filesystem::path& out);
void write_campaign(const Campaign& campaign, const std::filesystem::path& out);

/// Builds a plan from a parsed spec file (see configs/README.md for the schema).
CampaignPlan plan_from_json(const nlohmann::json& spec);
CampaignPlan load_campaign_plan(const std::filesystem::path& spec_file);

}  // namespace tracefail
