#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace tracefail {

/// One observed message: who called which remote API, and how it answered.
struct Event {
  std::int64_t timestamp_us = 0;
  std::string sender;
  std::string service_api;
  std::string response_status;
  std::int64_t duration_us = 0;  // reporting only; not part of the symbol identity
};

enum class TraceKind { FaultFree, Faulty, Idle };

std::string_view to_string(TraceKind kind);
/// Directory name used in the campaign layout ("faultfree", "faulty", "idle").
std::string_view directory_name(TraceKind kind);

struct Trace {
  std::string trace_id;
  TraceKind kind = TraceKind::FaultFree;
  std::vector<Event> events;  // timestamp order, stable on ties
};

/// Dense event-type identifier, 0..d-1 within one SymbolTable.
struct Symbol {
  std::uint32_t id = 0;
  friend constexpr auto operator<=>(Symbol, Symbol) = default;
};

/// The identity of an event type: sender, API and response status.
struct EventKey {
  std::string sender;
  std::string service_api;
  std::string response_status;

  friend auto operator<=>(const EventKey&, const EventKey&) = default;

  static EventKey of(const Event& e) { return {e.sender, e.service_api, e.response_status}; }
  /// "sender|api|status", used in reports and ground-truth files.
  [[nodiscard]] std::string str() const;
  static EventKey parse(std::string_view text);
};

/// Bijection between event keys and dense symbols. Immutable once built; any
/// lookup of an unknown key throws FrozenTableError.
class SymbolTable {
 public:
  SymbolTable() = default;

  /// Assigns ids in first-occurrence order across `traces` (in order).
  static SymbolTable build(std::span<const Trace> traces);
  static SymbolTable from_keys(std::vector<EventKey> keys);

  [[nodiscard]] Symbol encode(const EventKey& key) const;
  [[nodiscard]] std::optional<Symbol> find(const EventKey& key) const;
  [[nodiscard]] const EventKey& decode(Symbol s) const;
  [[nodiscard]] std::size_t size() const { return keys_.size(); }
  [[nodiscard]] const std::vector<EventKey>& keys() const { return keys_; }

  friend bool operator==(const SymbolTable& a, const SymbolTable& b) { return a.keys_ == b.keys_; }

 private:
  std::vector<EventKey> keys_;
  std::map<EventKey, Symbol> index_;
};

void to_json(nlohmann::json& j, const SymbolTable& table);
void from_json(const nlohmann::json& j, SymbolTable& table);

struct SymbolSequence {
  std::string trace_id;
  std::vector<Symbol> symbols;

  [[nodiscard]] std::size_t size() const { return symbols.size(); }
  [[nodiscard]] bool empty() const { return symbols.empty(); }
  [[nodiscard]] std::span<const Symbol> span() const { return symbols; }
  friend bool operator==(const SymbolSequence&, const SymbolSequence&) = default;
};

/// Parses one JSON-Lines trace. `source` names the stream in error messages.
Trace parse_trace(std::istream& in, std::string trace_id, TraceKind kind, std::string_view source = "<stream>");

/// Reads `path`: a single .jsonl file yields one trace, a directory yields one
/// trace per *.jsonl file in file-name order. Trace ids are the file stems.
std::vector<Trace> ingest_traces(const std::filesystem::path& path, TraceKind kind);

/// Writes `trace` in the JSON-Lines trace format.
void write_trace(std::ostream& out, const Trace& trace);

SymbolTable build_symbol_table(std::span<const Trace> traces);

SymbolSequence encode(const Trace& trace, const SymbolTable& table);

/// Set of event types observed in idle traces; `mask[s.id]` is true for idle types.
std::vector<bool> idle_mask(std::span<const Trace> idle, const SymbolTable& table);

/// Removes every event whose type occurs anywhere in `idle`, keeping order.
SymbolSequence filter_idle(const Trace& trace, const Trace& idle, const SymbolTable& table);
SymbolSequence filter_idle(const SymbolSequence& sequence, const std::vector<bool>& mask);

/// Fault-free pool and experiments symbolized with one table, idle types removed.
struct EncodedCampaign {
  SymbolTable table;  // first occurrence over fault-free, faulty, then idle traces
  std::vector<SymbolSequence> pool;
  std::vector<SymbolSequence> experiments;
};

EncodedCampaign encode_campaign(std::span<const Trace> faultfree, std::span<const Trace> faulty,
                                std::span<const Trace> idle);

}  // namespace tracefail
