#include "tracefail/trace_model.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tracefail/error.hpp"
#include "tracefail/warnings.hpp"

namespace tracefail {

using nlohmann::json;

std::string_view to_string(TraceKind kind) {
  switch (kind) {
    case TraceKind::FaultFree:
      return "fault-free";
    case TraceKind::Faulty:
      return "faulty";
    case TraceKind::Idle:
      return "idle";
  }
  return "?";
}

std::string_view directory_name(TraceKind kind) {
  switch (kind) {
    case TraceKind::FaultFree:
      return "faultfree";
    case TraceKind::Faulty:
      return "faulty";
    case TraceKind::Idle:
      return "idle";
  }
  return "?";
}

std::string EventKey::str() const { return sender + '|' + service_api + '|' + response_status; }

EventKey EventKey::parse(std::string_view text) {
  const auto a = text.find('|');
  const auto b = a == std::string_view::npos ? a : text.find('|', a + 1);
  if (b == std::string_view::npos || text.find('|', b + 1) != std::string_view::npos) {
    throw ParseError("malformed event key '" + std::string(text) + "', expected sender|api|status");
  }
  return {std::string(text.substr(0, a)), std::string(text.substr(a + 1, b - a - 1)), std::string(text.substr(b + 1))};
}

SymbolTable SymbolTable::build(std::span<const Trace> traces) {
  SymbolTable table;
  for (const auto& trace : traces) {
    for (const auto& event : trace.events) {
      auto key = EventKey::of(event);
      if (!table.index_.contains(key)) {
        const Symbol s{static_cast<std::uint32_t>(table.keys_.size())};
        table.index_.emplace(key, s);
        table.keys_.push_back(std::move(key));
      }
    }
  }
  return table;
}

SymbolTable SymbolTable::from_keys(std::vector<EventKey> keys) {
  SymbolTable table;
  for (auto& key : keys) {
    const Symbol s{static_cast<std::uint32_t>(table.keys_.size())};
    if (!table.index_.emplace(key, s).second) {
      throw ParseError("duplicate event key in symbol table: " + key.str());
    }
    table.keys_.push_back(std::move(key));
  }
  return table;
}

Symbol SymbolTable::encode(const EventKey& key) const {
  if (auto s = find(key)) {
    return *s;
  }
  throw FrozenTableError("event type not in symbol table: " + key.str());
}

std::optional<Symbol> SymbolTable::find(const EventKey& key) const {
  const auto it = index_.find(key);
  if (it == index_.end()) {
    return std::nullopt;
  }
  return it->second;
}

const EventKey& SymbolTable::decode(Symbol s) const {
  if (s.id >= keys_.size()) {
    throw FrozenTableError("symbol " + std::to_string(s.id) + " outside table of size " + std::to_string(keys_.size()));
  }
  return keys_[s.id];
}

void to_json(json& j, const SymbolTable& table) {
  j = json::array();
  for (const auto& key : table.keys()) {
    j.push_back(key.str());
  }
}

void from_json(const json& j, SymbolTable& table) {
  std::vector<EventKey> keys;
  for (const auto& item : j) {
    keys.push_back(EventKey::parse(item.get<std::string>()));
  }
  table = SymbolTable::from_keys(std::move(keys));
}

namespace {

struct FieldSpec {
  const char* json_name;
  const char* domain_name;
};

constexpr FieldSpec kFields[] = {
    {"ts_us", "timestamp_us"}, {"sender", "sender"}, {"api", "service_api"}, {"status", "response_status"}, {"dur_us", "duration_us"},
};

[[noreturn]] void fail(std::string_view source, std::size_t line, const std::string& what) {
  std::ostringstream msg;
  msg << source << ": " << what << " at line " << line;
  throw ParseError(msg.str());
}

Event parse_record(const std::string& text, std::string_view source, std::size_t line) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error&) {
    fail(source, line, "malformed JSON record");
  }
  if (!j.is_object()) {
    fail(source, line, "record is not an object");
  }
  for (const auto& f : kFields) {
    if (!j.contains(f.json_name)) {
      fail(source, line, std::string("missing field ") + f.domain_name);
    }
  }
  for (const auto& [key, _] : j.items()) {
    const bool known = std::any_of(std::begin(kFields), std::end(kFields), [&](const FieldSpec& f) { return key == f.json_name; });
    if (!known) {
      fail(source, line, "unexpected field " + key);
    }
  }

  Event e;
  try {
    e.timestamp_us = j.at("ts_us").get<std::int64_t>();
    e.sender = j.at("sender").get<std::string>();
    e.service_api = j.at("api").get<std::string>();
    e.response_status = j.at("status").get<std::string>();
    e.duration_us = j.at("dur_us").get<std::int64_t>();
  } catch (const json::type_error&) {
    fail(source, line, "field has the wrong type");
  }
  if (!j.at("ts_us").is_number_integer() || !j.at("dur_us").is_number_integer()) {
    fail(source, line, "ts_us and dur_us must be integers");
  }
  if (e.sender.empty()) {
    fail(source, line, "empty field sender");
  }
  if (e.service_api.empty()) {
    fail(source, line, "empty field service_api");
  }
  if (e.timestamp_us < 0) {
    fail(source, line, "negative timestamp_us");
  }
  if (e.duration_us < 0) {
    fail(source, line, "negative duration_us");
  }
  return e;
}

}  // namespace

Trace parse_trace(std::istream& in, std::string trace_id, TraceKind kind, std::string_view source) {
  Trace trace{std::move(trace_id), kind, {}};
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    trace.events.push_back(parse_record(text, source, line));
  }
  if (trace.events.empty()) {
    throw ParseError(std::string(source) + ": empty trace");
  }
  std::stable_sort(trace.events.begin(), trace.events.end(),
                   [](const Event& a, const Event& b) { return a.timestamp_us < b.timestamp_us; });
  return trace;
}

std::vector<Trace> ingest_traces(const std::filesystem::path& path, TraceKind kind) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
  } else if (fs::is_regular_file(path)) {
    files.push_back(path);
  } else {
    throw ParseError("trace path not found: " + path.string());
  }

  std::vector<Trace> traces;
  traces.reserve(files.size());
  for (const auto& file : files) {
    std::ifstream in(file);
    if (!in) {
      throw ParseError("cannot open " + file.string());
    }
    traces.push_back(parse_trace(in, file.stem().string(), kind, file.string()));
  }
  return traces;
}

void write_trace(std::ostream& out, const Trace& trace) {
  for (const auto& e : trace.events) {
    json j = {{"ts_us", e.timestamp_us}, {"sender", e.sender}, {"api", e.service_api}, {"status", e.response_status}, {"dur_us", e.duration_us}};
    out << j.dump() << '\n';
  }
}

SymbolTable build_symbol_table(std::span<const Trace> traces) { return SymbolTable::build(traces); }

SymbolSequence encode(const Trace& trace, const SymbolTable& table) {
  SymbolSequence seq{trace.trace_id, {}};
  seq.symbols.reserve(trace.events.size());
  for (const auto& e : trace.events) {
    seq.symbols.push_back(table.encode(EventKey::of(e)));
  }
  return seq;
}

std::vector<bool> idle_mask(std::span<const Trace> idle, const SymbolTable& table) {
  std::vector<bool> mask(table.size(), false);
  for (const auto& trace : idle) {
    for (const auto& e : trace.events) {
      mask[table.encode(EventKey::of(e)).id] = true;
    }
  }
  return mask;
}

SymbolSequence filter_idle(const SymbolSequence& sequence, const std::vector<bool>& mask) {
  SymbolSequence out{sequence.trace_id, {}};
  out.symbols.reserve(sequence.size());
  for (const Symbol s : sequence.symbols) {
    if (s.id >= mask.size() || !mask[s.id]) {
      out.symbols.push_back(s);
    }
  }
  if (out.empty() && !sequence.empty()) {
    warn("trace " + sequence.trace_id + " consists solely of idle event types; filtered sequence is empty");
  }
  return out;
}

SymbolSequence filter_idle(const Trace& trace, const Trace& idle, const SymbolTable& table) {
  const auto mask = idle_mask(std::span<const Trace>(&idle, 1), table);
  return filter_idle(encode(trace, table), mask);
}

EncodedCampaign encode_campaign(std::span<const Trace> faultfree, std::span<const Trace> faulty,
                                std::span<const Trace> idle) {
  std::vector<Trace> all;
  all.reserve(faultfree.size() + faulty.size() + idle.size());
  all.insert(all.end(), faultfree.begin(), faultfree.end());
  all.insert(all.end(), faulty.begin(), faulty.end());
  all.insert(all.end(), idle.begin(), idle.end());
  EncodedCampaign out;
  out.table = SymbolTable::build(all);
  const auto mask = idle_mask(idle, out.table);
  for (const auto& t : faultfree) out.pool.push_back(filter_idle(encode(t, out.table), mask));
  for (const auto& t : faulty) out.experiments.push_back(filter_idle(encode(t, out.table), mask));
  return out;
}

}  // namespace tracefail
