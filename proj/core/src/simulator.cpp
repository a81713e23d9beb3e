#include "tracefail/simulator.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tracefail/error.hpp"
#include "tracefail/rng.hpp"
#include "tracefail/toml_lite.hpp"

namespace tracefail {

using nlohmann::json;

namespace {

// Stream ids for mix_seed; each kind of draw gets its own sequence.
enum Stream : std::uint64_t { kFaultFree = 1, kFaulty = 2, kIdle = 3, kBackbone = 10, kBursts = 11, kCatalog = 12 };

constexpr std::int64_t kEpochUs = 1'700'000'000'000'000;

void check_symbol(const WorkloadSpec& spec, Symbol s, std::string_view what) {
  if (s.id >= spec.alphabet_size()) {
    throw InvalidArgument(std::string(what) + " symbol " + std::to_string(s.id) + " outside an alphabet of size " +
                          std::to_string(spec.alphabet_size()));
  }
}

void check_prob(double p, std::string_view what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw InvalidArgument(std::string(what) + " must lie in [0,1]");
  }
}

std::string padded(std::string_view prefix, std::size_t index, std::size_t count) {
  std::size_t width = 4;
  for (std::size_t c = count; c >= 10000; c /= 10) ++width;
  std::string digits = std::to_string(index);
  return std::string(prefix) + std::string(width > digits.size() ? width - digits.size() : 0, '0') + digits;
}

// One event of a trace under construction.
struct Item {
  Symbol symbol;
  std::optional<std::string> status;  // ReplaceStatus override
  std::optional<std::size_t> origin;  // backbone position, if it came from the backbone
  std::optional<std::size_t> planted;  // index of the edit that planted it
};

std::vector<Item> noisy_run(const WorkloadSpec& spec, Rng& rng) {
  const auto& noise = spec.noise;
  const std::size_t n = spec.backbone.size();

  std::vector<std::vector<Symbol>> before(n + 1);
  for (const auto& opt : noise.optional_events) {
    if (rng.bernoulli(noise.optional_event_prob)) before[opt.position].push_back(opt.symbol);
  }

  std::vector<Item> items;
  items.reserve(n + noise.optional_events.size());
  for (std::size_t p = 0; p <= n; ++p) {
    for (const auto s : before[p]) items.push_back({s, std::nullopt, std::nullopt, std::nullopt});
    if (p < n) items.push_back({spec.backbone[p], std::nullopt, p, std::nullopt});
  }

  for (std::size_t i = 0; i + 1 < items.size();) {
    if (rng.bernoulli(noise.swap_prob)) {
      std::swap(items[i], items[i + 1]);
      i += 2;
    } else {
      i += 1;
    }
  }
  return items;
}

// Interleaves background idle events and stamps synthetic times.
Trace render(const WorkloadSpec& spec, const std::vector<Item>& items, std::string id, TraceKind kind, Rng& rng) {
  Trace trace{std::move(id), kind, {}};
  trace.events.reserve(items.size() + items.size() / 8);
  std::int64_t now = kEpochUs;
  auto emit = [&](Symbol s, const std::optional<std::string>& status) {
    const auto& key = spec.vocabulary[s.id];
    now += rng.between(20, 2000);
    trace.events.push_back({now, key.sender, key.service_api, status.value_or(key.response_status), rng.between(50, 5000)});
  };
  auto background = [&] {
    if (!spec.idle_types.empty() && rng.bernoulli(spec.noise.idle_rate)) {
      emit(spec.idle_types[rng.below(spec.idle_types.size())], std::nullopt);
    }
  };
  for (const auto& item : items) {
    background();
    emit(item.symbol, item.status);
  }
  background();
  return trace;
}

}  // namespace

void WorkloadSpec::validate() const {
  if (vocabulary.empty()) {
    throw InvalidArgument("workload " + name + ": empty vocabulary");
  }
  if (std::set<EventKey>(vocabulary.begin(), vocabulary.end()).size() != vocabulary.size()) {
    throw InvalidArgument("workload " + name + ": vocabulary keys must be distinct");
  }
  if (backbone.empty()) {
    throw InvalidArgument("workload " + name + ": empty backbone");
  }
  for (const auto s : backbone) check_symbol(*this, s, "backbone");
  check_prob(noise.swap_prob, "swap_prob");
  check_prob(noise.optional_event_prob, "optional_event_prob");
  check_prob(noise.idle_rate, "idle_rate");
  for (const auto& opt : noise.optional_events) {
    check_symbol(*this, opt.symbol, "optional event");
    if (opt.position > backbone.size()) {
      throw InvalidArgument("optional event position " + std::to_string(opt.position) + " beyond backbone length " +
                            std::to_string(backbone.size()));
    }
  }
  for (const auto s : idle_types) {
    check_symbol(*this, s, "idle");
    if (std::find(backbone.begin(), backbone.end(), s) != backbone.end()) {
      throw InvalidArgument("idle type " + std::to_string(s.id) + " also occurs in the backbone");
    }
    for (const auto& opt : noise.optional_events) {
      if (opt.symbol == s) throw InvalidArgument("idle type " + std::to_string(s.id) + " is also an optional event");
    }
  }
}

std::vector<EventKey> default_vocabulary(std::size_t d) {
  static const char* const kSenders[] = {"gateway", "compute", "scheduler", "network", "volume", "image", "identity"};
  std::vector<EventKey> keys;
  keys.reserve(d);
  for (std::size_t k = 0; k < d; ++k) {
    keys.push_back({kSenders[k % std::size(kSenders)], "op_" + std::to_string(k), "OK"});
  }
  return keys;
}

std::vector<Symbol> random_backbone(std::size_t length, Symbol first, Symbol last, std::uint64_t seed) {
  if (last < first) throw InvalidArgument("backbone symbol range is empty");
  Rng rng(seed);
  std::vector<Symbol> out(length);
  for (auto& s : out) s = Symbol{static_cast<std::uint32_t>(rng.between(first.id, last.id))};
  return out;
}

std::vector<OptionalEvent> optional_bursts(std::size_t backbone_length, std::size_t count, std::size_t slots,
                                           Symbol first, Symbol last, std::uint64_t seed) {
  if (last < first) throw InvalidArgument("optional symbol range is empty");
  Rng rng(seed);
  std::vector<OptionalEvent> out;
  for (std::size_t b = 0; b < count; ++b) {
    const std::size_t pos = std::max<std::size_t>(1, (b + 1) * backbone_length / (count + 1));
    for (std::size_t s = 0; s < slots; ++s) {
      out.push_back({pos, Symbol{static_cast<std::uint32_t>(rng.between(first.id, last.id))}});
    }
  }
  return out;
}

std::string format_edit(const Edit& edit) {
  std::ostringstream os;
  std::visit(
      [&](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, Insert>) {
          os << "insert " << e.position << ' ' << e.symbol.id;
        } else if constexpr (std::is_same_v<T, Delete>) {
          os << "delete " << e.position;
        } else {
          os << "replace " << e.position << ' ' << e.status;
        }
      },
      edit);
  return os.str();
}

Edit parse_edit(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string op;
  long long position = -1;
  in >> op >> position;
  auto bad = [&](std::string_view why) {
    return ParseError("edit '" + std::string(text) + "': " + std::string(why));
  };
  if (!in || position < 0) throw bad("expected '<op> <position> ...'");
  std::string arg;
  in >> arg;
  std::string rest;
  if (in >> rest) throw bad("trailing text");
  const auto pos = static_cast<std::size_t>(position);
  if (op == "delete") {
    if (!arg.empty()) throw bad("delete takes only a position");
    return Delete{pos};
  }
  if (arg.empty()) throw bad(op + " needs a third field");
  if (op == "insert") {
    std::size_t used = 0;
    unsigned long sym = 0;
    try {
      sym = std::stoul(arg, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != arg.size()) throw bad("symbol must be an integer");
    return Insert{pos, Symbol{static_cast<std::uint32_t>(sym)}};
  }
  if (op == "replace") return ReplaceStatus{pos, arg};
  throw bad("unknown operation '" + op + "' (expected insert, delete or replace)");
}

void FaultSpec::validate(const WorkloadSpec& workload) const {
  const std::size_t n = workload.backbone.size();
  std::set<std::size_t> touched;
  for (const auto& edit : edits) {
    const std::string where = "fault " + mode_label + ", edit '" + format_edit(edit) + "'";
    if (const auto* ins = std::get_if<Insert>(&edit)) {
      if (ins->position > n) throw InvalidArgument(where + ": position beyond backbone length " + std::to_string(n));
      check_symbol(workload, ins->symbol, where + ":");
      if (std::find(workload.idle_types.begin(), workload.idle_types.end(), ins->symbol) != workload.idle_types.end()) {
        throw InvalidArgument(where + ": inserted symbol is an idle type");
      }
      continue;
    }
    const std::size_t p = std::holds_alternative<Delete>(edit) ? std::get<Delete>(edit).position
                                                               : std::get<ReplaceStatus>(edit).position;
    if (p >= n) throw InvalidArgument(where + ": position beyond backbone length " + std::to_string(n));
    if (!touched.insert(p).second) throw InvalidArgument(where + ": backbone event already edited");
    if (const auto* rep = std::get_if<ReplaceStatus>(&edit)) {
      if (rep->status.empty() || rep->status == workload.vocabulary[workload.backbone[p].id].response_status) {
        throw InvalidArgument(where + ": status must differ from the original");
      }
    }
  }
}

std::vector<FaultSpec> random_catalog(const WorkloadSpec& workload, const CatalogOptions& o) {
  workload.validate();
  const std::size_t n = workload.backbone.size();
  if (o.delete_run == 0) throw InvalidArgument("delete_run must be positive");
  const std::size_t needed = o.inserts + o.deletes * o.delete_run + o.replaces;
  if (o.min_position >= n || needed * 2 > n - o.min_position) {
    throw InvalidArgument("backbone too short for the requested edits per mode");
  }
  if (o.inserts > 0) {
    check_symbol(workload, o.error_first, "error");
    check_symbol(workload, o.error_last, "error");
    if (o.error_last < o.error_first) throw InvalidArgument("error symbol range is empty");
  }

  Rng rng(o.seed);
  std::vector<FaultSpec> catalog;
  for (std::size_t m = 0; m < o.modes; ++m) {
    FaultSpec f{(m + 1 < 10 ? "mode-0" : "mode-") + std::to_string(m + 1), {}};
    std::vector<bool> used(n, false);
    auto take = [&](std::size_t run) {
      for (;;) {
        const auto start = o.min_position + static_cast<std::size_t>(rng.below(n - o.min_position - run + 1));
        if (std::none_of(used.begin() + static_cast<std::ptrdiff_t>(start),
                         used.begin() + static_cast<std::ptrdiff_t>(start + run), [](bool u) { return u; })) {
          std::fill_n(used.begin() + static_cast<std::ptrdiff_t>(start), run, true);
          return start;
        }
      }
    };
    for (std::size_t i = 0; i < o.deletes; ++i) {
      const auto start = take(o.delete_run);
      for (std::size_t r = 0; r < o.delete_run; ++r) f.edits.emplace_back(Delete{start + r});
    }
    for (std::size_t i = 0; i < o.replaces; ++i) f.edits.emplace_back(ReplaceStatus{take(1), o.error_status});
    for (std::size_t i = 0; i < o.inserts; ++i) {
      const auto p = take(1);
      f.edits.emplace_back(Insert{p, Symbol{static_cast<std::uint32_t>(rng.between(o.error_first.id, o.error_last.id))}});
    }
    f.validate(workload);
    catalog.push_back(std::move(f));
  }
  return catalog;
}

Trace gen_faultfree_trace(const WorkloadSpec& spec, std::size_t index) {
  Rng rng(mix_seed(mix_seed(spec.seed, kFaultFree), index));
  const auto items = noisy_run(spec, rng);
  return render(spec, items, padded("ff-", index, index + 1), TraceKind::FaultFree, rng);
}

std::vector<Trace> gen_faultfree(const WorkloadSpec& spec, std::size_t count) {
  spec.validate();
  if (count == 0) throw InvalidArgument("fault-free count must be at least 1");
  std::vector<Trace> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(gen_faultfree_trace(spec, i));
    out.back().trace_id = padded("ff-", i, count);
  }
  return out;
}

Trace gen_idle(const WorkloadSpec& spec, std::size_t index) {
  if (spec.idle_types.empty()) throw InvalidArgument("workload has no idle types");
  Rng rng(mix_seed(mix_seed(spec.seed, kIdle), index));
  std::vector<Item> items;
  for (const auto s : spec.idle_types) items.push_back({s, std::nullopt, std::nullopt, std::nullopt});
  for (std::size_t i = 0; i < spec.idle_types.size(); ++i) {
    items.push_back({spec.idle_types[rng.below(spec.idle_types.size())], std::nullopt, std::nullopt, std::nullopt});
  }
  WorkloadSpec quiet = spec;
  quiet.noise.idle_rate = 0.0;
  return render(quiet, items, padded("idle-", index, index + 1), TraceKind::Idle, rng);
}

std::pair<Trace, ExperimentTruth> gen_faulty(const WorkloadSpec& spec, const FaultSpec& fault, std::size_t index) {
  fault.validate(spec);
  Rng rng(mix_seed(mix_seed(spec.seed, kFaulty), index));
  auto items = noisy_run(spec, rng);

  auto locate = [&](std::size_t origin) {
    return std::find_if(items.begin(), items.end(), [&](const Item& it) { return it.origin == origin; });
  };
  std::vector<PlantedAnomaly> missing;
  for (std::size_t e = 0; e < fault.edits.size(); ++e) {
    const auto& edit = fault.edits[e];
    if (const auto* ins = std::get_if<Insert>(&edit)) {
      // Anchor on the first surviving backbone event at or after the position.
      auto at = items.end();
      for (std::size_t p = ins->position; p < spec.backbone.size() && at == items.end(); ++p) at = locate(p);
      items.insert(at, Item{ins->symbol, std::nullopt, std::nullopt, e});
    } else if (const auto* del = std::get_if<Delete>(&edit)) {
      const auto at = locate(del->position);
      missing.push_back({Polarity::Missing, spec.vocabulary[at->symbol.id], del->position});
      items.erase(at);
    } else {
      const auto& rep = std::get<ReplaceStatus>(edit);
      const auto at = locate(rep.position);
      missing.push_back({Polarity::Missing, spec.vocabulary[at->symbol.id], rep.position});
      at->status = rep.status;
      at->planted = e;
    }
  }

  ExperimentTruth truth{padded("exp-", index, index + 1), fault.mode_label, {}};
  // Idle events are added only by render(), so indices here are post-filter positions.
  std::vector<std::pair<std::size_t, PlantedAnomaly>> spurious;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!items[i].planted) continue;
    auto key = spec.vocabulary[items[i].symbol.id];
    if (items[i].status) key.response_status = *items[i].status;
    spurious.push_back({*items[i].planted, {Polarity::Spurious, std::move(key), i}});
  }
  std::stable_sort(spurious.begin(), spurious.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& [_, a] : spurious) truth.planted.push_back(std::move(a));
  for (auto& a : missing) truth.planted.push_back(std::move(a));

  return {render(spec, items, truth.experiment_id, TraceKind::Faulty, rng), std::move(truth)};
}

Campaign simulate_campaign(const CampaignPlan& plan) {
  const auto& spec = plan.workload;
  spec.validate();
  if (plan.catalog.empty()) throw InvalidArgument("fault catalog is empty");
  for (const auto& f : plan.catalog) f.validate(spec);

  Campaign c;
  c.faultfree = gen_faultfree(spec, plan.n_faultfree);
  const std::size_t total = plan.catalog.size() * plan.n_per_fault;
  c.truth.campaign = spec.name;
  c.truth.seed = spec.seed;
  for (std::size_t m = 0; m < plan.catalog.size(); ++m) {
    for (std::size_t r = 0; r < plan.n_per_fault; ++r) {
      const std::size_t e = m * plan.n_per_fault + r;
      auto [trace, truth] = gen_faulty(spec, plan.catalog[m], e);
      trace.trace_id = padded("exp-", e, total);
      truth.experiment_id = trace.trace_id;
      c.faulty.push_back(std::move(trace));
      c.truth.experiments.push_back(std::move(truth));
    }
  }
  const std::size_t n_idle = spec.idle_types.empty() ? 0 : plan.n_idle;
  for (std::size_t i = 0; i < n_idle; ++i) {
    c.idle.push_back(gen_idle(spec, i));
    c.idle.back().trace_id = padded("idle-", i, n_idle);
  }
  return c;
}

void write_campaign(const Campaign& campaign, const std::filesystem::path& out) {
  namespace fs = std::filesystem;
  auto write_set = [&](const std::vector<Trace>& traces, TraceKind kind) {
    const fs::path dir = out / std::string(directory_name(kind));
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
    for (const auto& t : traces) {
      const fs::path file = dir / (t.trace_id + ".jsonl");
      std::ofstream os(file, std::ios::binary);
      write_trace(os, t);
      if (!os) throw Error("cannot write " + file.string());
    }
  };
  write_set(campaign.faultfree, TraceKind::FaultFree);
  write_set(campaign.faulty, TraceKind::Faulty);
  write_set(campaign.idle, TraceKind::Idle);
  const fs::path gt = out / "ground_truth.json";
  std::ofstream os(gt, std::ios::binary);
  os << json(campaign.truth).dump(2) << '\n';
  if (!os) throw Error("cannot write " + gt.string());
}

GroundTruth gen_campaign(const CampaignPlan& plan, const std::filesystem::path& out) {
  auto campaign = simulate_campaign(plan);
  write_campaign(campaign, out);
  return std::move(campaign.truth);
}

namespace {

void only_keys(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
  if (!obj.is_object()) throw ParseError(std::string(where) + " must be a table");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ParseError(std::string(where) + ": unknown key '" + key + "'");
    }
  }
}

Symbol symbol_of(const json& v) { return Symbol{v.get<std::uint32_t>()}; }

std::pair<Symbol, Symbol> range_of(const json& v, std::string_view what) {
  if (!v.is_array() || v.size() != 2) throw ParseError(std::string(what) + " must be [first, last]");
  return {symbol_of(v[0]), symbol_of(v[1])};
}

}  // namespace

CampaignPlan plan_from_json(const json& spec) {
  try {
    only_keys(spec, {"name", "seed", "n_faultfree", "n_per_fault", "n_idle", "workload", "catalog", "fault"}, "spec");
    CampaignPlan plan;
    auto& w = plan.workload;
    w.name = spec.value("name", std::string("campaign"));
    w.seed = spec.value("seed", std::uint64_t{0});
    plan.n_faultfree = spec.value("n_faultfree", plan.n_faultfree);
    plan.n_per_fault = spec.value("n_per_fault", plan.n_per_fault);
    plan.n_idle = spec.value("n_idle", plan.n_idle);

    if (!spec.contains("workload")) throw ParseError("spec: missing [workload] table");
    const auto& wl = spec.at("workload");
    only_keys(wl,
              {"alphabet_size", "vocabulary", "backbone", "backbone_length", "backbone_symbols", "swap_prob",
               "optional_event_prob", "optional_events", "bursts", "idle_types", "idle_rate"},
              "[workload]");
    if (wl.contains("vocabulary")) {
      for (const auto& k : wl.at("vocabulary")) w.vocabulary.push_back(EventKey::parse(k.get<std::string>()));
      if (wl.contains("alphabet_size") && wl.at("alphabet_size").get<std::size_t>() != w.vocabulary.size()) {
        throw ParseError("[workload]: alphabet_size disagrees with the vocabulary length");
      }
    } else if (wl.contains("alphabet_size")) {
      w.vocabulary = default_vocabulary(wl.at("alphabet_size").get<std::size_t>());
    } else {
      throw ParseError("[workload]: needs alphabet_size or vocabulary");
    }

    if (wl.contains("backbone") == wl.contains("backbone_length")) {
      throw ParseError("[workload]: give exactly one of backbone or backbone_length");
    }
    if (wl.contains("backbone")) {
      for (const auto& s : wl.at("backbone")) w.backbone.push_back(symbol_of(s));
    } else {
      const auto [first, last] = wl.contains("backbone_symbols")
                                     ? range_of(wl.at("backbone_symbols"), "backbone_symbols")
                                     : std::pair{Symbol{0}, Symbol{static_cast<std::uint32_t>(w.alphabet_size() - 1)}};
      w.backbone = random_backbone(wl.at("backbone_length").get<std::size_t>(), first, last, mix_seed(w.seed, kBackbone));
    }

    w.noise.swap_prob = wl.value("swap_prob", 0.0);
    w.noise.optional_event_prob = wl.value("optional_event_prob", 0.0);
    w.noise.idle_rate = wl.value("idle_rate", 0.0);
    if (wl.contains("optional_events")) {
      for (const auto& pair : wl.at("optional_events")) {
        if (!pair.is_array() || pair.size() != 2) throw ParseError("optional_events entries must be [position, symbol]");
        w.noise.optional_events.push_back({pair[0].get<std::size_t>(), symbol_of(pair[1])});
      }
    }
    if (wl.contains("bursts")) {
      const auto& b = wl.at("bursts");
      only_keys(b, {"count", "slots", "symbols"}, "bursts");
      const auto [first, last] = range_of(b.at("symbols"), "bursts.symbols");
      auto extra = optional_bursts(w.backbone.size(), b.at("count").get<std::size_t>(), b.at("slots").get<std::size_t>(),
                                   first, last, mix_seed(w.seed, kBursts));
      w.noise.optional_events.insert(w.noise.optional_events.end(), extra.begin(), extra.end());
    }
    if (wl.contains("idle_types")) {
      for (const auto& s : wl.at("idle_types")) w.idle_types.push_back(symbol_of(s));
    }
    w.validate();

    if (spec.contains("catalog")) {
      const auto& c = spec.at("catalog");
      only_keys(c, {"modes", "inserts", "deletes", "delete_run", "replaces", "error_symbols", "error_status", "min_position"}, "[catalog]");
      CatalogOptions o;
      o.modes = c.value("modes", o.modes);
      o.inserts = c.value("inserts", o.inserts);
      o.deletes = c.value("deletes", o.deletes);
      o.delete_run = c.value("delete_run", o.delete_run);
      o.replaces = c.value("replaces", o.replaces);
      o.error_status = c.value("error_status", o.error_status);
      o.min_position = c.value("min_position", o.min_position);
      if (o.inserts > 0) std::tie(o.error_first, o.error_last) = range_of(c.at("error_symbols"), "error_symbols");
      o.seed = mix_seed(w.seed, kCatalog);
      plan.catalog = random_catalog(w, o);
    }
    if (spec.contains("fault")) {
      for (const auto& f : spec.at("fault")) {
        only_keys(f, {"mode", "edits"}, "[[fault]]");
        FaultSpec fault{f.at("mode").get<std::string>(), {}};
        for (const auto& e : f.at("edits")) fault.edits.push_back(parse_edit(e.get<std::string>()));
        fault.validate(w);
        plan.catalog.push_back(std::move(fault));
      }
    }
    if (plan.catalog.empty()) throw ParseError("spec defines no failure modes ([catalog] or [[fault]])");
    if (plan.n_faultfree == 0 || plan.n_per_fault == 0) throw ParseError("n_faultfree and n_per_fault must be positive");
    return plan;
  } catch (const json::exception& e) {
    throw ParseError(std::string("spec: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("spec: ") + e.what());
  }
}

CampaignPlan load_campaign_plan(const std::filesystem::path& spec_file) {
  return plan_from_json(load_toml(spec_file));
}

}  // namespace tracefail
