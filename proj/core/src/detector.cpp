#include "tracefail/detector.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "tracefail/error.hpp"
#include "tracefail/warnings.hpp"

namespace tracefail {

using nlohmann::json;

void Thresholds::validate() const {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(eps_spurious) || !in_unit(eps_missing)) {
    throw InvalidArgument("thresholds must lie in [0,1]");
  }
}

std::string_view to_string(EventLabel label) {
  switch (label) {
    case EventLabel::Common:
      return "common";
    case EventLabel::Spurious:
      return "spurious";
    case EventLabel::Missing:
      return "missing";
    case EventLabel::FilteredSpurious:
      return "filtered_spurious";
    case EventLabel::FilteredMissing:
      return "filtered_missing";
  }
  return "?";
}

EventLabel parse_event_label(std::string_view text) {
  for (auto l : {EventLabel::Common, EventLabel::Spurious, EventLabel::Missing, EventLabel::FilteredSpurious,
                 EventLabel::FilteredMissing}) {
    if (to_string(l) == text) {
      return l;
    }
  }
  throw ParseError("unknown event label '" + std::string(text) + "'");
}

LabelCounts AnomalyReport::counts() const {
  LabelCounts c;
  for (const auto& e : events) {
    switch (e.label) {
      case EventLabel::Common:
        ++c.common;
        break;
      case EventLabel::Spurious:
        ++c.spurious;
        break;
      case EventLabel::Missing:
        ++c.missing;
        break;
      case EventLabel::FilteredSpurious:
        ++c.filtered_spurious;
        break;
      case EventLabel::FilteredMissing:
        ++c.filtered_missing;
        break;
    }
  }
  return c;
}

void to_json(json& j, const AnomalyReport& r) {
  json events = json::array();
  for (const auto& e : r.events) {
    json item = {{"label", to_string(e.label)}, {"sym", e.symbol.id}};
    if (e.faulty_pos) item["pos"] = *e.faulty_pos;
    if (e.reference_pos) item["ref_pos"] = *e.reference_pos;
    if (e.probability) item["p"] = *e.probability;
    events.push_back(std::move(item));
  }
  const auto c = r.counts();
  j = {{"experiment_id", r.experiment_id},
       {"selected_reference_id", r.selected_reference_id},
       {"reference_index", r.reference_index},
       {"similarity", r.similarity},
       {"faulty_length", r.faulty_length},
       {"reference_length", r.reference_length},
       {"degenerate", r.degenerate},
       {"error", r.error ? json(*r.error) : json(nullptr)},
       {"warnings", r.warnings},
       {"counts",
        {{"common", c.common},
         {"spurious", c.spurious},
         {"missing", c.missing},
         {"filtered_spurious", c.filtered_spurious},
         {"filtered_missing", c.filtered_missing}}},
       {"events", std::move(events)}};
}

void from_json(const json& j, AnomalyReport& r) {
  try {
    r = AnomalyReport{};
    r.experiment_id = j.at("experiment_id").get<std::string>();
    r.selected_reference_id = j.at("selected_reference_id").get<std::string>();
    r.reference_index = j.at("reference_index").get<std::size_t>();
    r.similarity = j.at("similarity").get<double>();
    r.faulty_length = j.at("faulty_length").get<std::size_t>();
    r.reference_length = j.at("reference_length").get<std::size_t>();
    r.degenerate = j.at("degenerate").get<bool>();
    if (!j.at("error").is_null()) {
      r.error = j.at("error").get<std::string>();
    }
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    for (const auto& item : j.at("events")) {
      ReportEvent e;
      e.label = parse_event_label(item.at("label").get<std::string>());
      e.symbol = Symbol{item.at("sym").get<std::uint32_t>()};
      if (item.contains("pos")) e.faulty_pos = item.at("pos").get<std::size_t>();
      if (item.contains("ref_pos")) e.reference_pos = item.at("ref_pos").get<std::size_t>();
      if (item.contains("p")) e.probability = item.at("p").get<double>();
      r.events.push_back(e);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed anomaly report: ") + e.what());
  }
}

AnomalyReport classify(const SymbolSequence& faulty, const SymbolSequence& reference, const VmmModel& model,
                       const Thresholds& thresholds) {
  thresholds.validate();
  const LcsDiff d = diff(faulty, reference);
  const auto fx = faulty.span();
  const auto ry = reference.span();

  AnomalyReport report;
  report.experiment_id = faulty.trace_id;
  report.selected_reference_id = reference.trace_id;
  report.faulty_length = faulty.size();
  report.reference_length = reference.size();
  report.degenerate = faulty.empty();
  report.events.reserve(faulty.size() + d.only_faultfree.size());

  auto spurious = [&](const DiffEntry& e) {
    // Conditioned on the faulty trace's own history.
    const double p = model.prob(fx.first(e.index), e.symbol);
    const auto label = p < thresholds.eps_spurious ? EventLabel::Spurious : EventLabel::FilteredSpurious;
    report.events.push_back({label, e.symbol, e.index, std::nullopt, p});
  };
  auto missing = [&](const DiffEntry& e) {
    // Conditioned on the reference trace's history.
    const double p = model.prob(ry.first(e.index), e.symbol);
    const auto label = p > thresholds.eps_missing ? EventLabel::Missing : EventLabel::FilteredMissing;
    report.events.push_back({label, e.symbol, std::nullopt, e.index, p});
  };

  auto sf = d.only_faulty.begin();
  auto sr = d.only_faultfree.begin();
  for (const auto& pair : d.common) {
    for (; sf != d.only_faulty.end() && sf->index < pair.faulty_index; ++sf) spurious(*sf);
    for (; sr != d.only_faultfree.end() && sr->index < pair.faultfree_index; ++sr) missing(*sr);
    report.events.push_back({EventLabel::Common, pair.symbol, pair.faulty_index, pair.faultfree_index, std::nullopt});
  }
  for (; sf != d.only_faulty.end(); ++sf) spurious(*sf);
  for (; sr != d.only_faultfree.end(); ++sr) missing(*sr);
  return report;
}

namespace {

std::vector<std::string> dedupe(std::vector<std::string> messages) {
  std::vector<std::string> out;
  for (auto& m : messages) {
    if (std::find(out.begin(), out.end(), m) == out.end()) {
      out.push_back(std::move(m));
    }
  }
  return out;
}

void check_pool(std::span<const SymbolSequence> pool) {
  if (pool.size() < 2) {
    throw InvalidArgument("fault-free pool needs at least 2 traces (one reference plus one for training), got " +
                          std::to_string(pool.size()));
  }
}

std::vector<SymbolSequence> without(std::span<const SymbolSequence> pool, std::size_t excluded) {
  std::vector<SymbolSequence> training;
  training.reserve(pool.size() - 1);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (i != excluded) {
      training.push_back(pool[i]);
    }
  }
  return training;
}

AnomalyReport analyze_with(const SymbolSequence& faulty, std::span<const SymbolSequence> pool,
                           const Thresholds& thresholds, const auto& model_for) {
  WarningCapture capture;
  const auto choice = select_reference(faulty.span(), pool);
  AnomalyReport report = classify(faulty, pool[choice.index], model_for(choice.index), thresholds);
  report.reference_index = choice.index;
  report.similarity = choice.similarity;
  if (report.degenerate) {
    warn("experiment " + faulty.trace_id + " has an empty event sequence; every reference event is a missing candidate");
  }
  report.warnings = dedupe(capture.take());
  return report;
}

}  // namespace

AnomalyReport analyze_experiment(const SymbolSequence& faulty, std::span<const SymbolSequence> pool,
                                 const Thresholds& thresholds, std::size_t max_order, std::size_t alphabet_size) {
  check_pool(pool);
  thresholds.validate();
  return analyze_with(faulty, pool, thresholds, [&](std::size_t excluded) {
    const auto training = without(pool, excluded);
    return VmmModel::train(training, alphabet_size, max_order);
  });
}

struct CampaignAnalyzer::ModelCache {
  explicit ModelCache(std::size_t n) : once(new std::once_flag[n]), models(n) {}
  std::unique_ptr<std::once_flag[]> once;
  std::vector<std::unique_ptr<VmmModel>> models;
};

CampaignAnalyzer::CampaignAnalyzer(std::vector<SymbolSequence> pool, std::size_t alphabet_size, Thresholds thresholds,
                                   std::size_t max_order)
    : pool_(std::move(pool)),
      alphabet_size_(alphabet_size),
      thresholds_(thresholds),
      max_order_(max_order),
      cache_(std::make_unique<ModelCache>(pool_.size())) {
  check_pool(pool_);
  thresholds_.validate();
  VmmModel probe(alphabet_size_, max_order_);  // validates the order
  (void)probe;
}

CampaignAnalyzer::~CampaignAnalyzer() = default;

const VmmModel& CampaignAnalyzer::leave_one_out_model(std::size_t excluded) const {
  if (excluded >= pool_.size()) {
    throw InvalidArgument("pool index out of range");
  }
  std::call_once(cache_->once[excluded], [&] {
    const auto training = without(pool_, excluded);
    cache_->models[excluded] = std::make_unique<VmmModel>(VmmModel::train(training, alphabet_size_, max_order_));
  });
  return *cache_->models[excluded];
}

AnomalyReport CampaignAnalyzer::analyze(const SymbolSequence& faulty) const {
  try {
    return analyze_with(faulty, pool_, thresholds_,
                        [&](std::size_t excluded) -> const VmmModel& { return leave_one_out_model(excluded); });
  } catch (const Error& e) {
    AnomalyReport failed;
    failed.experiment_id = faulty.trace_id;
    failed.faulty_length = faulty.size();
    failed.degenerate = faulty.empty();
    failed.error = e.what();
    return failed;
  }
}

std::vector<AnomalyReport> analyze_campaign(std::span<const SymbolSequence> faulty_set,
                                            std::span<const SymbolSequence> pool, const Thresholds& thresholds,
                                            std::size_t max_order, std::size_t alphabet_size, std::size_t workers) {
  const CampaignAnalyzer analyzer(std::vector<SymbolSequence>(pool.begin(), pool.end()), alphabet_size, thresholds,
                                  max_order);
  std::vector<AnomalyReport> reports(faulty_set.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < faulty_set.size(); i = next++) {
      reports[i] = analyzer.analyze(faulty_set[i]);
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(1, faulty_set.size()));
  if (workers == 1) {
    work();
    return reports;
  }
  std::vector<std::jthread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back(work);
  }
  threads.clear();  // joins
  return reports;
}

}  // namespace tracefail
