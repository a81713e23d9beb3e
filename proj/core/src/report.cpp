#include "tracefail/report.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "tracefail/metrics.hpp"

namespace tracefail {

using nlohmann::json;

namespace {

json counts_json(const LabelCounts& c) {
  return {{"common", c.common},
          {"spurious", c.spurious},
          {"missing", c.missing},
          {"filtered_spurious", c.filtered_spurious},
          {"filtered_missing", c.filtered_missing}};
}

std::string fixed(double v, int digits = 3) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string key_of(const json& symbols, std::uint32_t id) {
  if (symbols.is_array() && id < symbols.size()) return symbols[id].get<std::string>();
  return "#" + std::to_string(id);
}

const char* label_color(std::string_view label) {
  if (label == "common") return "#c8ccd2";
  if (label == "spurious") return "#d62728";
  if (label == "missing") return "#1f5fbf";
  if (label == "filtered_spurious") return "#f2a7a7";
  return "#a9c4ee";  // filtered_missing
}

const char* kStyle = R"(<style>
body{font-family:sans-serif;margin:2em;color:#222}
table{border-collapse:collapse;margin:1em 0}
td,th{border:1px solid #ccc;padding:2px 8px;text-align:left;font-size:13px}
th{background:#f0f0f0}
.meta{color:#666;font-size:12px}
.sw{display:inline-block;width:12px;height:12px;margin:0 4px 0 12px;vertical-align:middle}
</style>
)";

void page_head(std::ostringstream& os, std::string_view title) {
  os << "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>" << html_escape(title)
     << "</title>\n"
     << kStyle << "</head>\n<body>\n<h1>" << html_escape(title) << "</h1>\n";
}

void page_tail(std::ostringstream& os, const std::optional<std::string>& generated_at) {
  if (generated_at) os << "<p class=\"meta\">generated " << html_escape(*generated_at) << "</p>\n";
  os << "</body>\n</html>\n";
}

std::string weights_text(const json& list) {
  std::string out;
  for (const auto& w : list) {
    if (!out.empty()) out += ", ";
    out += w.at("event").get<std::string>() + " x" + fixed(w.at("count").get<double>(), 0);
  }
  return out.empty() ? "-" : out;
}

}  // namespace

json summary_json(std::span<const AnomalyReport> reports, const SymbolTable& table, const AnalysisSettings& settings,
                  const GroundTruth* truth, std::optional<double> elapsed_seconds) {
  json experiments = json::array();
  LabelCounts total;
  std::size_t errors = 0;
  for (const auto& r : reports) {
    const auto c = r.counts();
    total.common += c.common;
    total.spurious += c.spurious;
    total.missing += c.missing;
    total.filtered_spurious += c.filtered_spurious;
    total.filtered_missing += c.filtered_missing;
    errors += r.error ? 1 : 0;
    json e = {{"experiment_id", r.experiment_id},
              {"reference", r.selected_reference_id},
              {"similarity", r.similarity},
              {"counts", counts_json(c)},
              {"warnings", r.warnings}};
    if (r.error) e["error"] = *r.error;
    experiments.push_back(std::move(e));
  }
  json out = {{"format", "tracefail.summary"},
              {"version", 1},
              {"settings",
               {{"d", settings.max_order},
                {"eps_spurious", settings.thresholds.eps_spurious},
                {"eps_missing", settings.thresholds.eps_missing}}},
              {"alphabet_size", table.size()},
              {"experiment_count", reports.size()},
              {"error_count", errors},
              {"totals", counts_json(total)},
              {"experiments", std::move(experiments)}};
  if (truth != nullptr) {
    out["metrics"] = {{"lcs", score_campaign(reports, *truth, table, Approach::Lcs)},
                      {"lcs_vmm", score_campaign(reports, *truth, table, Approach::LcsVmm)}};
  } else {
    out["metrics"] = nullptr;
  }
  if (elapsed_seconds) out["elapsed_seconds"] = *elapsed_seconds;
  return out;
}

json cluster_json(const KSelection& selection, std::span<const FeatureVector> vectors, const SymbolTable& table,
                  const ClusterSettings& settings, const std::vector<std::string>* labels) {
  const auto& best = selection.best();
  const std::size_t d = table.size();
  const bool seq = settings.representation == Representation::Seq;
  const auto summaries = summarize_clusters(best, vectors, settings.representation, d);
  std::optional<PurityResult> pur;
  if (labels != nullptr) pur = purity(best, *labels);

  auto weights = [&](const std::vector<SymbolWeight>& list) {
    json arr = json::array();
    for (const auto& w : list) arr.push_back({{"event", table.decode(w.symbol).str()}, {"count", w.weight}});
    return arr;
  };

  json curve = json::array();
  for (const auto& [k, s] : selection.curve) curve.push_back({{"k", k}, {"silhouette", s}});
  json clusters = json::array();
  for (const auto& s : summaries) {
    json c = {{"cluster", s.cluster}, {"size", s.size}, {"medoid", s.medoid_id}};
    if (seq) {
      c["top_events"] = weights(s.top_spurious);
    } else {
      c["top_spurious"] = weights(s.top_spurious);
      c["top_missing"] = weights(s.top_missing);
    }
    if (pur) c["purity"] = pur->per_cluster[s.cluster];
    if (labels != nullptr) {
      std::map<std::string, std::size_t> modes;
      for (std::size_t i = 0; i < best.assignments.size(); ++i) {
        if (best.assignments[i] == s.cluster) ++modes[(*labels)[i]];
      }
      c["modes"] = modes;
    }
    clusters.push_back(std::move(c));
  }
  json assignments = json::array();
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    assignments.push_back({{"experiment_id", vectors[i].experiment_id}, {"cluster", best.assignments[i]}});
  }
  return {{"format", "tracefail.cluster"},
          {"version", 1},
          {"representation", to_string(settings.representation)},
          {"seed", settings.seed},
          {"k_range", {settings.k_min, settings.k_max}},
          {"curve", std::move(curve)},
          {"best_k", selection.best_k},
          {"silhouette", best.global_silhouette},
          {"iterations", best.iterations},
          {"clusters", std::move(clusters)},
          {"assignments", std::move(assignments)},
          {"purity", pur ? json(pur->overall) : json(nullptr)}};
}

std::string html_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (const char c : text) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      case '\'':
        out += "&#39;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string render_index_html(const json& cluster, const json& summary, const std::optional<std::string>& generated_at) {
  std::ostringstream os;
  page_head(os, "Failure modes");
  const auto& clusters = cluster.at("clusters");
  const bool seq = cluster.at("representation") == "seq";

  os << "<p>representation <b>" << html_escape(cluster.at("representation").get<std::string>()) << "</b>, K* = <b>"
     << cluster.at("best_k").get<std::size_t>() << "</b>, silhouette "
     << fixed(cluster.at("silhouette").get<double>());
  if (!cluster.at("purity").is_null()) os << ", purity <b>" << fixed(cluster.at("purity").get<double>()) << "</b>";
  os << "</p>\n";

  // Distribution bar chart.
  std::size_t largest = 1;
  for (const auto& c : clusters) largest = std::max(largest, c.at("size").get<std::size_t>());
  const int bar_w = 48;
  const int gap = 24;
  const int chart_h = 200;
  const int width = static_cast<int>(clusters.size()) * (bar_w + gap) + gap;
  os << "<h2>Distribution of failure modes</h2>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << chart_h + 40 << "\" role=\"img\">\n";
  int x = gap;
  for (const auto& c : clusters) {
    const auto size = c.at("size").get<std::size_t>();
    const int h = static_cast<int>(static_cast<double>(size) / static_cast<double>(largest) * (chart_h - 20));
    const std::string tip = seq ? weights_text(c.at("top_events")) : weights_text(c.at("top_spurious"));
    os << "<rect x=\"" << x << "\" y=\"" << chart_h - h << "\" width=\"" << bar_w << "\" height=\"" << h
       << "\" fill=\"#4c78a8\"><title>" << html_escape(tip) << "</title></rect>\n";
    os << "<text x=\"" << x + bar_w / 2 << "\" y=\"" << chart_h - h - 4 << "\" font-size=\"12\" text-anchor=\"middle\">"
       << size << "</text>\n";
    os << "<text x=\"" << x + bar_w / 2 << "\" y=\"" << chart_h + 16 << "\" font-size=\"12\" text-anchor=\"middle\">C"
       << c.at("cluster").get<std::size_t>() << "</text>\n";
    x += bar_w + gap;
  }
  os << "</svg>\n";

  os << "<table>\n<tr><th>cluster</th><th>size</th><th>medoid</th>";
  if (seq) {
    os << "<th>most frequent events</th>";
  } else {
    os << "<th>top spurious</th><th>top missing</th>";
  }
  const bool with_truth = !clusters.empty() && clusters[0].contains("modes");
  if (with_truth) os << "<th>planted modes</th><th>purity</th>";
  os << "</tr>\n";
  for (const auto& c : clusters) {
    const auto medoid = c.at("medoid").get<std::string>();
    os << "<tr><td>C" << c.at("cluster").get<std::size_t>() << "</td><td>" << c.at("size").get<std::size_t>()
       << "</td><td><a href=\"exp/" << html_escape(medoid) << ".html\">" << html_escape(medoid) << "</a></td>";
    if (seq) {
      os << "<td>" << html_escape(weights_text(c.at("top_events"))) << "</td>";
    } else {
      os << "<td>" << html_escape(weights_text(c.at("top_spurious"))) << "</td><td>"
         << html_escape(weights_text(c.at("top_missing"))) << "</td>";
    }
    if (with_truth) {
      std::string modes;
      for (const auto& [m, n] : c.at("modes").items()) {
        modes += (modes.empty() ? "" : ", ") + m + " x" + std::to_string(n.get<std::size_t>());
      }
      os << "<td>" << html_escape(modes) << "</td><td>" << fixed(c.at("purity").get<double>()) << "</td>";
    }
    os << "</tr>\n";
  }
  os << "</table>\n";

  os << "<h2>Silhouette by K</h2>\n<table>\n<tr><th>K</th><th>silhouette</th></tr>\n";
  for (const auto& p : cluster.at("curve")) {
    os << "<tr><td>" << p.at("k").get<std::size_t>() << "</td><td>" << fixed(p.at("silhouette").get<double>(), 4)
       << "</td></tr>\n";
  }
  os << "</table>\n";

  std::map<std::string, json> counts;
  if (summary.is_object()) {
    for (const auto& e : summary.at("experiments")) counts[e.at("experiment_id").get<std::string>()] = e.at("counts");
    if (!summary.at("metrics").is_null()) {
      os << "<h2>Detection against ground truth</h2>\n<table>\n<tr><th>approach</th><th>hit rate</th><th>false-alarm "
            "rate</th></tr>\n";
      for (const auto& [name, m] : summary.at("metrics").items()) {
        auto rate = [](const json& v) { return v.is_null() ? std::string("n/a") : fixed(v.get<double>()); };
        os << "<tr><td>" << html_escape(name) << "</td><td>" << rate(m.at("hit_rate")) << "</td><td>"
           << rate(m.at("false_alarm_rate")) << "</td></tr>\n";
      }
      os << "</table>\n";
    }
  }

  os << "<h2>Experiments</h2>\n<table>\n<tr><th>experiment</th><th>cluster</th><th>spurious</th><th>missing</th>"
        "<th>filtered</th></tr>\n";
  for (const auto& a : cluster.at("assignments")) {
    const auto id = a.at("experiment_id").get<std::string>();
    os << "<tr><td><a href=\"exp/" << html_escape(id) << ".html\">" << html_escape(id) << "</a></td><td>C"
       << a.at("cluster").get<std::size_t>() << "</td>";
    if (const auto it = counts.find(id); it != counts.end()) {
      const auto& c = it->second;
      os << "<td>" << c.at("spurious").get<std::size_t>() << "</td><td>" << c.at("missing").get<std::size_t>()
         << "</td><td>" << c.at("filtered_spurious").get<std::size_t>() + c.at("filtered_missing").get<std::size_t>()
         << "</td>";
    } else {
      os << "<td></td><td></td><td></td>";
    }
    os << "</tr>\n";
  }
  os << "</table>\n";
  page_tail(os, generated_at);
  return os.str();
}

std::string render_timeline_html(const json& report, const json& symbols, const std::optional<std::string>& generated_at) {
  std::ostringstream os;
  const auto id = report.at("experiment_id").get<std::string>();
  page_head(os, "Experiment " + id);
  os << "<p><a href=\"../index.html\">back to failure modes</a></p>\n";
  os << "<p>reference <b>" << html_escape(report.at("selected_reference_id").get<std::string>())
     << "</b>, similarity " << fixed(report.at("similarity").get<double>()) << ", " << report.at("faulty_length")
     << " faulty events, " << report.at("reference_length") << " reference events</p>\n";
  if (!report.at("error").is_null()) {
    os << "<p><b>error:</b> " << html_escape(report.at("error").get<std::string>()) << "</p>\n";
  }
  for (const auto& w : report.at("warnings")) os << "<p class=\"meta\">warning: " << html_escape(w.get<std::string>()) << "</p>\n";

  os << "<p>";
  for (const char* l : {"common", "spurious", "missing", "filtered_spurious", "filtered_missing"}) {
    os << "<span class=\"sw\" style=\"background:" << label_color(l) << "\"></span>" << l;
  }
  os << "</p>\n";

  const auto& events = report.at("events");
  const int cell = 6;
  const int per_row = 150;
  const int rows = std::max<int>(1, (static_cast<int>(events.size()) + per_row - 1) / per_row);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << per_row * cell << "\" height=\"" << rows * (cell * 4)
     << "\" role=\"img\">\n";
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    const auto label = e.at("label").get<std::string>();
    const int col = static_cast<int>(i % per_row);
    const int row = static_cast<int>(i / per_row);
    // Faulty-side events sit high, reference-side low, common pairs span both.
    int y = row * cell * 4;
    int h = cell * 3;
    if (!e.contains("ref_pos")) {
      h = cell * 2;
    } else if (!e.contains("pos")) {
      y += cell;
      h = cell * 2;
    }
    std::string tip = key_of(symbols, e.at("sym").get<std::uint32_t>()) + " (" + label + ")";
    if (e.contains("p")) tip += " p=" + fixed(e.at("p").get<double>(), 4);
    os << "<rect x=\"" << col * cell << "\" y=\"" << y << "\" width=\"" << cell - 1 << "\" height=\"" << h
       << "\" fill=\"" << label_color(label) << "\"><title>" << html_escape(tip) << "</title></rect>\n";
  }
  os << "</svg>\n";

  os << "<table>\n<tr><th>#</th><th>faulty pos</th><th>reference pos</th><th>event</th><th>label</th><th>p</th></tr>\n";
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    const auto label = e.at("label").get<std::string>();
    if (label == "common") continue;
    os << "<tr><td>" << i << "</td><td>" << (e.contains("pos") ? std::to_string(e.at("pos").get<std::size_t>()) : "")
       << "</td><td>" << (e.contains("ref_pos") ? std::to_string(e.at("ref_pos").get<std::size_t>()) : "")
       << "</td><td>" << html_escape(key_of(symbols, e.at("sym").get<std::uint32_t>())) << "</td><td style=\"color:"
       << label_color(label) << "\">" << label << "</td><td>" << (e.contains("p") ? fixed(e.at("p").get<double>(), 4) : "")
       << "</td></tr>\n";
  }
  os << "</table>\n";
  page_tail(os, generated_at);
  return os.str();
}

}  // namespace tracefail
