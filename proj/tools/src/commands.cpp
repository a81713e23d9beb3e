#include "tracefail/commands.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tracefail/metrics.hpp"
#include "tracefail/report.hpp"
#include "tracefail/simulator.hpp"
#include "tracefail/toml_lite.hpp"

namespace tracefail::cli {

using nlohmann::json;

namespace {

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream os(file, std::ios::binary);
  os << text;
  if (!os) throw Error("cannot write " + file.string());
}

void write_json(const fs::path& file, const json& j) { write_text(file, j.dump(2) + "\n"); }

json read_json(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ParseError("cannot open " + file.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(file.string() + ": " + e.what());
  }
}

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

fs::path cmd_generate(const GenerateOptions& o, std::ostream& log) {
  if (!fs::is_regular_file(o.spec)) throw UsageError("spec not found: " + o.spec.string());
  json spec = load_toml(o.spec);
  if (o.seed) spec["seed"] = *o.seed;
  const auto plan = plan_from_json(spec);
  const fs::path out = o.out.value_or(fs::path(o.spec.stem()));
  if (fs::exists(out / "faulty") || fs::exists(out / "faultfree")) {
    // Stale traces would mix into the new campaign.
    for (const char* sub : {"faultfree", "faulty", "idle"}) fs::remove_all(out / sub);
  }
  make_dirs(out);
  const auto truth = gen_campaign(plan, out);
  log << "generated " << plan.n_faultfree << " fault-free and " << truth.experiments.size() << " faulty traces ("
      << plan.catalog.size() << " modes) in " << out.string() << '\n';
  return out;
}

fs::path cmd_analyze(const AnalyzeOptions& o, std::ostream& log) {
  if (!fs::is_directory(o.campaign)) throw UsageError("campaign directory not found: " + o.campaign.string());
  if (o.max_order < 1 || o.max_order > VmmModel::kMaxSupportedOrder) {
    throw UsageError("--d must be in 1.." + std::to_string(VmmModel::kMaxSupportedOrder));
  }
  try {
    o.thresholds.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  const auto started = std::chrono::steady_clock::now();

  const auto faultfree = ingest_traces(o.campaign / "faultfree", TraceKind::FaultFree);
  if (faultfree.size() < 2) {
    throw Error("need at least 2 fault-free traces, found " + std::to_string(faultfree.size()));
  }
  const auto faulty = ingest_traces(o.campaign / "faulty", TraceKind::Faulty);
  std::vector<Trace> idle;
  if (fs::is_directory(o.campaign / "idle")) idle = ingest_traces(o.campaign / "idle", TraceKind::Idle);

  const auto encoded = encode_campaign(faultfree, faulty, idle);
  const auto& table = encoded.table;
  const auto& pool = encoded.pool;

  const auto reports = analyze_campaign(encoded.experiments, pool, o.thresholds, o.max_order, table.size(), o.workers);

  const fs::path out = o.out.value_or(o.campaign / "reports");
  make_dirs(out / "experiments");
  for (const auto& old : fs::directory_iterator(out / "experiments")) fs::remove(old.path());
  for (const auto& r : reports) write_json(out / "experiments" / (r.experiment_id + ".json"), r);
  write_json(out / "symbols.json", table);

  std::optional<GroundTruth> truth;
  if (fs::is_regular_file(o.campaign / "ground_truth.json")) {
    truth = load_ground_truth((o.campaign / "ground_truth.json").string());
    fs::copy_file(o.campaign / "ground_truth.json", out / "ground_truth.json", fs::copy_options::overwrite_existing);
  }
  std::optional<double> elapsed;
  if (!o.deterministic) {
    elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  }
  const AnalysisSettings settings{o.thresholds, o.max_order, o.workers};
  const auto summary = summary_json(reports, table, settings, truth ? &*truth : nullptr, elapsed);
  write_json(out / "summary.json", summary);

  log << "analyzed " << reports.size() << " experiments against " << pool.size() << " fault-free traces; reports in "
      << out.string() << '\n';
  if (summary.at("error_count").get<std::size_t>() > 0) {
    log << summary.at("error_count").get<std::size_t>() << " experiments failed; see their reports\n";
  }
  if (!summary.at("metrics").is_null()) {
    for (const auto& [name, m] : summary.at("metrics").items()) {
      log << name << ": hit_rate " << m.at("hit_rate").dump() << ", false_alarm_rate " << m.at("false_alarm_rate").dump()
          << '\n';
    }
  }
  return out;
}

LoadedReports load_reports(const fs::path& dir) {
  if (!fs::is_directory(dir / "experiments")) throw UsageError("no reports found in " + dir.string());
  LoadedReports loaded;
  loaded.symbols = read_json(dir / "symbols.json").get<SymbolTable>();
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir / "experiments")) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    try {
      loaded.reports.push_back(read_json(f).get<AnomalyReport>());
    } catch (const ParseError& e) {
      throw ParseError(f.string() + ": " + e.what());
    }
  }
  return loaded;
}

void cmd_cluster(const ClusterOptions& o, std::ostream& log) {
  if (o.k_min < 2 || o.k_max < o.k_min) throw UsageError("--k-range must satisfy 2 <= A <= B");
  auto loaded = load_reports(o.reports);
  std::erase_if(loaded.reports, [&](const AnomalyReport& r) {
    if (r.error) log << "skipping " << r.experiment_id << ": " << *r.error << '\n';
    return r.error.has_value();
  });
  if (loaded.reports.size() < 2) throw Error("need at least 2 analyzed experiments to cluster");

  const auto vectors = build_vectors(loaded.reports, loaded.symbols.size(), o.representation);
  const auto selection = select_k(vectors, o.k_min, o.k_max, o.seed);

  std::optional<std::vector<std::string>> labels;
  const fs::path gt = o.ground_truth.value_or(o.reports / "ground_truth.json");
  if (o.ground_truth && !fs::is_regular_file(gt)) throw UsageError("ground truth not found: " + gt.string());
  if (fs::is_regular_file(gt)) {
    const auto truth = load_ground_truth(gt.string());
    labels.emplace();
    for (const auto& r : loaded.reports) {
      const auto* e = truth.find(r.experiment_id);
      if (e == nullptr) throw Error("no ground truth for experiment " + r.experiment_id);
      labels->push_back(e->mode_label);
    }
  }

  const ClusterSettings settings{o.representation, o.k_min, o.k_max, o.seed};
  const auto cluster = cluster_json(selection, vectors, loaded.symbols, settings, labels ? &*labels : nullptr);
  write_json(o.reports / "cluster.json", cluster);

  const std::optional<std::string> stamp = o.deterministic ? std::nullopt : std::optional(utc_now());
  json summary;
  if (fs::is_regular_file(o.reports / "summary.json")) summary = read_json(o.reports / "summary.json");
  const json symbols = loaded.symbols;
  make_dirs(o.reports / "html" / "exp");
  write_text(o.reports / "html" / "index.html", render_index_html(cluster, summary, stamp));
  for (const auto& r : loaded.reports) {
    write_text(o.reports / "html" / "exp" / (r.experiment_id + ".html"), render_timeline_html(json(r), symbols, stamp));
  }

  log << "K* = " << selection.best_k << " (silhouette " << cluster.at("silhouette").get<double>() << ")\n";
  if (!cluster.at("purity").is_null()) log << "purity = " << cluster.at("purity").get<double>() << '\n';
  log << "report: " << (o.reports / "html" / "index.html").string() << '\n';
}

void cmd_metrics(const MetricsOptions& o, std::ostream& out) {
  if (!fs::is_regular_file(o.ground_truth)) throw UsageError("ground truth not found: " + o.ground_truth.string());
  const auto loaded = load_reports(o.reports);
  const auto truth = load_ground_truth(o.ground_truth.string());
  const json j = {{"lcs", score_campaign(loaded.reports, truth, loaded.symbols, Approach::Lcs)},
                  {"lcs_vmm", score_campaign(loaded.reports, truth, loaded.symbols, Approach::LcsVmm)}};
  out << j.dump(2) << '\n';
}

std::pair<std::size_t, std::size_t> parse_k_range(std::string_view text) {
  auto number = [&](std::string_view part) {
    std::size_t v = 0;
    if (part.empty() || part.find_first_not_of("0123456789") != std::string_view::npos) {
      throw UsageError("--k-range expects A..B, got '" + std::string(text) + "'");
    }
    for (const char c : part) v = v * 10 + static_cast<std::size_t>(c - '0');
    return v;
  };
  const auto dots = text.find("..");
  if (dots == std::string_view::npos) {
    const auto k = number(text);
    return {k, k};
  }
  return {number(text.substr(0, dots)), number(text.substr(dots + 2))};
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Failure-mode discovery from fault-injection traces", "tracefail"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "tracefail 0.3.0");

  GenerateOptions gen;
  std::string gen_out;
  std::uint64_t gen_seed = 0;
  auto* generate = app.add_subcommand("generate", "Simulate a campaign from a spec file");
  generate->add_option("spec", gen.spec, "Campaign spec (TOML)")->required();
  auto* gen_out_opt = generate->add_option("--out,-o", gen_out, "Output directory (default: ./<spec name>)");
  auto* gen_seed_opt = generate->add_option("--seed", gen_seed, "Override the spec seed")->envname("TF_SEED");

  AnalyzeOptions an;
  std::string an_out;
  auto* analyze = app.add_subcommand("analyze", "Detect anomalies in every faulty trace of a campaign");
  analyze->add_option("campaign", an.campaign, "Campaign directory")->required();
  analyze->add_option("--d", an.max_order, "Maximum VMM order")->envname("TF_D")->capture_default_str();
  analyze->add_option("--eps-spurious", an.thresholds.eps_spurious, "Spurious threshold")
      ->envname("TF_EPS_SPURIOUS")
      ->capture_default_str();
  analyze->add_option("--eps-missing", an.thresholds.eps_missing, "Missing threshold")
      ->envname("TF_EPS_MISSING")
      ->capture_default_str();
  analyze->add_option("--workers", an.workers, "Worker threads")
      ->envname("TF_WORKERS")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  auto* an_out_opt = analyze->add_option("--out,-o", an_out, "Reports directory (default: <campaign>/reports)");
  analyze->add_flag("--deterministic", an.deterministic, "Omit wall-clock fields")->envname("TF_DETERMINISTIC");

  ClusterOptions cl;
  std::string k_range = "2..20";
  std::string representation = "vmm";
  std::string cl_truth;
  auto* cluster = app.add_subcommand("cluster", "Group analyzed experiments into failure modes");
  cluster->add_option("reports", cl.reports, "Reports directory written by analyze")->required();
  cluster->add_option("--k-range", k_range, "Candidate K values, A..B")->envname("TF_K_RANGE")->capture_default_str();
  cluster->add_option("--representation", representation, "vmm, lcs or seq")
      ->envname("TF_REPRESENTATION")
      ->capture_default_str();
  cluster->add_option("--seed", cl.seed, "K-Medoids seed")->envname("TF_SEED")->capture_default_str();
  auto* cl_truth_opt = cluster->add_option("--ground-truth", cl_truth, "Ground truth file for purity");
  cluster->add_flag("--deterministic", cl.deterministic, "Omit wall-clock fields")->envname("TF_DETERMINISTIC");

  MetricsOptions me;
  auto* metrics = app.add_subcommand("metrics", "Score reports against ground truth");
  metrics->add_option("reports", me.reports, "Reports directory")->required();
  metrics->add_option("ground_truth", me.ground_truth, "ground_truth.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (generate->parsed()) {
      if (*gen_out_opt) gen.out = gen_out;
      if (*gen_seed_opt) gen.seed = gen_seed;
      cmd_generate(gen, out);
    } else if (analyze->parsed()) {
      if (*an_out_opt) an.out = an_out;
      cmd_analyze(an, out);
    } else if (cluster->parsed()) {
      std::tie(cl.k_min, cl.k_max) = parse_k_range(k_range);
      try {
        cl.representation = parse_representation(representation);
      } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
      }
      if (*cl_truth_opt) cl.ground_truth = cl_truth;
      cmd_cluster(cl, out);
    } else if (metrics->parsed()) {
      cmd_metrics(me, out);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitAnalysis;
  }
  return kExitOk;
}

}  // namespace tracefail::cli
