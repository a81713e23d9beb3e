#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tracefail/clustering.hpp"
#include "tracefail/detector.hpp"
#include "tracefail/error.hpp"

namespace tracefail::cli {

namespace fs = std::filesystem;

/// Bad invocation: unknown flags, malformed values, missing inputs. Exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitAnalysis = 1;
inline constexpr int kExitUsage = 2;

struct GenerateOptions {
  fs::path spec;
  std::optional<fs::path> out;  // default: ./<spec stem>
  std::optional<std::uint64_t> seed;
};

struct AnalyzeOptions {
  fs::path campaign;
  std::optional<fs::path> out;  // default: <campaign>/reports
  std::size_t max_order = 5;
  Thresholds thresholds;
  std::size_t workers = 1;
  bool deterministic = false;
};

struct ClusterOptions {
  fs::path reports;
  std::size_t k_min = 2;
  std::size_t k_max = 20;
  Representation representation = Representation::Vmm;
  std::uint64_t seed = 0;
  std::optional<fs::path> ground_truth;  // default: <reports>/ground_truth.json when present
  bool deterministic = false;
};

struct MetricsOptions {
  fs::path reports;
  fs::path ground_truth;
};

/// Returns the campaign directory.
fs::path cmd_generate(const GenerateOptions& options, std::ostream& log);
/// Returns the reports directory.
fs::path cmd_analyze(const AnalyzeOptions& options, std::ostream& log);
void cmd_cluster(const ClusterOptions& options, std::ostream& log);
void cmd_metrics(const MetricsOptions& options, std::ostream& out);

/// "A..B" or a single "K".
std::pair<std::size_t, std::size_t> parse_k_range(std::string_view text);

struct LoadedReports {
  std::vector<AnomalyReport> reports;
  SymbolTable symbols;
};
LoadedReports load_reports(const fs::path& reports_dir);

/// Full command line, including parsing. Never throws; returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tracefail::cli
