#pragma once

// Metrics. Each run yields one EpisodeResult per episode (stored as JSON
// lines); aggregation groups them into report cells and weights outcomes by
// how much longer the agent's trajectory was than the expert demonstration.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace affordsim::eval {

using Json = nlohmann::json;

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EpisodeResult {
  std::string episode_id;
  bool success = false;
  int gc_satisfied = 0;
  int gc_total = 1;
  int agent_steps = 0;   // simulator step count at episode end
  int expert_steps = 1;  // demonstration step count, always >= 1
  std::string policy;    // vanilla | adapt
  std::string reasoner;  // none | oracle | noisy | external
  std::string abort = "none";  // none | budget | resolution_loop | timeout | malformed
  // grouping keys copied from the episode so results files stand alone
  std::string scenes;      // seen | unseen
  std::string setting;     // static | dynamic
  std::string difficulty;  // basic | advanced
  std::string task;

  bool operator==(const EpisodeResult&) const = default;
  Json to_json() const;
  static EpisodeResult from_json(const Json& j);
};

struct Metrics {
  double sr = 0.0;
  double gc = 0.0;
  double plw_sr = 0.0;
  double plw_gc = 0.0;
};

// SR is the success bit, GC the satisfied fraction of goal conditions, and
// the PLW variants scale by expert_steps / max(expert_steps, agent_steps):
// full credit at or below the demonstration length, discounted beyond it.
Metrics episode_metrics(const EpisodeResult& r);

struct ReportCell {
  std::string policy;
  std::string reasoner;
  std::string scenes;      // seen | unseen | all
  std::string setting;     // static | dynamic | all
  std::string difficulty;  // basic | advanced | all
  int n = 0;
  // cell means as percentages rounded to two decimals; empty cells (n == 0)
  // leave them unset
  std::optional<double> gc;
  std::optional<double> plw_gc;
  std::optional<double> sr;
  std::optional<double> plw_sr;

  bool operator==(const ReportCell&) const = default;
};

struct SplitReport {
  std::vector<ReportCell> cells;
  bool operator==(const SplitReport&) const = default;
};

// One cell per (policy, reasoner) pair present in the results, crossed with
// every scenes/setting/difficulty combination including the "all" margins.
// Deterministic order; permutation-invariant in the input.
SplitReport aggregate(const std::vector<EpisodeResult>& results);

std::string to_json_text(const SplitReport& report);
SplitReport report_from_json(const std::string& text);
std::string to_csv(const SplitReport& report);
std::string to_markdown(const SplitReport& report);

// JSON-lines results files.
void write_results(const std::filesystem::path& path,
                   const std::vector<EpisodeResult>& results);
std::vector<EpisodeResult> read_results(const std::filesystem::path& path);

}  // namespace affordsim::eval
