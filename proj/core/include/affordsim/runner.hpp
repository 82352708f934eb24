#pragma once

// Episode execution: build the policy/reasoner stack, drive the simulator
// until the policy finishes or the episode aborts, and record both a result
// row and a canonical line-per-step trajectory so runs can be compared byte
// for byte. Dataset runs fan episodes out over a worker pool and merge in
// episode order, so the parallelism level never changes any output.

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "affordsim/agent.hpp"
#include "affordsim/dataset.hpp"
#include "affordsim/eval.hpp"
#include "affordsim/protocol.hpp"

namespace affordsim::runner {

struct RunConfig {
  std::string policy = "adapt";     // vanilla | adapt
  std::string reasoner = "oracle";  // oracle | noisy | external
  agent::NoisyConfig noisy;         // reasoner == noisy
  std::string endpoint;             // reasoner == external
  int timeout_ms = protocol::kDefaultTimeoutMs;
  int max_steps = 400;
  int parallel = 1;
  agent::PolicyConfig policy_cfg;
};

// Reasoner instance for the config; null for the vanilla policy. Each worker
// gets its own (an external reasoner owns a connection).
std::unique_ptr<agent::Reasoner> make_reasoner(const RunConfig& config);

struct EpisodeRun {
  eval::EpisodeResult result;
  std::vector<std::string> trajectory;  // one JSON line per executed step
};

EpisodeRun run_episode(const world::Scene& scene, const genbench::EpisodeSpec& episode,
                       const genbench::ExpertRecord& expert, const RunConfig& config,
                       agent::Reasoner* reasoner);

struct RunOutput {
  std::vector<eval::EpisodeResult> results;   // in episode order
  std::vector<std::string> trajectory_lines;  // grouped by episode, in order
};

using ProgressFn = std::function<void(const eval::EpisodeResult&)>;

RunOutput run_dataset(const genbench::LoadedDataset& data, const RunConfig& config,
                      const ProgressFn& progress = {});

// results.jsonl and trajectories.jsonl under out_dir (created if needed).
void write_run_output(const std::filesystem::path& out_dir, const RunOutput& out);

}  // namespace affordsim::runner
