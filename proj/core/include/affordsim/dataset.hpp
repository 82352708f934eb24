#pragma once

// On-disk dataset layout:
//
//   <root>/manifest.json
//   <root>/scenes/<scene_id>.json
//   <root>/episodes/<pair_id>_static.json
//   <root>/episodes/<pair_id>_dynamic.json
//   <root>/experts/<episode_id>.json
//
// Episode files for a pair differ only in their "injections" array; identity,
// setting and difficulty are all derived, never stored. Expert files carry the
// demonstration for the episode's own initial state plus the static twin's
// demonstration.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "affordsim/genbench.hpp"
#include "affordsim/sim.hpp"
#include "affordsim/task_types.hpp"
#include "affordsim/world.hpp"

namespace affordsim::genbench {

using Json = nlohmann::json;

struct DatasetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExpertPlan {
  std::vector<sim::Action> actions;
  int steps = 0;  // plan cost, i.e. expected simulator step_count
};

struct ExpertRecord {
  ExpertPlan expert;         // for the episode's own initial state
  ExpertPlan static_expert;  // the injection-free twin's plan
};

struct Manifest {
  std::string name = "affordbench";
  int version = 1;
  std::uint64_t seed = 0;
  int pairs = 0;
  int episodes = 0;
  double static_fraction = 0.0;
  std::map<std::string, int> by_task;
  std::map<std::string, int> by_setting;     // static | dynamic
  std::map<std::string, int> by_difficulty;  // basic | advanced
  std::map<std::string, int> by_split;
  std::vector<std::string> seen_scenes;
  std::vector<std::string> unseen_scenes;
};

Json manifest_to_json(const Manifest& m);
Manifest manifest_from_json(const Json& j);

Json expert_record_to_json(const ExpertRecord& r);
ExpertRecord expert_record_from_json(const Json& j);

void write_dataset(const std::filesystem::path& root, const GeneratedDataset& data);

struct LoadedDataset {
  Manifest manifest;
  std::map<std::string, world::Scene> scenes;
  std::vector<EpisodeSpec> episodes;               // sorted by episode id
  std::map<std::string, ExpertRecord> experts;     // keyed by episode id

  const world::Scene& scene_of(const EpisodeSpec& e) const;
  const EpisodeSpec* find_episode(const std::string& id) const;
};

LoadedDataset load_dataset(const std::filesystem::path& root);

}  // namespace affordsim::genbench
