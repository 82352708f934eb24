#include <doctest.h>
#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "affordsim/dataset.hpp"
#include "affordsim/instructions.hpp"

using namespace affordsim;
using namespace affordsim::genbench;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("affordsim_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

GenConfig small_config() {
  GenConfig cfg;
  cfg.seed = 2024;
  cfg.pairs = 12;
  cfg.scenes = 6;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void replay_expert(const world::Scene& scene, const EpisodeSpec& spec,
                   const std::vector<sim::Action>& actions, int expected_steps) {
  auto state = sim::reset(scene, spec);
  for (const auto& a : actions) {
    CAPTURE(a.str());
    REQUIRE(sim::step(state, a).ok);
  }
  CHECK(state.step_count == expected_steps);
  CHECK(sim::score_goal(state, spec).success);
}

}  // namespace

TEST_SUITE("genbench") {

TEST_CASE("surface forms") {
  CHECK(surface_name("CounterTop") == "countertop");
  CHECK(surface_name("SoapBar") == "soap bar");
  CHECK(surface_name("HandTowel") == "hand towel");
  CHECK(surface_name("Mug") == "mug");
  CHECK(surface_name("SinkBasin") == "sink basin");
  CHECK(with_article("egg") == "an egg");
  CHECK(with_article("mug") == "a mug");
  CHECK(with_article("apple") == "an apple");
  CHECK(pluralize("mug") == "mugs");
  CHECK(pluralize("potato") == "potatoes");
  CHECK(pluralize("dish") == "dishes");
}

TEST_CASE("instruction templates") {
  TaskSpec heat{TaskType::HeatAndPlace, "Egg", "CounterTop", ""};
  CHECK(instruction_text(heat, 0) ==
        "Microwave an egg and place it on the countertop.");

  TaskSpec pick{TaskType::PickAndPlace, "Apple", "Cabinet", ""};
  CHECK(instruction_text(pick, 0) == "Put an apple in the cabinet.");

  for (int t = 0; t < kTaskTypeCount; ++t) {
    auto type = static_cast<TaskType>(t);
    CHECK(instruction_variant_count(type) >= 6);
    TaskSpec task{type, "Mug", "Shelf", "Pot"};
    std::set<std::string> texts;
    for (int v = 0; v < instruction_variant_count(type); ++v) {
      std::string s = instruction_text(task, v);
      CHECK_FALSE(s.empty());
      CHECK(s.find('{') == std::string::npos);  // all placeholders resolved
      CHECK(s.back() == '.');
      texts.insert(s);
    }
    CHECK(static_cast<int>(texts.size()) == instruction_variant_count(type));
    CHECK_FALSE(step_outline(task).empty());
  }
}

TEST_CASE("annotations are deterministic and varied") {
  TaskSpec task{TaskType::CleanAndPlace, "Mug", "Cabinet", ""};
  Rng a(rng_key(7, "ann"));
  Rng b(rng_key(7, "ann"));
  auto first = make_annotations(task, a);
  auto second = make_annotations(task, b);
  CHECK(first == second);
  REQUIRE(first.size() == 3);
  CHECK(first[0].goal_text != first[1].goal_text);
  CHECK(first[0].step_texts == first[1].step_texts);
}

TEST_CASE("sampled tasks are hostable") {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    for (auto room : {world::RoomType::Kitchen, world::RoomType::Bathroom}) {
      auto scene = world::build_scene(seed, room);
      Rng rng(rng_key(seed, "sample"));
      for (int i = 0; i < 20; ++i) {
        auto task = sample_task(scene, rng);
        CHECK_FALSE(scene.objects_of_class(task.target_class).empty());
        CHECK_FALSE(scene.objects_of_class(task.receptacle_class).empty());
        if (task.type == TaskType::PickTwoAndPlace) {
          CHECK(scene.objects_of_class(task.target_class).size() >= 2);
        }
        if (task.type == TaskType::StackAndPlace) {
          CHECK(scene.objects_of_class(task.mrecep_class).size() == 1);
          CHECK(world::class_info(task.mrecep_class).movable_receptacle);
        }
        if (task.type == TaskType::HeatAndPlace ||
            task.type == TaskType::CoolAndPlace) {
          CHECK(room == world::RoomType::Kitchen);
        }
      }
    }
  }
}

TEST_CASE("generated pairs satisfy the pairing invariants") {
  auto cfg = small_config();
  auto data = build_dataset(cfg);
  REQUIRE(static_cast<int>(data.pairs.size()) == cfg.pairs);

  for (const auto& pair : data.pairs) {
    const auto& scene = data.scenes.at(pair.stat.scene_id);
    CHECK(pair.stat.is_static());
    CHECK_FALSE(pair.dyn.is_static());
    CHECK(pair.stat.pair_id == pair.dyn.pair_id);
    CHECK(pair.stat.goal == pair.dyn.goal);
    CHECK(pair.stat.annotations == pair.dyn.annotations);
    CHECK(pair.stat.task == pair.dyn.task);
    CHECK(pair.stat.difficulty() == Difficulty::Basic);

    // dynamic twins are not initially solved, static goals not satisfied either
    CHECK_FALSE(sim::score_goal(sim::reset(scene, pair.stat), pair.stat).success);
    CHECK_FALSE(sim::score_goal(sim::reset(scene, pair.dyn), pair.dyn).success);

    // injections hit objects the static expert actually uses
    std::set<std::string> used;
    for (const auto& a : pair.expert_static.actions) {
      if (!a.target.empty()) used.insert(a.target);
    }
    for (const auto& inj : pair.dyn.injections) {
      CHECK(used.count(inj.object_id) == 1);
      const auto& cls = scene.object(inj.object_id).cls();
      auto cats = cls.applicable_categories();
      CHECK(std::find(cats.begin(), cats.end(), inj.category) != cats.end());
      if (inj.category == world::AffordanceCategory::Occupied) {
        CHECK(inj.busy_duration >= cfg.min_busy);
        CHECK(inj.busy_duration <= cfg.max_busy);
      } else {
        CHECK(inj.busy_duration == 0);
      }
    }

    if (pair.dyn.difficulty() == Difficulty::Advanced) {
      REQUIRE(pair.dyn.injections.size() == 2);
      CHECK(advanced_eligible(pair.dyn.task));
      int occupied = 0, sticky_on_target = 0;
      for (const auto& inj : pair.dyn.injections) {
        if (inj.category == world::AffordanceCategory::Occupied) {
          ++occupied;
          const auto& cls = scene.object(inj.object_id).cls();
          CHECK((pair.dyn.task.type == TaskType::HeatAndPlace ? cls.heats
                                                               : cls.cools));
        } else if (scene.object(inj.object_id).class_name ==
                   pair.dyn.task.target_class) {
          ++sticky_on_target;
        }
      }
      CHECK(occupied == 1);
      CHECK(sticky_on_target == 1);
    } else {
      CHECK(pair.dyn.injections.size() == 1);
    }

    // both experts replay successfully in their own worlds
    replay_expert(scene, pair.stat, pair.expert_static.actions,
                  pair.expert_static.total_cost);
    replay_expert(scene, pair.dyn, pair.expert_dynamic.actions,
                  pair.expert_dynamic.total_cost);
  }
}

TEST_CASE("generation is deterministic") {
  auto a = build_dataset(small_config());
  auto b = build_dataset(small_config());
  REQUIRE(a.pairs.size() == b.pairs.size());
  for (std::size_t i = 0; i < a.pairs.size(); ++i) {
    CHECK(episode_to_json(a.pairs[i].stat) == episode_to_json(b.pairs[i].stat));
    CHECK(episode_to_json(a.pairs[i].dyn) == episode_to_json(b.pairs[i].dyn));
    CHECK(a.pairs[i].expert_dynamic.actions == b.pairs[i].expert_dynamic.actions);
  }
  GenConfig other = small_config();
  other.seed = 2025;
  auto c = build_dataset(other);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.pairs.size(); ++i) {
    if (!(episode_to_json(a.pairs[i].dyn) == episode_to_json(c.pairs[i].dyn))) {
      any_diff = true;
    }
  }
  CHECK(any_diff);
}

TEST_CASE("dataset writes, loads, and twin files differ only in injections") {
  TempDir dir;
  auto data = build_dataset(small_config());
  write_dataset(dir.path, data);

  auto loaded = load_dataset(dir.path);
  CHECK(loaded.manifest.pairs == static_cast<int>(data.pairs.size()));
  CHECK(loaded.manifest.episodes == 2 * loaded.manifest.pairs);
  CHECK(loaded.manifest.static_fraction == doctest::Approx(0.5));
  CHECK(static_cast<int>(loaded.episodes.size()) == loaded.manifest.episodes);

  // seen and unseen scene sets never overlap
  std::set<std::string> seen(loaded.manifest.seen_scenes.begin(),
                             loaded.manifest.seen_scenes.end());
  for (const auto& id : loaded.manifest.unseen_scenes) {
    CHECK(seen.count(id) == 0);
  }

  // counts in the manifest match the episodes on disk
  std::map<std::string, int> setting, difficulty;
  for (const auto& e : loaded.episodes) {
    setting[e.is_static() ? "static" : "dynamic"]++;
    difficulty[to_string(e.difficulty())]++;
  }
  CHECK(setting == loaded.manifest.by_setting);
  CHECK(difficulty == loaded.manifest.by_difficulty);

  for (const auto& pair : data.pairs) {
    // round trip through disk preserves the episode byte for byte
    const auto* stat = loaded.find_episode(pair.stat.id());
    const auto* dyn = loaded.find_episode(pair.dyn.id());
    REQUIRE(stat != nullptr);
    REQUIRE(dyn != nullptr);
    CHECK(*stat == pair.stat);
    CHECK(*dyn == pair.dyn);

    // twin files: different bytes, but identical once injections are removed
    auto stat_file = slurp(dir.path / "episodes" / (pair.stat.id() + ".json"));
    auto dyn_file = slurp(dir.path / "episodes" / (pair.dyn.id() + ".json"));
    CHECK(stat_file != dyn_file);
    auto js = Json::parse(stat_file);
    auto jd = Json::parse(dyn_file);
    CHECK(js.at("injections").empty());
    CHECK_FALSE(jd.at("injections").empty());
    js.erase("injections");
    jd.erase("injections");
    CHECK(js.dump() == jd.dump());
    // nothing derived leaks into the file
    for (const char* absent : {"id", "setting", "difficulty", "static"}) {
      CHECK_FALSE(js.contains(absent));
    }

    // expert records survive the round trip
    const auto& rec = loaded.experts.at(pair.dyn.id());
    CHECK(rec.expert.actions == pair.expert_dynamic.actions);
    CHECK(rec.expert.steps == pair.expert_dynamic.total_cost);
    CHECK(rec.static_expert.actions == pair.expert_static.actions);
    const auto& srec = loaded.experts.at(pair.stat.id());
    CHECK(srec.expert.actions == pair.expert_static.actions);
    CHECK(srec.static_expert.actions == pair.expert_static.actions);
  }

  // loaded experts still replay
  for (const auto& e : loaded.episodes) {
    const auto& rec = loaded.experts.at(e.id());
    replay_expert(loaded.scene_of(e), e, rec.expert.actions, rec.expert.steps);
  }

  CHECK_THROWS_AS(load_dataset(dir.path / "nope"), DatasetError);
}

}
