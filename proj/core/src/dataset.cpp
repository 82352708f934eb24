#include "affordsim/dataset.hpp"

#include <algorithm>
#include <fstream>

namespace affordsim::genbench {

namespace fs = std::filesystem;

Json task_to_json(const TaskSpec& t) {
  Json j;
  j["type"] = to_string(t.type);
  j["target"] = t.target_class;
  j["receptacle"] = t.receptacle_class;
  j["mrecep"] = t.mrecep_class.empty() ? Json(nullptr) : Json(t.mrecep_class);
  return j;
}

TaskSpec task_from_json(const Json& j) {
  TaskSpec t;
  t.type = task_type_from_string(j.at("type").get<std::string>());
  t.target_class = j.at("target").get<std::string>();
  t.receptacle_class = j.at("receptacle").get<std::string>();
  if (j.contains("mrecep") && !j.at("mrecep").is_null()) {
    t.mrecep_class = j.at("mrecep").get<std::string>();
  }
  return t;
}

Json episode_to_json(const EpisodeSpec& e) {
  Json j;
  j["pair_id"] = e.pair_id;
  j["scene"] = e.scene_id;
  j["task"] = task_to_json(e.task);
  Json inj = Json::array();
  for (const auto& i : e.injections) {
    inj.push_back(Json{{"object", i.object_id},
                       {"category", world::to_string(i.category)},
                       {"busy", i.busy_duration}});
  }
  j["injections"] = std::move(inj);
  j["goal"] = e.goal;
  Json ann = Json::array();
  for (const auto& a : e.annotations) {
    ann.push_back(Json{{"goal_text", a.goal_text}, {"step_texts", a.step_texts}});
  }
  j["annotations"] = std::move(ann);
  j["seen"] = e.seen_scene;
  j["split"] = e.split;
  return j;
}

EpisodeSpec episode_from_json(const Json& j) {
  EpisodeSpec e;
  e.pair_id = j.at("pair_id").get<std::string>();
  e.scene_id = j.at("scene").get<std::string>();
  e.task = task_from_json(j.at("task"));
  for (const auto& i : j.at("injections")) {
    Injection inj;
    inj.object_id = i.at("object").get<std::string>();
    inj.category = world::affordance_from_string(i.at("category").get<std::string>());
    inj.busy_duration = i.at("busy").get<int>();
    e.injections.push_back(std::move(inj));
  }
  e.goal = j.at("goal").get<std::string>();
  for (const auto& a : j.at("annotations")) {
    Annotation ann;
    ann.goal_text = a.at("goal_text").get<std::string>();
    ann.step_texts = a.at("step_texts").get<std::vector<std::string>>();
    e.annotations.push_back(std::move(ann));
  }
  e.seen_scene = j.at("seen").get<bool>();
  e.split = j.at("split").get<std::string>();
  return e;
}

namespace {

Json expert_plan_to_json(const ExpertPlan& p) {
  Json actions = Json::array();
  for (const auto& a : p.actions) actions.push_back(a.to_json());
  return Json{{"actions", std::move(actions)}, {"steps", p.steps}};
}

ExpertPlan expert_plan_from_json(const Json& j) {
  ExpertPlan p;
  for (const auto& a : j.at("actions")) {
    p.actions.push_back(sim::Action::from_json(a));
  }
  p.steps = j.at("steps").get<int>();
  return p;
}

void write_json(const fs::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw DatasetError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw DatasetError("malformed json in " + path.string() + ": " + e.what());
  }
}

std::map<std::string, int> read_counts(const Json& j) {
  std::map<std::string, int> out;
  for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = it.value().get<int>();
  return out;
}

}  // namespace

Json expert_record_to_json(const ExpertRecord& r) {
  return Json{{"expert", expert_plan_to_json(r.expert)},
              {"static_expert", expert_plan_to_json(r.static_expert)}};
}

ExpertRecord expert_record_from_json(const Json& j) {
  ExpertRecord r;
  r.expert = expert_plan_from_json(j.at("expert"));
  r.static_expert = expert_plan_from_json(j.at("static_expert"));
  return r;
}

Json manifest_to_json(const Manifest& m) {
  Json j;
  j["name"] = m.name;
  j["version"] = m.version;
  j["seed"] = m.seed;
  j["pairs"] = m.pairs;
  j["episodes"] = m.episodes;
  j["static_fraction"] = m.static_fraction;
  j["by_task"] = m.by_task;
  j["by_setting"] = m.by_setting;
  j["by_difficulty"] = m.by_difficulty;
  j["by_split"] = m.by_split;
  j["seen_scenes"] = m.seen_scenes;
  j["unseen_scenes"] = m.unseen_scenes;
  return j;
}

Manifest manifest_from_json(const Json& j) {
  Manifest m;
  m.name = j.at("name").get<std::string>();
  m.version = j.at("version").get<int>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.pairs = j.at("pairs").get<int>();
  m.episodes = j.at("episodes").get<int>();
  m.static_fraction = j.at("static_fraction").get<double>();
  m.by_task = read_counts(j.at("by_task"));
  m.by_setting = read_counts(j.at("by_setting"));
  m.by_difficulty = read_counts(j.at("by_difficulty"));
  m.by_split = read_counts(j.at("by_split"));
  m.seen_scenes = j.at("seen_scenes").get<std::vector<std::string>>();
  m.unseen_scenes = j.at("unseen_scenes").get<std::vector<std::string>>();
  return m;
}

void write_dataset(const fs::path& root, const GeneratedDataset& data) {
  fs::create_directories(root / "scenes");
  fs::create_directories(root / "episodes");
  fs::create_directories(root / "experts");

  Manifest m;
  m.seed = data.config.seed;
  m.pairs = static_cast<int>(data.pairs.size());
  m.episodes = 2 * m.pairs;

  std::set<std::string> used_scenes, seen, unseen;
  for (const auto& pair : data.pairs) {
    used_scenes.insert(pair.stat.scene_id);
    (pair.stat.seen_scene ? seen : unseen).insert(pair.stat.scene_id);
    m.by_task[to_string(pair.stat.task.type)] += 2;
    for (const auto* e : {&pair.stat, &pair.dyn}) {
      m.by_setting[e->is_static() ? "static" : "dynamic"] += 1;
      m.by_difficulty[to_string(e->difficulty())] += 1;
      m.by_split[e->split] += 1;
    }
  }
  m.static_fraction =
      m.episodes == 0 ? 0.0 : static_cast<double>(m.by_setting["static"]) / m.episodes;
  m.seen_scenes.assign(seen.begin(), seen.end());
  m.unseen_scenes.assign(unseen.begin(), unseen.end());

  for (const auto& [id, scene] : data.scenes) {
    if (!used_scenes.count(id)) continue;  // only ship scenes that host episodes
    write_json(root / "scenes" / (id + ".json"), world::scene_to_json(scene));
  }

  auto plan_of = [](const compile::Demonstration& demo) {
    ExpertPlan p;
    p.actions = demo.actions;
    p.steps = demo.total_cost;
    return p;
  };
  for (const auto& pair : data.pairs) {
    write_json(root / "episodes" / (pair.stat.id() + ".json"),
               episode_to_json(pair.stat));
    write_json(root / "episodes" / (pair.dyn.id() + ".json"),
               episode_to_json(pair.dyn));

    ExpertRecord stat_rec{plan_of(pair.expert_static), plan_of(pair.expert_static)};
    ExpertRecord dyn_rec{plan_of(pair.expert_dynamic), plan_of(pair.expert_static)};
    write_json(root / "experts" / (pair.stat.id() + ".json"),
               expert_record_to_json(stat_rec));
    write_json(root / "experts" / (pair.dyn.id() + ".json"),
               expert_record_to_json(dyn_rec));
  }

  write_json(root / "manifest.json", manifest_to_json(m));
}

const world::Scene& LoadedDataset::scene_of(const EpisodeSpec& e) const {
  auto it = scenes.find(e.scene_id);
  if (it == scenes.end()) {
    throw DatasetError("episode " + e.id() + " references missing scene " +
                       e.scene_id);
  }
  return it->second;
}

const EpisodeSpec* LoadedDataset::find_episode(const std::string& id) const {
  for (const auto& e : episodes) {
    if (e.id() == id) return &e;
  }
  return nullptr;
}

LoadedDataset load_dataset(const fs::path& root) {
  LoadedDataset out;
  out.manifest = manifest_from_json(read_json(root / "manifest.json"));

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(root / "scenes")) {
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    auto scene = world::scene_from_json(read_json(f));
    out.scenes.emplace(scene.id, std::move(scene));
  }

  files.clear();
  for (const auto& entry : fs::directory_iterator(root / "episodes")) {
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    auto episode = episode_from_json(read_json(f));
    if (episode.id() != f.stem().string()) {
      throw DatasetError("episode file " + f.string() +
                         " disagrees with its derived id " + episode.id());
    }
    out.episodes.push_back(std::move(episode));
  }

  for (const auto& e : out.episodes) {
    fs::path f = root / "experts" / (e.id() + ".json");
    if (fs::exists(f)) {
      out.experts.emplace(e.id(), expert_record_from_json(read_json(f)));
    }
  }
  return out;
}

}  // namespace affordsim::genbench
