#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "affordsim/dataset.hpp"
#include "affordsim/eval.hpp"
#include "affordsim/runner.hpp"

using namespace affordsim;
using Json = nlohmann::json;
using eval::EpisodeResult;
using eval::EvalError;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("affordsim_eval_" + std::to_string(getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

EpisodeResult result_fixture() {
  EpisodeResult r;
  r.episode_id = "p000000_dynamic";
  r.success = true;
  r.gc_satisfied = 3;
  r.gc_total = 3;
  r.agent_steps = 40;
  r.expert_steps = 40;
  r.policy = "adapt";
  r.reasoner = "oracle";
  r.scenes = "seen";
  r.setting = "dynamic";
  r.difficulty = "basic";
  r.task = "PickAndPlace";
  return r;
}

const eval::ReportCell* find_cell(const eval::SplitReport& report,
                                  const std::string& policy,
                                  const std::string& scenes,
                                  const std::string& setting,
                                  const std::string& difficulty) {
  for (const auto& c : report.cells) {
    if (c.policy == policy && c.scenes == scenes && c.setting == setting &&
        c.difficulty == difficulty) {
      return &c;
    }
  }
  return nullptr;
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("episode metrics weight by expert length") {
  auto r = result_fixture();

  SUBCASE("matching the demonstration keeps full credit") {
    auto m = eval::episode_metrics(r);
    CHECK(m.sr == 1.0);
    CHECK(m.gc == 1.0);
    CHECK(m.plw_sr == 1.0);
    CHECK(m.plw_gc == 1.0);
  }
  SUBCASE("twice as long halves the weighted scores") {
    r.agent_steps = 80;
    auto m = eval::episode_metrics(r);
    CHECK(m.sr == 1.0);
    CHECK(m.plw_sr == doctest::Approx(0.5));
    CHECK(m.plw_gc == doctest::Approx(0.5));
  }
  SUBCASE("beating the demonstration earns no bonus") {
    r.agent_steps = 10;
    auto m = eval::episode_metrics(r);
    CHECK(m.plw_sr == 1.0);
    CHECK(m.plw_gc == 1.0);
  }
  SUBCASE("partial goal completion") {
    r.success = false;
    r.gc_satisfied = 1;
    r.agent_steps = 120;
    auto m = eval::episode_metrics(r);
    CHECK(m.sr == 0.0);
    CHECK(m.gc == doctest::Approx(1.0 / 3));
    CHECK(m.plw_sr == 0.0);
    CHECK(m.plw_gc == doctest::Approx(1.0 / 9));
  }
}

TEST_CASE("weighted metrics never exceed their plain versions") {
  std::mt19937_64 gen(7);
  for (int i = 0; i < 2000; ++i) {
    EpisodeResult r = result_fixture();
    r.gc_total = 1 + static_cast<int>(gen() % 5);
    r.success = (gen() % 2) == 0;
    r.gc_satisfied = r.success ? r.gc_total
                               : static_cast<int>(gen() % r.gc_total);
    r.agent_steps = static_cast<int>(gen() % 300);
    r.expert_steps = 1 + static_cast<int>(gen() % 150);
    auto m = eval::episode_metrics(r);
    REQUIRE(m.plw_sr <= m.sr);
    REQUIRE(m.plw_gc <= m.gc);
    REQUIRE(m.gc >= m.sr);
    bool full_weight = r.agent_steps <= r.expert_steps;
    REQUIRE((m.plw_sr == m.sr) == (full_weight || m.sr == 0.0));
    REQUIRE((m.plw_gc == m.gc) == (full_weight || m.gc == 0.0));
  }
}

TEST_CASE("result records round trip and validate") {
  auto r = result_fixture();
  auto j = r.to_json();
  CHECK(EpisodeResult::from_json(j) == r);

  SUBCASE("expert steps must be positive") {
    j["expert_steps"] = 0;
    CHECK_THROWS_AS(EpisodeResult::from_json(j), EvalError);
  }
  SUBCASE("goal needs at least one condition") {
    j["gc_total"] = 0;
    CHECK_THROWS_AS(EpisodeResult::from_json(j), EvalError);
  }
  SUBCASE("missing fields are rejected") {
    j.erase("policy");
    CHECK_THROWS_AS(EpisodeResult::from_json(j), EvalError);
  }
  SUBCASE("wrong types are rejected") {
    j["agent_steps"] = "many";
    CHECK_THROWS_AS(EpisodeResult::from_json(j), EvalError);
  }
  CHECK_THROWS_AS(EpisodeResult::from_json(Json::array()), EvalError);
}

TEST_CASE("aggregate fills the whole grid with margins") {
  std::vector<EpisodeResult> results;
  auto add = [&](bool success, const std::string& scenes,
                 const std::string& setting, const std::string& difficulty,
                 int agent, int expert) {
    auto r = result_fixture();
    r.episode_id = "p" + std::to_string(results.size());
    r.success = success;
    r.gc_satisfied = success ? r.gc_total : 0;
    r.scenes = scenes;
    r.setting = setting;
    r.difficulty = difficulty;
    r.agent_steps = agent;
    r.expert_steps = expert;
    results.push_back(r);
  };
  add(true, "seen", "static", "basic", 10, 10);
  add(false, "seen", "dynamic", "basic", 30, 10);
  add(true, "unseen", "dynamic", "advanced", 20, 10);
  add(true, "unseen", "static", "basic", 40, 10);

  auto report = eval::aggregate(results);
  // one policy/reasoner pair crossed with 3 x 3 x 3 axis values
  CHECK(report.cells.size() == 27);

  const auto* all = find_cell(report, "adapt", "all", "all", "all");
  REQUIRE(all);
  CHECK(all->n == 4);
  CHECK(all->sr == doctest::Approx(75.0));
  CHECK(all->gc == doctest::Approx(75.0));
  // weights: 1, 1/3 (failure scores zero anyway), 1/2, 1/4
  CHECK(all->plw_sr == doctest::Approx((1.0 + 0.5 + 0.25) / 4 * 100));

  const auto* seen = find_cell(report, "adapt", "seen", "all", "all");
  REQUIRE(seen);
  CHECK(seen->n == 2);
  CHECK(seen->sr == doctest::Approx(50.0));

  const auto* empty = find_cell(report, "adapt", "seen", "static", "advanced");
  REQUIRE(empty);
  CHECK(empty->n == 0);
  CHECK_FALSE(empty->sr.has_value());
  CHECK_FALSE(empty->gc.has_value());

  SUBCASE("input order never changes the report") {
    auto shuffled = results;
    std::reverse(shuffled.begin(), shuffled.end());
    CHECK(eval::aggregate(shuffled) == report);
  }
  SUBCASE("separate policies get separate grids") {
    auto more = results;
    for (auto r : results) {
      r.policy = "vanilla";
      r.reasoner = "none";
      more.push_back(r);
    }
    CHECK(eval::aggregate(more).cells.size() == 54);
  }
  CHECK_THROWS_AS(eval::aggregate({}), EvalError);
}

TEST_CASE("percentages are rounded to two decimals") {
  std::vector<EpisodeResult> results;
  for (int i = 0; i < 3; ++i) {
    auto r = result_fixture();
    r.episode_id = "p" + std::to_string(i);
    r.success = i == 0;
    r.gc_satisfied = r.success ? r.gc_total : 0;
    results.push_back(r);
  }
  auto report = eval::aggregate(results);
  const auto* all = find_cell(report, "adapt", "all", "all", "all");
  REQUIRE(all);
  CHECK(*all->sr == doctest::Approx(33.33).epsilon(1e-9));  // not 33.333...
}

TEST_CASE("report serializations agree") {
  std::vector<EpisodeResult> results{result_fixture()};
  auto fail = result_fixture();
  fail.episode_id = "p000001_dynamic";
  fail.success = false;
  fail.gc_satisfied = 0;
  fail.scenes = "unseen";
  results.push_back(fail);
  auto report = eval::aggregate(results);

  auto text = eval::to_json_text(report);
  CHECK(eval::report_from_json(text) == report);

  auto csv = eval::to_csv(report);
  std::istringstream csv_in(csv);
  std::string header;
  std::getline(csv_in, header);
  CHECK(header == "policy,reasoner,scenes,setting,difficulty,n,gc,plw_gc,sr,plw_sr");
  int rows = 0;
  std::string line;
  bool saw_empty = false;
  while (std::getline(csv_in, line)) {
    ++rows;
    if (line.find(",0,,,,") != std::string::npos) saw_empty = true;
  }
  CHECK(rows == static_cast<int>(report.cells.size()));
  CHECK(saw_empty);  // empty cells keep their commas, metrics stay blank

  auto md = eval::to_markdown(report);
  CHECK(md.find("| policy | reasoner | scenes | setting | difficulty | n | GC "
                "| PLW GC | SR | PLW SR |") != std::string::npos);
  CHECK(md.find("| - | - | - | - |") != std::string::npos);
  CHECK(md.find("adapt") != std::string::npos);
}

TEST_CASE("results files round trip") {
  TempDir tmp;
  std::vector<EpisodeResult> results;
  for (int i = 0; i < 5; ++i) {
    auto r = result_fixture();
    r.episode_id = "p00000" + std::to_string(i) + "_static";
    r.agent_steps = 10 + i;
    results.push_back(r);
  }
  auto file = tmp.path / "results.jsonl";
  eval::write_results(file, results);
  CHECK(eval::read_results(file) == results);

  std::ifstream in(file);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    ++lines;
    CHECK(Json::parse(line).is_object());
  }
  CHECK(lines == 5);

  CHECK_THROWS_AS(eval::read_results(tmp.path / "absent.jsonl"), EvalError);
  std::ofstream truncated(tmp.path / "bad.jsonl");
  truncated << "{\"episode_id\": \"x\"\n";
  truncated.close();
  CHECK_THROWS_AS(eval::read_results(tmp.path / "bad.jsonl"), EvalError);
}

TEST_CASE("runner aborts on budget and reports it") {
  genbench::GenConfig cfg;
  cfg.seed = 41;
  cfg.pairs = 2;
  cfg.scenes = 2;
  TempDir tmp;
  genbench::write_dataset(tmp.path, genbench::build_dataset(cfg));
  auto data = genbench::load_dataset(tmp.path);

  runner::RunConfig rc;
  rc.policy = "vanilla";
  rc.max_steps = 1;  // every demonstration costs at least two steps
  auto out = runner::run_dataset(data, rc);
  REQUIRE(out.results.size() == data.episodes.size());
  for (const auto& r : out.results) {
    CHECK(r.abort == "budget");
    CHECK_FALSE(r.success);
    CHECK(r.agent_steps >= 1);
    CHECK(r.reasoner == "none");
  }
}

TEST_CASE("parallel runs merge into identical output") {
  genbench::GenConfig cfg;
  cfg.seed = 42;
  cfg.pairs = 6;
  cfg.scenes = 3;
  TempDir tmp;
  genbench::write_dataset(tmp.path, genbench::build_dataset(cfg));
  auto data = genbench::load_dataset(tmp.path);

  runner::RunConfig rc;
  rc.policy = "adapt";
  rc.reasoner = "oracle";
  auto serial = runner::run_dataset(data, rc);
  rc.parallel = 4;
  auto fanned = runner::run_dataset(data, rc);
  CHECK(serial.results == fanned.results);
  CHECK(serial.trajectory_lines == fanned.trajectory_lines);

  // results land in episode order regardless of which worker ran them
  std::vector<std::string> ids;
  for (const auto& r : serial.results) ids.push_back(r.episode_id);
  CHECK(std::is_sorted(ids.begin(), ids.end()));

  TempDir out_dir;
  runner::write_run_output(out_dir.path / "run", serial);
  CHECK(eval::read_results(out_dir.path / "run" / "results.jsonl") ==
        serial.results);
  std::ifstream traj(out_dir.path / "run" / "trajectories.jsonl");
  std::string line;
  std::size_t lines = 0;
  while (std::getline(traj, line)) {
    CHECK(Json::parse(line).contains("action"));
    ++lines;
  }
  CHECK(lines == serial.trajectory_lines.size());
}

TEST_CASE("run results carry the grouping keys of their episode") {
  genbench::GenConfig cfg;
  cfg.seed = 43;
  cfg.pairs = 4;
  cfg.scenes = 4;
  cfg.unseen_fraction = 0.5;
  TempDir tmp;
  genbench::write_dataset(tmp.path, genbench::build_dataset(cfg));
  auto data = genbench::load_dataset(tmp.path);

  runner::RunConfig rc;
  rc.policy = "adapt";
  rc.reasoner = "oracle";
  auto out = runner::run_dataset(data, rc);
  std::set<std::string> seen_values, settings;
  for (std::size_t i = 0; i < out.results.size(); ++i) {
    const auto& r = out.results[i];
    const auto& e = data.episodes[i];
    CHECK(r.episode_id == e.id());
    CHECK(r.setting == (e.is_static() ? "static" : "dynamic"));
    CHECK(r.scenes == (e.seen_scene ? "seen" : "unseen"));
    CHECK(r.expert_steps == data.experts.at(e.id()).expert.steps);
    seen_values.insert(r.scenes);
    settings.insert(r.setting);
  }
  CHECK(settings.size() == 2);
  CHECK(seen_values.size() == 2);
}

}
