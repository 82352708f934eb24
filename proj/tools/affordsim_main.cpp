// Command-line front end: dataset generation, agent runs, metric reports,
// trajectory replay, and the loopback reasoner stub.
//
// Exit codes: 0 success, 2 validation problem (flags, config schema, missing
// files), 3 runtime failure. Progress goes to stdout as machine-parsable
// `event=... key=value` lines.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "affordsim/dataset.hpp"
#include "affordsim/eval.hpp"
#include "affordsim/protocol.hpp"
#include "affordsim/runner.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::json;
using namespace affordsim;

namespace {

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Strict config reader: unknown keys are rejected with their path so typos
// cannot silently fall back to defaults.
class ConfigReader {
 public:
  ConfigReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) {
      throw ValidationError("config: " + path_ + " must be an object");
    }
  }

  ~ConfigReader() = default;

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      (void)value;
      if (!seen_.count(key)) {
        throw ValidationError("config: unknown key at " + path_ + "." + key);
      }
    }
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const Json::exception&) {
      throw ValidationError("config: bad value at " + path_ + "." + std::string(key));
    }
  }

  bool has_object(const char* key) {
    seen_.insert(key);
    if (!j_.contains(key)) return false;
    if (!j_.at(key).is_object()) {
      throw ValidationError("config: " + path_ + "." + key + " must be an object");
    }
    return true;
  }

  const Json& child(const char* key) const { return j_.at(key); }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

genbench::GenConfig parse_gen_config(const Json& j) {
  genbench::GenConfig cfg;
  ConfigReader top(j, "$");
  top.read("seed", cfg.seed);
  top.read("pairs", cfg.pairs);
  top.read("scenes", cfg.scenes);
  top.read("unseen_fraction", cfg.unseen_fraction);
  top.read("advanced_fraction", cfg.advanced_fraction);
  top.read("min_busy", cfg.min_busy);
  top.read("max_busy", cfg.max_busy);
  top.read("retry_budget", cfg.retry_budget);
  if (top.has_object("size")) {
    ConfigReader size(top.child("size"), "$.size");
    size.read("locations", cfg.size.locations);
    size.read("extra_objects", cfg.size.extra_objects);
    size.finish();
  }
  if (top.has_object("planner")) {
    ConfigReader planner(top.child("planner"), "$.planner");
    planner.read("max_expansions", cfg.planner.max_expansions);
    planner.read("max_goal_disjuncts", cfg.planner.max_goal_disjuncts);
    planner.finish();
  }
  top.finish();
  if (cfg.pairs < 1) throw ValidationError("config: $.pairs must be >= 1");
  if (cfg.scenes < 1) throw ValidationError("config: $.scenes must be >= 1");
  if (cfg.min_busy < 1 || cfg.max_busy < cfg.min_busy) {
    throw ValidationError("config: busy range wants 1 <= min_busy <= max_busy");
  }
  if (cfg.unseen_fraction < 0.0 || cfg.unseen_fraction > 1.0 ||
      cfg.advanced_fraction < 0.0 || cfg.advanced_fraction > 1.0) {
    throw ValidationError("config: fractions must lie in [0, 1]");
  }
  return cfg;
}

Json load_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path.string());
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ValidationError("not valid JSON: " + path.string());
  return j;
}

// "0.8" applies to every class; "Microwave=0.9" overrides one class.
void apply_accuracy_flag(agent::NoisyConfig& noisy, const std::string& spec) {
  auto eq = spec.find('=');
  try {
    if (eq == std::string::npos) {
      noisy.accuracy.clear();
      noisy.fallback = std::stod(spec);
    } else {
      noisy.accuracy[spec.substr(0, eq)] = std::stod(spec.substr(eq + 1));
    }
  } catch (const std::exception&) {
    throw ValidationError("bad --accuracy value: " + spec);
  }
}

int cmd_gen(const fs::path& config_path, const fs::path& out_dir,
            std::optional<std::uint64_t> seed) {
  Json j = config_path.empty() ? Json::object() : load_json_file(config_path);
  auto cfg = parse_gen_config(j);
  if (seed) cfg.seed = *seed;
  std::cout << "event=gen_start seed=" << cfg.seed << " pairs=" << cfg.pairs
            << " scenes=" << cfg.scenes << "\n";
  auto data = genbench::build_dataset(cfg);
  genbench::write_dataset(out_dir, data);
  std::cout << "event=gen_done episodes=" << 2 * data.pairs.size() << " out="
            << out_dir.string() << std::endl;
  return 0;
}

int cmd_run(const fs::path& dataset_dir, const fs::path& out_dir,
            const runner::RunConfig& cfg) {
  auto data = genbench::load_dataset(dataset_dir);
  std::cout << "event=run_start policy=" << cfg.policy << " reasoner="
            << (cfg.policy == "vanilla" ? "none" : cfg.reasoner)
            << " episodes=" << data.episodes.size() << " parallel="
            << cfg.parallel << "\n";
  auto out = runner::run_dataset(data, cfg, [](const eval::EpisodeResult& r) {
    std::cout << "event=episode id=" << r.episode_id << " success=" << r.success
              << " steps=" << r.agent_steps << " abort=" << r.abort << "\n";
  });
  runner::write_run_output(out_dir, out);
  double sr = 0;
  for (const auto& r : out.results) sr += r.success ? 1 : 0;
  if (!out.results.empty()) sr /= static_cast<double>(out.results.size());
  std::cout << "event=run_done episodes=" << out.results.size() << " sr=" << sr
            << " out=" << out_dir.string() << std::endl;
  return 0;
}

int cmd_eval(const fs::path& results_path, const std::string& format,
             const fs::path& out_path) {
  auto results = eval::read_results(results_path);
  auto report = eval::aggregate(results);
  std::string text;
  if (format == "json") {
    text = eval::to_json_text(report);
  } else if (format == "csv") {
    text = eval::to_csv(report);
  } else if (format == "md") {
    text = eval::to_markdown(report);
  } else {
    throw ValidationError("unknown format: " + format);
  }
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    if (!out) throw ValidationError("cannot write " + out_path.string());
    out << text;
    std::cout << "event=eval_done cells=" << report.cells.size() << " out="
              << out_path.string() << std::endl;
  }
  return 0;
}

// Re-executes the logged actions and confirms the simulator still produces
// the same outcomes; catches dataset/trace drift.
int cmd_replay(const std::string& episode_id, const fs::path& trace_path,
               const fs::path& dataset_dir) {
  auto data = genbench::load_dataset(dataset_dir);
  const auto* episode = data.find_episode(episode_id);
  if (episode == nullptr) {
    throw ValidationError("dataset has no episode " + episode_id);
  }
  std::ifstream in(trace_path);
  if (!in) throw ValidationError("cannot read " + trace_path.string());

  auto state = sim::reset(data.scene_of(*episode), *episode);
  std::string line;
  int checked = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw ValidationError("bad JSON line in " + trace_path.string());
    }
    if (j.value("episode", "") != episode_id) continue;
    auto action = sim::Action::from_json(j.at("action"));
    auto outcome = sim::step(state, action);
    bool ok_match = outcome.ok == j.at("ok").get<bool>();
    bool cost_match = outcome.cost == j.at("cost").get<int>();
    bool total_match = state.step_count == j.at("total").get<int>();
    if (!ok_match || !cost_match || !total_match) {
      std::cout << "event=replay_mismatch episode=" << episode_id << " i="
                << j.value("i", -1) << " action=" << action.str() << std::endl;
      return 3;
    }
    ++checked;
  }
  if (checked == 0) {
    throw ValidationError("trace has no steps for episode " + episode_id);
  }
  auto score = sim::score_goal(state, *episode);
  std::cout << "event=replay_ok episode=" << episode_id << " steps="
            << state.step_count << " lines=" << checked << " success="
            << score.success << std::endl;
  return 0;
}

int cmd_stub(const std::string& mode_str, const std::string& listen,
             const fs::path& dataset_dir) {
  auto mode = protocol::stub_mode_from_string(mode_str);
  std::map<std::string, std::vector<genbench::Injection>> injections;
  if (mode == protocol::StubLogic::Mode::Oracle) {
    if (dataset_dir.empty()) {
      throw ValidationError("stub-reasoner --mode oracle needs --dataset");
    }
    auto data = genbench::load_dataset(dataset_dir);
    for (const auto& e : data.episodes) injections[e.id()] = e.injections;
  }
  protocol::StubLogic logic(mode, std::move(injections));
  if (listen == "-") {
    protocol::serve_stream(logic, std::cin, std::cout);
    return 0;
  }
  if (listen.rfind("tcp://", 0) != 0) {
    throw ValidationError("--listen wants '-' or tcp://host:port, got " + listen);
  }
  std::string rest = listen.substr(6);
  auto colon = rest.rfind(':');
  if (colon == std::string::npos) {
    throw ValidationError("--listen wants tcp://host:port, got " + listen);
  }
  int port = 0;
  try {
    port = std::stoi(rest.substr(colon + 1));
  } catch (const std::exception&) {
    throw ValidationError("bad port in " + listen);
  }
  protocol::TcpServer server(logic, rest.substr(0, colon), port);
  std::cout << "event=listening addr=tcp://" << rest.substr(0, colon) << ":"
            << server.port() << std::endl;
  server.run();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Household affordance benchmark: generation, agents, metrics"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a benchmark dataset");
  std::string gen_config;
  std::string gen_out;
  std::optional<std::uint64_t> gen_seed;
  gen->add_option("--config", gen_config, "JSON generation config");
  gen->add_option("--out", gen_out, "Output dataset directory")->required();
  gen->add_option("--seed", gen_seed, "Override the config seed");

  // run
  auto* run = app.add_subcommand("run", "Run a policy over a dataset");
  std::string run_dataset, run_out;
  runner::RunConfig run_cfg;
  run_cfg.noisy = agent::default_noisy_config();
  std::vector<std::string> accuracy_flags;
  std::uint64_t run_seed = 0;
  run->add_option("--dataset", run_dataset, "Dataset directory")->required();
  run->add_option("--out", run_out, "Output directory")->required();
  run->add_option("--policy", run_cfg.policy, "vanilla | adapt")
      ->check(CLI::IsMember({"vanilla", "adapt"}));
  run->add_option("--reasoner", run_cfg.reasoner, "oracle | noisy | external")
      ->check(CLI::IsMember({"oracle", "noisy", "external"}));
  run->add_option("--accuracy", accuracy_flags,
                  "Noisy accuracy: X for all classes or Class=X (repeatable)");
  run->add_option("--endpoint", run_cfg.endpoint,
                  "External reasoner endpoint (tcp://host:port or cmd:...)");
  run->add_option("--timeout-ms", run_cfg.timeout_ms, "External reasoner deadline");
  run->add_option("--seed", run_seed, "Noisy reasoner seed");
  run->add_option("--max-steps", run_cfg.max_steps, "Per-episode step budget");
  run->add_option("--parallel", run_cfg.parallel, "Worker threads");

  // eval
  auto* ev = app.add_subcommand("eval", "Aggregate a results file into a report");
  std::string eval_results, eval_format = "md", eval_out;
  ev->add_option("--results", eval_results, "results.jsonl from a run")->required();
  ev->add_option("--format", eval_format, "json | csv | md")
      ->check(CLI::IsMember({"json", "csv", "md"}));
  ev->add_option("--out", eval_out, "Report file (stdout when omitted)");

  // replay
  auto* replay = app.add_subcommand("replay", "Re-execute a logged trajectory");
  std::string replay_episode, replay_trace, replay_dataset;
  replay->add_option("--episode", replay_episode, "Episode id")->required();
  replay->add_option("--trace", replay_trace, "trajectories.jsonl file")->required();
  replay->add_option("--dataset", replay_dataset, "Dataset directory")->required();

  // stub-reasoner
  auto* stub = app.add_subcommand("stub-reasoner", "Loopback reasoner server");
  std::string stub_mode = "always-available", stub_listen = "-", stub_dataset;
  stub->add_option("--mode", stub_mode, "oracle | always-available")
      ->check(CLI::IsMember({"oracle", "always-available"}));
  stub->add_option("--listen", stub_listen, "'-' for stdio or tcp://host:port");
  stub->add_option("--dataset", stub_dataset, "Dataset directory (oracle mode)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return cmd_gen(gen_config, gen_out, gen_seed);
    if (run->parsed()) {
      for (const auto& flag : accuracy_flags) {
        apply_accuracy_flag(run_cfg.noisy, flag);
      }
      run_cfg.noisy.seed = run_seed;
      if (run_cfg.policy == "adapt" && run_cfg.reasoner == "external" &&
          run_cfg.endpoint.empty()) {
        throw ValidationError("--reasoner external needs --endpoint");
      }
      if (run_cfg.max_steps < 1) throw ValidationError("--max-steps must be >= 1");
      if (run_cfg.parallel < 1) throw ValidationError("--parallel must be >= 1");
      return cmd_run(run_dataset, run_out, run_cfg);
    }
    if (ev->parsed()) return cmd_eval(eval_results, eval_format, eval_out);
    if (replay->parsed()) {
      return cmd_replay(replay_episode, replay_trace, replay_dataset);
    }
    if (stub->parsed()) return cmd_stub(stub_mode, stub_listen, stub_dataset);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
