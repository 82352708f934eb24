#include "affordsim/runner.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace affordsim::runner {

using Json = nlohmann::json;

std::unique_ptr<agent::Reasoner> make_reasoner(const RunConfig& config) {
  if (config.policy == "vanilla") return nullptr;
  if (config.reasoner == "oracle") {
    return std::make_unique<agent::OracleReasoner>();
  }
  if (config.reasoner == "noisy") {
    return std::make_unique<agent::NoisyReasoner>(config.noisy);
  }
  if (config.reasoner == "external") {
    if (config.endpoint.empty()) {
      throw std::invalid_argument("external reasoner needs an endpoint");
    }
    return std::make_unique<protocol::ExternalReasoner>(config.endpoint,
                                                        config.timeout_ms);
  }
  throw std::invalid_argument("unknown reasoner: " + config.reasoner);
}

namespace {

std::unique_ptr<agent::Policy> make_policy(const genbench::EpisodeSpec& episode,
                                           const genbench::ExpertRecord& expert,
                                           const RunConfig& config,
                                           agent::Reasoner* reasoner) {
  if (config.policy == "vanilla") {
    return std::make_unique<agent::BaselinePolicy>(expert.static_expert.actions,
                                                   config.policy_cfg);
  }
  if (config.policy == "adapt") {
    if (reasoner == nullptr) {
      throw std::invalid_argument("the adapt policy needs a reasoner");
    }
    return std::make_unique<agent::AdaptPolicy>(expert.static_expert.actions,
                                                episode.id(), *reasoner,
                                                config.policy_cfg);
  }
  throw std::invalid_argument("unknown policy: " + config.policy);
}

}  // namespace

EpisodeRun run_episode(const world::Scene& scene, const genbench::EpisodeSpec& episode,
                       const genbench::ExpertRecord& expert, const RunConfig& config,
                       agent::Reasoner* reasoner) {
  auto policy = make_policy(episode, expert, config, reasoner);
  auto state = sim::reset(scene, episode);

  EpisodeRun run;
  std::string abort = "none";
  int i = 0;
  for (;;) {
    if (state.step_count >= config.max_steps) {
      abort = "budget";
      break;
    }
    std::optional<sim::Action> action;
    try {
      action = policy->next_action(state);
    } catch (const agent::ResolutionLoop&) {
      abort = "resolution_loop";
      break;
    } catch (const protocol::TimeoutError&) {
      abort = "timeout";
      break;
    } catch (const protocol::MalformedResponse&) {
      abort = "malformed";
      break;
    }
    if (!action) break;
    auto outcome = sim::step(state, *action);
    policy->notify(*action, outcome);
    Json line{{"episode", episode.id()},
              {"i", i++},
              {"action", action->to_json()},
              {"ok", outcome.ok},
              {"fail", outcome.ok ? "" : sim::to_string(outcome.reason)},
              {"violated", outcome.violated ? world::to_string(*outcome.violated)
                                            : ""},
              {"cost", outcome.cost},
              {"total", state.step_count}};
    run.trajectory.push_back(line.dump());
  }

  auto score = sim::score_goal(state, episode);
  auto& r = run.result;
  r.episode_id = episode.id();
  r.success = score.success && abort == "none";
  r.gc_satisfied = score.gc_satisfied;
  r.gc_total = score.gc_total;
  r.agent_steps = state.step_count;
  r.expert_steps = expert.expert.steps;
  r.policy = config.policy;
  r.reasoner = config.policy == "vanilla" ? "none" : config.reasoner;
  r.abort = abort;
  r.scenes = episode.seen_scene ? "seen" : "unseen";
  r.setting = episode.is_static() ? "static" : "dynamic";
  r.difficulty = genbench::to_string(episode.difficulty());
  r.task = genbench::to_string(episode.task.type);
  return run;
}

RunOutput run_dataset(const genbench::LoadedDataset& data, const RunConfig& config,
                      const ProgressFn& progress) {
  const int n = static_cast<int>(data.episodes.size());
  std::vector<EpisodeRun> runs(static_cast<std::size_t>(n));

  std::atomic<int> next{0};
  std::mutex progress_mu;
  std::exception_ptr first_error;
  std::mutex error_mu;

  auto work = [&] {
    try {
      auto reasoner = make_reasoner(config);
      for (;;) {
        int i = next.fetch_add(1);
        if (i >= n) break;
        const auto& episode = data.episodes[static_cast<std::size_t>(i)];
        auto it = data.experts.find(episode.id());
        if (it == data.experts.end()) {
          throw std::runtime_error("dataset has no expert record for " +
                                   episode.id());
        }
        runs[static_cast<std::size_t>(i)] = run_episode(
            data.scene_of(episode), episode, it->second, config, reasoner.get());
        if (progress) {
          std::scoped_lock lock(progress_mu);
          progress(runs[static_cast<std::size_t>(i)].result);
        }
      }
    } catch (...) {
      std::scoped_lock lock(error_mu);
      if (!first_error) first_error = std::current_exception();
      next.store(n);  // drain remaining work
    }
  };

  int workers = std::clamp(config.parallel, 1, std::max(1, n));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  RunOutput out;
  out.results.reserve(runs.size());
  for (auto& run : runs) {
    out.results.push_back(std::move(run.result));
    for (auto& line : run.trajectory) {
      out.trajectory_lines.push_back(std::move(line));
    }
  }
  return out;
}

void write_run_output(const std::filesystem::path& out_dir, const RunOutput& out) {
  std::filesystem::create_directories(out_dir);
  eval::write_results(out_dir / "results.jsonl", out.results);
  std::ofstream traj(out_dir / "trajectories.jsonl");
  if (!traj) {
    throw eval::EvalError("cannot write " + (out_dir / "trajectories.jsonl").string());
  }
  for (const auto& line : out.trajectory_lines) traj << line << "\n";
}

}  // namespace affordsim::runner
