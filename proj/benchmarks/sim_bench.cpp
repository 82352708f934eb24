#include <benchmark/benchmark.h>

#include "affordsim/agent.hpp"
#include "affordsim/genbench.hpp"
#include "affordsim/sim.hpp"

using namespace affordsim;

namespace {

// One generated pair reused across iterations; generation itself is measured
// separately.
struct SimFixture {
  genbench::GeneratedDataset data;

  SimFixture() {
    genbench::GenConfig cfg;
    cfg.seed = 1234;
    cfg.pairs = 4;
    cfg.scenes = 2;
    data = genbench::build_dataset(cfg);
  }

  const genbench::GeneratedPair& pair() const { return data.pairs.front(); }
  const world::Scene& scene() const {
    return data.scenes.at(pair().dyn.scene_id);
  }
};

SimFixture& fixture() {
  static SimFixture f;
  return f;
}

}  // namespace

static void BM_EpisodeReset(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    auto episode = sim::reset(f.scene(), f.pair().dyn);
    benchmark::DoNotOptimize(episode.step_count);
  }
}
BENCHMARK(BM_EpisodeReset);

static void BM_ExpertReplay(benchmark::State& state) {
  const auto& f = fixture();
  const auto& actions = f.pair().expert_dynamic.actions;
  std::int64_t steps = 0;
  for (auto _ : state) {
    auto episode = sim::reset(f.scene(), f.pair().dyn);
    for (const auto& a : actions) {
      benchmark::DoNotOptimize(sim::step(episode, a).ok);
    }
    steps += static_cast<std::int64_t>(actions.size());
  }
  state.SetItemsProcessed(steps);
}
BENCHMARK(BM_ExpertReplay);

static void BM_Observe(benchmark::State& state) {
  const auto& f = fixture();
  auto episode = sim::reset(f.scene(), f.pair().dyn);
  for (auto _ : state) {
    auto obs = sim::observe(episode);
    benchmark::DoNotOptimize(obs.visible.size());
  }
}
BENCHMARK(BM_Observe);

static void BM_ScoreGoal(benchmark::State& state) {
  const auto& f = fixture();
  auto episode = sim::reset(f.scene(), f.pair().dyn);
  for (auto _ : state) {
    auto score = sim::score_goal(episode, f.pair().dyn);
    benchmark::DoNotOptimize(score.gc_satisfied);
  }
}
BENCHMARK(BM_ScoreGoal);

static void BM_AdaptiveEpisode(benchmark::State& state) {
  const auto& f = fixture();
  agent::OracleReasoner oracle;
  std::int64_t steps = 0;
  for (auto _ : state) {
    agent::AdaptPolicy policy(f.pair().expert_static.actions, f.pair().dyn.id(),
                              oracle);
    auto episode = sim::reset(f.scene(), f.pair().dyn);
    while (episode.step_count < 400) {
      auto a = policy.next_action(episode);
      if (!a) break;
      auto outcome = sim::step(episode, *a);
      policy.notify(*a, outcome);
      ++steps;
    }
  }
  state.SetItemsProcessed(steps);
}
BENCHMARK(BM_AdaptiveEpisode);

static void BM_GeneratePair(benchmark::State& state) {
  const auto& f = fixture();
  genbench::GenConfig cfg = f.data.config;
  const auto& scene_id = f.pair().dyn.scene_id;
  const auto& scene = f.data.scenes.at(scene_id);
  for (auto _ : state) {
    auto pair = genbench::generate_pair(scene, scene_id, 0, cfg);
    benchmark::DoNotOptimize(pair.expert_dynamic.total_cost);
  }
}
BENCHMARK(BM_GeneratePair);
