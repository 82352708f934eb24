#pragma once

// Bridges the household model and the STRIPS layer: builds the fixed domain,
// compiles a (scene, episode) pair into a planning problem, projects simulator
// states to symbolic states, and translates plans back into simulator actions.
//
// Busy timers have no numeric counterpart in STRIPS, so an appliance occupied
// for T steps is compiled as a countdown over tick constants: T-1 applications
// of WaitTick walk the counter down and a final WaitDone clears the occupied
// flag. The planner therefore schedules exactly T Wait actions.

#include <string>
#include <vector>

#include "affordsim/pddl.hpp"
#include "affordsim/planner.hpp"
#include "affordsim/sim.hpp"
#include "affordsim/task_types.hpp"
#include "affordsim/world.hpp"

namespace affordsim::compile {

// The action schemas are scene-independent; one domain serves every episode.
const pddl::Domain& household_domain();

// Goal formula for a task over type constants, so the text is identical
// between a static/dynamic episode pair.
pddl::Formula task_goal(const genbench::TaskSpec& task);

struct CompiledTask {
  pddl::Problem problem;
  std::vector<pddl::GroundAction> actions;  // travel costs already adjusted
};

// Object universe plus goal formula, without init facts or grounding. Enough
// to evaluate the task goal against projected simulator states.
pddl::Problem goal_problem(const world::Scene& scene,
                           const genbench::TaskSpec& task);

// Problem for the injected initial state of the episode. The agent is assumed
// to start at location 0 holding nothing (matching sim::reset).
CompiledTask compile_task(const world::Scene& scene,
                          const genbench::EpisodeSpec& spec);

// Symbolic snapshot of a simulator state, same fact vocabulary as
// compile_task produces for the initial state.
pddl::State project(const sim::EpisodeState& state);

// Planner plans are expressed over domain schemas (GotoLocation, WaitTick,
// PickupFromSurface, ...); the simulator speaks high-level actions. This
// collapses the schema variants onto the simulator interface.
std::vector<sim::Action> to_sim_actions(const planner::Plan& plan);

struct Demonstration {
  planner::PlanStatus status = planner::PlanStatus::Unsolvable;
  planner::Plan plan;                // raw ground plan
  std::vector<sim::Action> actions;  // simulator-level mirror of `plan`
  int total_cost = 0;                // includes travel costs and waits
};

// Expert for the episode's own initial state (with injections applied), so a
// dynamic episode's expert interleaves waits/cleans as needed.
Demonstration generate_demonstration(const world::Scene& scene,
                                     const genbench::EpisodeSpec& spec,
                                     const planner::PlannerConfig& cfg = {});

}  // namespace affordsim::compile
