#pragma once

// Forward state-space planner over the STRIPS subset. Greedy best-first
// search guided by the delete-relaxation heuristic is the workhorse; A* with
// h=0 (uniform cost) is kept as a slow-but-optimal reference mode.
//
// Quantified goals are compiled to ground DNF once per task; negated literals
// are handled with complement facts inside the relaxation so the heuristic
// never has to reason about deletes.

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "affordsim/pddl.hpp"

namespace affordsim::planner {

enum class Strategy { GreedyBestFirst, AStarH0 };

struct PlannerConfig {
  Strategy strategy = Strategy::GreedyBestFirst;
  std::size_t max_expansions = 200000;
  std::size_t max_goal_disjuncts = 20000;
};

struct PlanStep {
  std::string action;
  std::vector<std::string> args;
  int cost = 1;
  bool operator==(const PlanStep&) const = default;
  std::string signature() const;
};

struct Plan {
  std::vector<PlanStep> steps;
  int total_cost = 0;
  bool operator==(const Plan&) const = default;
};

enum class PlanStatus { Solved, Unsolvable, BudgetExceeded };

struct PlanResult {
  PlanStatus status = PlanStatus::Unsolvable;
  Plan plan;
  std::size_t expansions = 0;
};

PlanResult plan(const pddl::Domain& d, const pddl::Problem& p,
                const PlannerConfig& cfg = {});

// Same search but over a caller-supplied grounding (used when ground action
// costs are adjusted after grounding, e.g. travel costs per location pair).
PlanResult plan_grounded(const pddl::Domain& d, const pddl::Problem& p,
                         const std::vector<pddl::GroundAction>& actions,
                         const PlannerConfig& cfg = {});

inline constexpr int kUnreachable = std::numeric_limits<int>::max() / 4;

// Relaxed plan length from `state`; kUnreachable if the goal cannot be reached
// even ignoring delete effects.
int hff(const pddl::Domain& d, const pddl::Problem& p, const pddl::State& state,
        const PlannerConfig& cfg = {});

// Replays the plan with set-semantics apply and checks the goal at the end.
// On failure, `why` (if given) receives a short explanation.
bool validate_plan(const pddl::Domain& d, const pddl::Problem& p,
                   const Plan& plan, std::string* why = nullptr);

}  // namespace affordsim::planner
