#pragma once

// Execution policies. Both start from the expert script computed on the
// injection-free twin of the episode. The baseline replays it literally with
// bounded retries; the adaptive policy checks, before every scripted action
// that touches an object with latent affordance state, whether that object is
// currently usable (stage one), and recovers when it is not (stage two):
// temporary conditions are waited out with periodic re-checks, persistent
// ones trigger a spliced clean-up subplan, and the blocked action is kept in
// a one-slot pending memory until it can resume.

#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "affordsim/reasoner.hpp"
#include "affordsim/sim.hpp"

namespace affordsim::agent {

struct PolicyConfig {
  int retry_limit = 2;       // extra attempts after a failed action
  int deferral_limit = 100;  // deferrals of one action before aborting
  int recheck_interval = 1;  // steps between re-queries while waiting
};

// The same action was deferred more than deferral_limit times; the episode
// aborts rather than loop forever.
struct ResolutionLoop : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string label() const = 0;
  // Next action to execute, or nullopt once the policy is done. Deterministic
  // given the episode seed and the history fed back through notify().
  virtual std::optional<sim::Action> next_action(const sim::EpisodeState& state) = 0;
  virtual void notify(const sim::Action& action, const sim::StepOutcome& outcome) = 0;
};

// Replays the script regardless of what the world looks like: advance on
// success, retry a failed action up to retry_limit times, then advance
// anyway.
class BaselinePolicy : public Policy {
 public:
  explicit BaselinePolicy(std::vector<sim::Action> script, PolicyConfig config = {});
  std::string label() const override { return "vanilla"; }
  std::optional<sim::Action> next_action(const sim::EpisodeState& state) override;
  void notify(const sim::Action& action, const sim::StepOutcome& outcome) override;

 private:
  std::vector<sim::Action> script_;
  PolicyConfig config_;
  std::size_t cursor_ = 0;
  int retries_ = 0;
};

// Object whose latent state decides whether `action` can meaningfully run,
// or "" when the action needs no check: untargeted actions, targets of
// classes without affordance state, and Clean (which is itself the recovery
// for a dirty object).
std::string stage_one_target(const sim::Action& action, const world::Scene& scene);

class AdaptPolicy : public Policy {
 public:
  // The reasoner is borrowed and must outlive the policy.
  AdaptPolicy(std::vector<sim::Action> script, std::string episode_id,
              Reasoner& reasoner, PolicyConfig config = {});
  std::string label() const override { return "adapt"; }
  std::optional<sim::Action> next_action(const sim::EpisodeState& state) override;
  void notify(const sim::Action& action, const sim::StepOutcome& outcome) override;

 private:
  // Who asked for the action just emitted; notify() keys off this.
  enum class Source { Plan, Pending, Resolution, WaitDefer, Probe };

  struct Pending {
    sim::Action action;
    std::string target;
    world::AffordanceCategory category;
    int deferrals = 0;
    int recheck_countdown = 0;
  };

  ReasonerVerdict ask(const sim::EpisodeState& state, const std::string& target);
  sim::Action defer(const sim::EpisodeState& state, const sim::Action& action,
                    const std::string& target, const ReasonerVerdict& verdict);
  std::optional<sim::Action> recover_visibility(const sim::EpisodeState& state);
  void abandon_current();

  std::vector<sim::Action> script_;
  std::string episode_id_;
  Reasoner& reasoner_;
  PolicyConfig config_;
  std::size_t cursor_ = 0;
  int retries_ = 0;
  int probe_retries_ = 0;
  std::deque<sim::Action> queue_;  // spliced recovery actions
  std::optional<Pending> pending_;
  Source last_source_ = Source::Plan;
};

// Recovery script for a persistent condition on `target`: fetch it if needed
// (parking whatever is in hand on a surface at the current location), clean
// it at the sink, and put the world back so the deferred action can resume.
std::vector<sim::Action> clean_recovery(const sim::EpisodeState& state,
                                        const std::string& target);

}  // namespace affordsim::agent
