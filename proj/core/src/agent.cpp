#include "affordsim/agent.hpp"

namespace affordsim::agent {

BaselinePolicy::BaselinePolicy(std::vector<sim::Action> script, PolicyConfig config)
    : script_(std::move(script)), config_(config) {}

std::optional<sim::Action> BaselinePolicy::next_action(const sim::EpisodeState&) {
  if (cursor_ >= script_.size()) return std::nullopt;
  return script_[cursor_];
}

void BaselinePolicy::notify(const sim::Action&, const sim::StepOutcome& outcome) {
  if (outcome.ok || ++retries_ > config_.retry_limit) {
    ++cursor_;
    retries_ = 0;
  }
}

std::string stage_one_target(const sim::Action& action, const world::Scene& scene) {
  switch (action.type) {
    case sim::ActionType::Goto:
    case sim::ActionType::Wait:
    case sim::ActionType::Clean:  // cleaning is the fix, not the hazard
      return "";
    default:
      break;
  }
  auto it = scene.objects.find(action.target);
  if (it == scene.objects.end()) return "";  // the simulator will reject it
  return it->second.cls().dynamic() ? action.target : "";
}

std::vector<sim::Action> clean_recovery(const sim::EpisodeState& state,
                                        const std::string& target) {
  using sim::Action;
  using sim::ActionType;
  const Action goto_sink{ActionType::Goto, "", state.scene.sink_location};
  const Action clean{ActionType::Clean, target, -1};
  // Every shape ends back at the interruption site, because the rest of the
  // script assumes the agent never left it.
  const Action go_back{ActionType::Goto, "", state.agent_location};
  if (state.holding == target) {
    return {goto_sink, clean, go_back};
  }
  const Action fetch{ActionType::Pickup, target, -1};
  if (!state.holding) {
    return {fetch, goto_sink, clean, go_back};
  }
  // Hands are full with something else: park it on a surface here, wash the
  // target, then bring the target back and re-take what we carried.
  std::string surface;
  for (const auto& [id, obj] : state.scene.objects) {
    if (obj.location != state.agent_location || obj.inside) continue;
    const auto& cls = obj.cls();
    if (cls.receptacle && !cls.openable && !cls.portable()) {
      surface = id;
      break;
    }
  }
  if (surface.empty()) {
    throw std::logic_error("no parking surface at location " +
                           std::to_string(state.agent_location));
  }
  const Action park{ActionType::Put, surface, -1};
  return {park,
          fetch,
          goto_sink,
          clean,
          Action{ActionType::Goto, "", state.agent_location},
          park,  // set the cleaned target down where we parked
          Action{ActionType::Pickup, *state.holding, -1}};
}

AdaptPolicy::AdaptPolicy(std::vector<sim::Action> script, std::string episode_id,
                         Reasoner& reasoner, PolicyConfig config)
    : script_(std::move(script)),
      episode_id_(std::move(episode_id)),
      reasoner_(reasoner),
      config_(config) {}

ReasonerVerdict AdaptPolicy::ask(const sim::EpisodeState& state,
                                 const std::string& target) {
  return reasoner_.assess(state, {episode_id_, state.step_count, target});
}

sim::Action AdaptPolicy::defer(const sim::EpisodeState& state,
                               const sim::Action& action, const std::string& target,
                               const ReasonerVerdict& verdict) {
  if (!pending_) pending_ = Pending{action, target, *verdict.category, 0, 0};
  pending_->category = *verdict.category;
  if (++pending_->deferrals > config_.deferral_limit) {
    throw ResolutionLoop(action.str() + " deferred more than " +
                         std::to_string(config_.deferral_limit) + " times");
  }
  if (world::persistence(pending_->category) == world::Persistence::Temporary) {
    pending_->recheck_countdown = config_.recheck_interval - 1;
    last_source_ = Source::WaitDefer;
    return {sim::ActionType::Wait, "", -1};
  }
  queue_.clear();
  for (auto& a : clean_recovery(state, target)) queue_.push_back(a);
  last_source_ = Source::Resolution;
  return queue_.front();
}

std::optional<sim::Action> AdaptPolicy::recover_visibility(
    const sim::EpisodeState& state) {
  // Open closed containers here one per step; each success shrinks the set,
  // so either the target shows up or we run out and give up on the action.
  for (const auto& [id, obj] : state.scene.objects) {
    if (obj.location != state.agent_location || obj.inside) continue;
    if (!obj.cls().openable || obj.open) continue;
    last_source_ = Source::Probe;
    return sim::Action{sim::ActionType::Open, id, -1};
  }
  return std::nullopt;
}

void AdaptPolicy::abandon_current() {
  pending_.reset();
  queue_.clear();
  ++cursor_;
  retries_ = 0;
  probe_retries_ = 0;
}

std::optional<sim::Action> AdaptPolicy::next_action(const sim::EpisodeState& state) {
  if (!queue_.empty()) {
    last_source_ = Source::Resolution;
    return queue_.front();
  }
  for (;;) {
    if (pending_) {
      if (pending_->recheck_countdown > 0) {
        --pending_->recheck_countdown;
        last_source_ = Source::WaitDefer;
        return sim::Action{sim::ActionType::Wait, "", -1};
      }
      if (!sim::object_visible(state, pending_->target)) {
        if (auto probe = recover_visibility(state)) return probe;
        abandon_current();
        continue;
      }
      auto verdict = ask(state, pending_->target);
      if (verdict.state == VerdictState::Available) {
        if (pending_->action.type == sim::ActionType::Pickup &&
            state.holding == pending_->action.target) {
          // the recovery already fetched it; the pickup became a no-op
          pending_.reset();
          ++cursor_;
          retries_ = 0;
          continue;
        }
        last_source_ = Source::Pending;
        return pending_->action;
      }
      return defer(state, pending_->action, pending_->target, verdict);
    }

    if (cursor_ >= script_.size()) return std::nullopt;
    const auto& action = script_[cursor_];
    auto target = stage_one_target(action, state.scene);
    if (target.empty()) {
      last_source_ = Source::Plan;
      return action;
    }
    if (!sim::object_visible(state, target)) {
      if (auto probe = recover_visibility(state)) return probe;
      abandon_current();
      continue;
    }
    auto verdict = ask(state, target);
    if (verdict.state != VerdictState::Unavailable) {
      last_source_ = Source::Plan;
      return action;
    }
    return defer(state, action, target, verdict);
  }
}

void AdaptPolicy::notify(const sim::Action&, const sim::StepOutcome& outcome) {
  switch (last_source_) {
    case Source::Plan:
      if (outcome.ok || ++retries_ > config_.retry_limit) {
        ++cursor_;
        retries_ = 0;
      }
      break;
    case Source::Pending:
      if (outcome.ok || ++retries_ > config_.retry_limit) {
        pending_.reset();
        ++cursor_;
        retries_ = 0;
      }
      break;
    case Source::Resolution:
      if (outcome.ok) {
        queue_.pop_front();
        retries_ = 0;
      } else if (++retries_ > config_.retry_limit) {
        abandon_current();
      }
      break;
    case Source::WaitDefer:
      break;  // waiting cannot fail
    case Source::Probe:
      if (outcome.ok) {
        probe_retries_ = 0;
      } else if (++probe_retries_ > config_.retry_limit) {
        abandon_current();
      }
      break;
  }
}

}  // namespace affordsim::agent
