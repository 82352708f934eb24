#include "affordsim/reasoner.hpp"

#include <stdexcept>

#include "affordsim/rng.hpp"

namespace affordsim::agent {

std::string to_string(VerdictState s) {
  switch (s) {
    case VerdictState::Available: return "available";
    case VerdictState::Unavailable: return "unavailable";
    case VerdictState::NotVisible: return "not-visible";
  }
  return "?";
}

ReasonerVerdict OracleReasoner::assess(const sim::EpisodeState& state,
                                       const ReasonerQuery& query) {
  if (!sim::object_visible(state, query.object_id)) {
    return {VerdictState::NotVisible, std::nullopt, 1.0};
  }
  const auto& obj = state.scene.object(query.object_id);
  if (obj.busy_remaining > 0) {
    return {VerdictState::Unavailable, world::AffordanceCategory::Occupied, 1.0};
  }
  if (obj.used) {
    return {VerdictState::Unavailable, world::AffordanceCategory::Used, 1.0};
  }
  if (!obj.clean) {
    return {VerdictState::Unavailable, world::AffordanceCategory::Dirty, 1.0};
  }
  return {VerdictState::Available, std::nullopt, 1.0};
}

double NoisyConfig::accuracy_for(const std::string& class_name) const {
  auto it = accuracy.find(class_name);
  return it == accuracy.end() ? fallback : it->second;
}

NoisyConfig default_noisy_config() {
  NoisyConfig cfg;
  cfg.accuracy["Microwave"] = kMicrowaveAccuracy;
  cfg.accuracy["Pan"] = kPanAccuracy;
  return cfg;
}

NoisyConfig uniform_noisy_config(double accuracy, std::uint64_t seed) {
  NoisyConfig cfg;
  cfg.fallback = accuracy;
  cfg.seed = seed;
  return cfg;
}

namespace {

void check_accuracy(double a) {
  if (!(a > 0.5 && a <= 1.0)) {
    throw std::invalid_argument("reasoner accuracy must lie in (0.5, 1.0], got " +
                                std::to_string(a));
  }
}

}  // namespace

NoisyReasoner::NoisyReasoner(NoisyConfig config) : config_(std::move(config)) {
  check_accuracy(config_.fallback);
  for (const auto& [cls, a] : config_.accuracy) {
    (void)cls;
    check_accuracy(a);
  }
}

ReasonerVerdict NoisyReasoner::assess(const sim::EpisodeState& state,
                                      const ReasonerQuery& query) {
  auto truth = oracle_.assess(state, query);
  if (truth.state == VerdictState::NotVisible) return truth;

  const auto& cls = state.scene.object(query.object_id).cls();
  double accuracy = config_.accuracy_for(cls.name);
  Rng rng(rng_key(config_.seed, "noisy", query.episode_id,
                  static_cast<std::uint64_t>(query.step), query.object_id));
  if (!rng.chance(1.0 - accuracy)) {
    truth.confidence = accuracy;
    return truth;
  }
  if (truth.state == VerdictState::Available) {
    auto cats = cls.applicable_categories();
    // only dynamic-class objects get queried, but stay defensive
    if (cats.empty()) return truth;
    auto cat = cats[rng.below(cats.size())];
    return {VerdictState::Unavailable, cat, accuracy};
  }
  return {VerdictState::Available, std::nullopt, accuracy};
}

}  // namespace affordsim::agent
