#pragma once

// Affordance reasoners. Before touching an object whose class carries latent
// state, the adaptive policy asks one of these whether the object is usable
// right now. The oracle reads the simulator's hidden attributes; the noisy
// reasoner flips oracle verdicts at a calibrated per-class rate, reproducibly
// keyed by (episode, step, object); the external client (protocol.hpp) ships
// the question to another process instead.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "affordsim/sim.hpp"
#include "affordsim/world.hpp"

namespace affordsim::agent {

enum class VerdictState { Available, Unavailable, NotVisible };

std::string to_string(VerdictState s);

struct ReasonerVerdict {
  VerdictState state = VerdictState::Available;
  // Which latent condition blocks the object; set iff Unavailable.
  std::optional<world::AffordanceCategory> category;
  double confidence = 1.0;
};

struct ReasonerQuery {
  std::string episode_id;
  int step = 0;  // simulator step counter at query time
  std::string object_id;
};

class Reasoner {
 public:
  virtual ~Reasoner() = default;
  virtual std::string label() const = 0;
  // `state` is the live episode; each kind restricts itself to what it may
  // see (the oracle reads latent truth, the external client serializes only
  // the agent-visible observation). An object outside the agent's view is
  // NotVisible regardless of kind.
  virtual ReasonerVerdict assess(const sim::EpisodeState& state,
                                 const ReasonerQuery& query) = 0;
};

// Ground truth. When several conditions hold at once the verdict reports the
// one that clears last to resolve: Occupied, then Used, then Dirty.
class OracleReasoner : public Reasoner {
 public:
  std::string label() const override { return "oracle"; }
  ReasonerVerdict assess(const sim::EpisodeState& state,
                         const ReasonerQuery& query) override;
};

// Calibration defaults for the noisy reasoner.
inline constexpr double kMicrowaveAccuracy = 0.9562;
inline constexpr double kPanAccuracy = 0.9040;
inline constexpr double kFallbackAccuracy = 0.7539;

struct NoisyConfig {
  std::map<std::string, double> accuracy;  // per object class
  double fallback = kFallbackAccuracy;     // classes not in the map
  std::uint64_t seed = 0;

  double accuracy_for(const std::string& class_name) const;
};

// Map pre-filled with the per-class defaults above.
NoisyConfig default_noisy_config();

// Same uniform accuracy for every class.
NoisyConfig uniform_noisy_config(double accuracy, std::uint64_t seed = 0);

// Wraps the oracle and flips its verdict with probability 1 - accuracy for
// the queried object's class. The flip draw is keyed by
// (seed, episode id, step, object id), so identical queries get identical
// answers and reruns reproduce byte for byte. A flip towards Unavailable
// fabricates a category drawn from the class's applicable ones. Accuracies
// must lie in (0.5, 1.0]; visibility is never subject to noise.
class NoisyReasoner : public Reasoner {
 public:
  explicit NoisyReasoner(NoisyConfig config);
  std::string label() const override { return "noisy"; }
  ReasonerVerdict assess(const sim::EpisodeState& state,
                         const ReasonerQuery& query) override;

 private:
  NoisyConfig config_;
  OracleReasoner oracle_;
};

}  // namespace affordsim::agent
