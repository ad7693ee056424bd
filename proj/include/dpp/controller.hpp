#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "dpp/dynamics.hpp"
#include "dpp/model.hpp"
#include "dpp/random.hpp"

namespace dpp {

enum class TieBreak { LowestIndex };

/// Drift-plus-penalty controller parameters.
struct DppConfig {
  double V = 0.0;
  /// Additive approximation slack. With C > 0 the selector deliberately
  /// returns the worst action whose score is within C of the minimum.
  double C = 0.0;
  /// Empty means unit weights of the model's dimension.
  LyapunovWeights weights;
  TieBreak tie_break = TieBreak::LowestIndex;

  void check() const;
};

/// Stationary randomized rule that looks only at the current event:
/// `probabilities[omega](alpha)` is the chance of picking action alpha.
struct OmegaOnlyPolicy {
  std::vector<Vector> probabilities;

  static OmegaOnlyPolicy deterministic(const NetworkModel& model,
                                       const std::vector<std::size_t>& choice);
  void check(const NetworkModel& model) const;
};

/// V*y0 + sum_k w_k Q_k (a_k - b_k) + sum_m w_m Z_m y_m. Unit weights when
/// `weights` is empty.
double dpp_score(const SlotOutcome& outcome, const SystemState& state, double V,
                 const LyapunovWeights& weights = {});

/// Index of the action the DPP rule picks for event `omega` in `state`.
std::size_t select_action_dpp(const NetworkModel& model, std::size_t omega,
                              const SystemState& state, const DppConfig& config);

/// Draws an action index from the event's distribution; consumes one
/// uniform variate unless the distribution is a point mass.
std::size_t select_action_policy(const OmegaOnlyPolicy& policy, std::size_t omega,
                                 CounterRng& rng);

/// Per-slot second-moment constant of the drift bound:
/// B = 1/2 sum_k w_k max (a_k - b_k)^2 + 1/2 sum_m w_m max y_m^2, maxima
/// over every (event, action) pair.
double compute_B(const NetworkModel& model, const LyapunovWeights& weights = {});

struct DppController {
  DppConfig config;
};

struct OmegaOnlyController {
  OmegaOnlyPolicy policy;
};

/// Always plays the action named `action_id` (must exist under every event).
struct FixedActionController {
  std::string action_id;
};

using Controller = std::variant<DppController, OmegaOnlyController, FixedActionController>;

std::string controller_kind(const Controller& controller);

}  // namespace dpp
