#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dpp/random.hpp"

namespace dpp {

using Vector = Eigen::VectorXd;

/// Raised for malformed scenarios, configs and CLI input.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A random network event omega(t): channel states, arrival batches, ...
struct NetworkState {
  std::string id;
  Vector payload;
};

struct Action {
  std::string id;
};

/// Per-slot consequences of taking an action under an event.
///
/// `penalties(0)` is the objective penalty y0; entries 1..M are the
/// constraint penalties whose time averages must stay non-positive.
struct SlotOutcome {
  Vector arrivals;
  Vector services;
  Vector penalties;

  bool operator==(const SlotOutcome&) const = default;
};

struct EventSpec {
  NetworkState state;
  double probability = 0.0;
};

struct ActionSpec {
  Action action;
  SlotOutcome outcome;
};

/// Finite stochastic network: i.i.d. events, per-event action menus and
/// tabulated outcomes. Immutable once constructed.
class NetworkModel {
 public:
  using OutcomeFn = std::function<SlotOutcome(const Action&, const NetworkState&)>;

  /// Builds from explicit tables. Throws ConfigError on any invariant
  /// violation (probabilities, empty menus, negative rates, y0 < y0_min,
  /// dimension mismatch, duplicate ids).
  NetworkModel(std::string name, std::size_t queues, std::size_t constraints, double y0_min,
               std::vector<EventSpec> events, std::vector<std::vector<ActionSpec>> menus);

  /// Tabulates `outcome` over every (event, action) pair.
  static NetworkModel from_function(std::string name, std::size_t queues,
                                    std::size_t constraints, double y0_min,
                                    std::vector<EventSpec> events,
                                    std::vector<std::vector<Action>> action_sets,
                                    const OutcomeFn& outcome);

  const std::string& name() const { return name_; }
  std::size_t queue_count() const { return queues_; }
  std::size_t constraint_count() const { return constraints_; }
  double y0_min() const { return y0_min_; }

  std::size_t event_count() const { return events_.size(); }
  const NetworkState& event(std::size_t omega) const { return events_.at(omega).state; }
  double probability(std::size_t omega) const { return events_.at(omega).probability; }
  std::size_t event_index(const std::string& id) const;

  std::size_t action_count(std::size_t omega) const { return menus_.at(omega).size(); }
  const Action& action(std::size_t omega, std::size_t alpha) const {
    return menus_.at(omega).at(alpha).action;
  }
  std::size_t action_index(std::size_t omega, const std::string& id) const;
  std::size_t max_action_count() const;

  /// Unchecked fast path used by the simulator hot loop.
  const SlotOutcome& outcome(std::size_t omega, std::size_t alpha) const {
    return menus_[omega][alpha].outcome;
  }

  /// Inverse-CDF draw of an event index from one uniform variate.
  std::size_t event_from_uniform(double u) const;

 private:
  void validate() const;

  std::string name_;
  std::size_t queues_;
  std::size_t constraints_;
  double y0_min_;
  std::vector<EventSpec> events_;
  std::vector<std::vector<ActionSpec>> menus_;
  std::vector<double> cdf_;
};

/// Draws omega(t) i.i.d. from the event distribution; returns its index.
std::size_t sample_omega(const NetworkModel& model, CounterRng& rng);

/// Outcome of `action` under `omega`. Throws std::domain_error when the
/// action is not in the event's menu.
SlotOutcome evaluate(const NetworkModel& model, const Action& action, const NetworkState& omega);

/// Largest expected moments achievable by any (randomized) event-only
/// choice of actions. Expectations are linear in the policy, so the maximum
/// is attained by picking the worst action separately for every event.
struct MomentReport {
  Vector arrivals_fourth;     ///< max E[a_k^4], one per queue
  Vector services_fourth;     ///< max E[b_k^4]
  Vector constraints_fourth;  ///< max E[y_m^4], m = 1..M
  double objective_second = 0.0;  ///< max E[y0^2]

  /// Smallest D satisfying all four moment bounds at once.
  double bound() const;
};

MomentReport estimate_moment_bounds(const NetworkModel& model);

}  // namespace dpp
