#include "dpp/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace dpp {

namespace {

constexpr double kProbabilityTolerance = 1e-12;

bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace

NetworkModel::NetworkModel(std::string name, std::size_t queues, std::size_t constraints,
                           double y0_min, std::vector<EventSpec> events,
                           std::vector<std::vector<ActionSpec>> menus)
    : name_(std::move(name)),
      queues_(queues),
      constraints_(constraints),
      y0_min_(y0_min),
      events_(std::move(events)),
      menus_(std::move(menus)) {
  validate();
  cdf_.reserve(events_.size());
  double running = 0.0;
  for (const auto& e : events_) {
    running += e.probability;
    cdf_.push_back(running);
  }
  cdf_.back() = 1.0;
}

NetworkModel NetworkModel::from_function(std::string name, std::size_t queues,
                                         std::size_t constraints, double y0_min,
                                         std::vector<EventSpec> events,
                                         std::vector<std::vector<Action>> action_sets,
                                         const OutcomeFn& outcome) {
  if (action_sets.size() != events.size()) {
    throw ConfigError("action sets: expected one set per event");
  }
  std::vector<std::vector<ActionSpec>> menus(events.size());
  for (std::size_t w = 0; w < events.size(); ++w) {
    for (const auto& a : action_sets[w]) {
      menus[w].push_back({a, outcome(a, events[w].state)});
    }
  }
  return NetworkModel(std::move(name), queues, constraints, y0_min, std::move(events),
                      std::move(menus));
}

void NetworkModel::validate() const {
  if (queues_ == 0) throw ConfigError("K: queue count must be positive");
  if (!std::isfinite(y0_min_)) throw ConfigError("y0_min: must be finite");
  if (events_.empty()) throw ConfigError("omega: event space is empty");
  if (menus_.size() != events_.size()) {
    throw ConfigError("actions: expected one action set per event");
  }

  double total = 0.0;
  std::set<std::string> event_ids;
  for (const auto& e : events_) {
    if (!(e.probability >= 0.0) || !std::isfinite(e.probability)) {
      throw ConfigError("omega: probability of '" + e.state.id + "' is negative or non-finite");
    }
    if (!event_ids.insert(e.state.id).second) {
      throw ConfigError("omega: duplicate event id '" + e.state.id + "'");
    }
    total += e.probability;
  }
  if (std::abs(total - 1.0) > kProbabilityTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "omega: probabilities sum to " << total << ", expected 1";
    throw ConfigError(msg.str());
  }

  for (std::size_t w = 0; w < events_.size(); ++w) {
    const auto& id = events_[w].state.id;
    if (menus_[w].empty()) throw ConfigError("actions: event '" + id + "' has no feasible action");
    std::set<std::string> action_ids;
    for (const auto& spec : menus_[w]) {
      const auto where = "actions." + id + "." + spec.action.id;
      if (!action_ids.insert(spec.action.id).second) {
        throw ConfigError(where + ": duplicate action id");
      }
      const auto& o = spec.outcome;
      if (static_cast<std::size_t>(o.arrivals.size()) != queues_ ||
          static_cast<std::size_t>(o.services.size()) != queues_) {
        throw ConfigError(where + ": a and b must have K entries");
      }
      if (static_cast<std::size_t>(o.penalties.size()) != constraints_ + 1) {
        throw ConfigError(where + ": y must have M+1 entries");
      }
      if (!all_finite(o.arrivals) || !all_finite(o.services) || !all_finite(o.penalties)) {
        throw ConfigError(where + ": non-finite outcome");
      }
      if ((o.arrivals.array() < 0.0).any() || (o.services.array() < 0.0).any()) {
        throw ConfigError(where + ": arrivals and services must be non-negative");
      }
      if (o.penalties(0) < y0_min_) throw ConfigError(where + ": y0 below y0_min");
    }
  }
}

std::size_t NetworkModel::event_index(const std::string& id) const {
  for (std::size_t w = 0; w < events_.size(); ++w) {
    if (events_[w].state.id == id) return w;
  }
  throw std::domain_error("unknown event id '" + id + "'");
}

std::size_t NetworkModel::action_index(std::size_t omega, const std::string& id) const {
  const auto& menu = menus_.at(omega);
  for (std::size_t a = 0; a < menu.size(); ++a) {
    if (menu[a].action.id == id) return a;
  }
  throw std::domain_error("action '" + id + "' is not feasible for event '" +
                          events_[omega].state.id + "'");
}

std::size_t NetworkModel::max_action_count() const {
  std::size_t n = 0;
  for (const auto& m : menus_) n = std::max(n, m.size());
  return n;
}

std::size_t NetworkModel::event_from_uniform(double u) const {
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const auto idx = static_cast<std::size_t>(it - cdf_.begin());
  return std::min(idx, cdf_.size() - 1);
}

std::size_t sample_omega(const NetworkModel& model, CounterRng& rng) {
  if (model.event_count() == 1) return 0;
  return model.event_from_uniform(rng.uniform());
}

SlotOutcome evaluate(const NetworkModel& model, const Action& action, const NetworkState& omega) {
  const auto w = model.event_index(omega.id);
  const auto a = model.action_index(w, action.id);
  return model.outcome(w, a);
}

double MomentReport::bound() const {
  double d = objective_second;
  if (arrivals_fourth.size() > 0) d = std::max(d, arrivals_fourth.maxCoeff());
  if (services_fourth.size() > 0) d = std::max(d, services_fourth.maxCoeff());
  if (constraints_fourth.size() > 0) d = std::max(d, constraints_fourth.maxCoeff());
  return d;
}

MomentReport estimate_moment_bounds(const NetworkModel& model) {
  const auto K = static_cast<Eigen::Index>(model.queue_count());
  const auto M = static_cast<Eigen::Index>(model.constraint_count());
  MomentReport report{Vector::Zero(K), Vector::Zero(K), Vector::Zero(M), 0.0};

  for (std::size_t w = 0; w < model.event_count(); ++w) {
    Vector worst_a = Vector::Zero(K);
    Vector worst_b = Vector::Zero(K);
    Vector worst_y = Vector::Zero(M);
    double worst_y0 = 0.0;
    for (std::size_t a = 0; a < model.action_count(w); ++a) {
      const auto& o = model.outcome(w, a);
      worst_a = worst_a.cwiseMax(o.arrivals.array().pow(4).matrix());
      worst_b = worst_b.cwiseMax(o.services.array().pow(4).matrix());
      if (M > 0) worst_y = worst_y.cwiseMax(o.penalties.tail(M).array().pow(4).matrix());
      worst_y0 = std::max(worst_y0, o.penalties(0) * o.penalties(0));
    }
    const double p = model.probability(w);
    report.arrivals_fourth += p * worst_a;
    report.services_fourth += p * worst_b;
    report.constraints_fourth += p * worst_y;
    report.objective_second += p * worst_y0;
  }
  return report;
}

}  // namespace dpp
