#include "dpp/controller.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dpp {

void DppConfig::check() const {
  if (!(V >= 0.0) || !std::isfinite(V)) throw ConfigError("V: must be finite and >= 0");
  if (!(C >= 0.0) || !std::isfinite(C)) throw ConfigError("C: must be finite and >= 0");
}

OmegaOnlyPolicy OmegaOnlyPolicy::deterministic(const NetworkModel& model,
                                               const std::vector<std::size_t>& choice) {
  if (choice.size() != model.event_count()) {
    throw std::domain_error("deterministic policy: expected one action per event");
  }
  OmegaOnlyPolicy policy;
  for (std::size_t w = 0; w < choice.size(); ++w) {
    Vector p = Vector::Zero(static_cast<Eigen::Index>(model.action_count(w)));
    p(static_cast<Eigen::Index>(choice[w])) = 1.0;
    policy.probabilities.push_back(std::move(p));
  }
  return policy;
}

void OmegaOnlyPolicy::check(const NetworkModel& model) const {
  if (probabilities.size() != model.event_count()) {
    throw std::domain_error("omega-only policy: missing distribution for some event");
  }
  for (std::size_t w = 0; w < probabilities.size(); ++w) {
    const auto& p = probabilities[w];
    if (static_cast<std::size_t>(p.size()) != model.action_count(w)) {
      throw std::domain_error("omega-only policy: distribution size differs from action set");
    }
    if ((p.array() < 0.0).any() || std::abs(p.sum() - 1.0) > 1e-12) {
      throw std::domain_error("omega-only policy: distribution is not a probability vector");
    }
  }
}

namespace {

double weight(const LyapunovWeights& w, Eigen::Index i) { return w ? w.values(i) : 1.0; }

// Scores without dimension checks; the selector validates once per call.
double score_unchecked(const SlotOutcome& o, const SystemState& s, double V,
                       const LyapunovWeights& w) {
  const auto K = s.queues.size();
  double score = V * o.penalties(0);
  for (Eigen::Index k = 0; k < K; ++k) {
    score += weight(w, k) * s.queues(k) * (o.arrivals(k) - o.services(k));
  }
  for (Eigen::Index m = 0; m < s.virtual_queues.size(); ++m) {
    score += weight(w, K + m) * s.virtual_queues(m) * o.penalties(m + 1);
  }
  return score;
}

void check_dimensions(const SlotOutcome& o, const SystemState& s, const LyapunovWeights& w) {
  if (o.arrivals.size() != s.queues.size() || o.services.size() != s.queues.size() ||
      o.penalties.size() != s.virtual_queues.size() + 1) {
    throw std::domain_error("dpp_score: outcome and state dimensions differ");
  }
  if (w) w.check(s.dimension());
}

}  // namespace

double dpp_score(const SlotOutcome& outcome, const SystemState& state, double V,
                 const LyapunovWeights& weights) {
  check_dimensions(outcome, state, weights);
  return score_unchecked(outcome, state, V, weights);
}

std::size_t select_action_dpp(const NetworkModel& model, std::size_t omega,
                              const SystemState& state, const DppConfig& config) {
  const auto n = model.action_count(omega);
  if (n == 0) throw std::domain_error("select_action_dpp: empty action set");
  check_dimensions(model.outcome(omega, 0), state, config.weights);

  // Small fixed menus: two passes beat allocating a score buffer.
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < n; ++a) {
    best = std::min(best, score_unchecked(model.outcome(omega, a), state, config.V, config.weights));
  }
  if (config.C == 0.0) {
    for (std::size_t a = 0; a < n; ++a) {
      if (score_unchecked(model.outcome(omega, a), state, config.V, config.weights) <= best) {
        return a;
      }
    }
  }
  const double limit = best + config.C;
  std::size_t chosen = 0;
  double chosen_score = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < n; ++a) {
    const double s = score_unchecked(model.outcome(omega, a), state, config.V, config.weights);
    if (s <= limit && s > chosen_score) {
      chosen = a;
      chosen_score = s;
    }
  }
  return chosen;
}

std::size_t select_action_policy(const OmegaOnlyPolicy& policy, std::size_t omega,
                                 CounterRng& rng) {
  if (omega >= policy.probabilities.size()) {
    throw std::domain_error("select_action_policy: no distribution for event");
  }
  const auto& p = policy.probabilities[omega];
  const auto n = p.size();
  for (Eigen::Index a = 0; a < n; ++a) {
    if (p(a) == 1.0) return static_cast<std::size_t>(a);
  }
  const double u = rng.uniform();
  double cumulative = 0.0;
  Eigen::Index last_positive = 0;
  for (Eigen::Index a = 0; a < n; ++a) {
    if (p(a) <= 0.0) continue;
    last_positive = a;
    cumulative += p(a);
    if (u < cumulative) return static_cast<std::size_t>(a);
  }
  return static_cast<std::size_t>(last_positive);
}

double compute_B(const NetworkModel& model, const LyapunovWeights& weights) {
  const auto K = static_cast<Eigen::Index>(model.queue_count());
  const auto M = static_cast<Eigen::Index>(model.constraint_count());
  if (weights) weights.check(K + M);
  Vector worst_q = Vector::Zero(K);
  Vector worst_z = Vector::Zero(M);
  for (std::size_t w = 0; w < model.event_count(); ++w) {
    for (std::size_t a = 0; a < model.action_count(w); ++a) {
      const auto& o = model.outcome(w, a);
      worst_q = worst_q.cwiseMax((o.arrivals - o.services).cwiseAbs2());
      if (M > 0) worst_z = worst_z.cwiseMax(o.penalties.tail(M).cwiseAbs2());
    }
  }
  const Vector w = weights ? weights.values : Vector::Ones(K + M);
  return 0.5 * (w.head(K).dot(worst_q) + w.tail(M).dot(worst_z));
}

std::string controller_kind(const Controller& controller) {
  struct Visitor {
    std::string operator()(const DppController&) const { return "dpp"; }
    std::string operator()(const OmegaOnlyController&) const { return "omega-only"; }
    std::string operator()(const FixedActionController&) const { return "fixed-action"; }
  };
  return std::visit(Visitor{}, controller);
}

}  // namespace dpp
