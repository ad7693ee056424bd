#include "dpp/scenarios.hpp"

namespace dpp::scenarios {

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

}  // namespace

NetworkModel power_min() {
  std::vector<EventSpec> events{{{"w0", Vector()}, 1.0}};
  std::vector<std::vector<ActionSpec>> menus{{
      {{"idle"}, {vec({0.5}), vec({0.0}), vec({0.0})}},
      {{"transmit"}, {vec({0.5}), vec({1.0}), vec({1.0})}},
  }};
  return NetworkModel("power-min", 1, 0, 0.0, std::move(events), std::move(menus));
}

NetworkModel constrained_2q() {
  constexpr double kArrival = 0.4;
  constexpr double kPowerBudgetB = 0.2;

  // payload = (power of A, power of B) when transmitting in this state
  std::vector<EventSpec> events{
      {{"good", vec({1.0, 1.0})}, 0.5},
      {{"bad", vec({2.0, 1.5})}, 0.5},
  };
  const std::vector<Action> menu{{"idle"}, {"A->q1"}, {"A->q2"}, {"A->q1+B->q2"}};
  std::vector<std::vector<Action>> action_sets(events.size(), menu);

  auto outcome = [](const Action& a, const NetworkState& w) {
    const double pa = w.payload(0);
    const double pb = w.payload(1);
    SlotOutcome o{vec({kArrival, kArrival}), vec({0.0, 0.0}), vec({0.0, -kPowerBudgetB})};
    if (a.id == "A->q1") {
      o.services = vec({1.0, 0.0});
      o.penalties(0) = pa;
    } else if (a.id == "A->q2") {
      o.services = vec({0.0, 1.0});
      o.penalties(0) = pa;
    } else if (a.id == "A->q1+B->q2") {
      o.services = vec({1.0, 1.0});
      o.penalties(0) = pa;
      o.penalties(1) = pb - kPowerBudgetB;
    }
    return o;
  };
  return NetworkModel::from_function("constrained-2q", 2, 1, 0.0, std::move(events),
                                     std::move(action_sets), outcome);
}

NetworkModel opportunistic_3s() {
  // payload = (channel 1, channel 2, arrivals 1, arrivals 2)
  std::vector<EventSpec> events{
      {{"both-on", vec({1.0, 1.0, 1.0, 0.0})}, 0.25},
      {{"q1-on", vec({1.0, 0.0, 0.0, 1.0})}, 0.35},
      {{"q2-on", vec({0.0, 1.0, 0.0, 0.0})}, 0.40},
  };
  const std::vector<Action> menu{{"idle"}, {"serve1"}, {"serve2"}, {"serve-both"}};
  std::vector<std::vector<Action>> action_sets(events.size(), menu);

  auto outcome = [](const Action& a, const NetworkState& w) {
    const Vector channel = w.payload.head(2);
    SlotOutcome o{w.payload.tail(2), vec({0.0, 0.0}), vec({0.0})};
    if (a.id == "serve1") {
      o.services(0) = channel(0);
      o.penalties(0) = 1.0;
    } else if (a.id == "serve2") {
      o.services(1) = channel(1);
      o.penalties(0) = 1.0;
    } else if (a.id == "serve-both") {
      o.services = channel;
      o.penalties(0) = 2.5;
    }
    return o;
  };
  return NetworkModel::from_function("opportunistic-3s", 2, 0, 0.0, std::move(events),
                                     std::move(action_sets), outcome);
}

std::vector<NetworkModel> corpus() { return {power_min(), constrained_2q(), opportunistic_3s()}; }

}  // namespace dpp::scenarios
