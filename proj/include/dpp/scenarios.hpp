#pragma once

#include <vector>

#include "dpp/model.hpp"

namespace dpp::scenarios {

/// One queue, one event, arrivals 0.5 per slot; "idle" serves nothing at no
/// cost, "transmit" serves 1 unit at power 1.
NetworkModel power_min();

/// Two queues fed 0.4 per slot, two equiprobable channel states.
/// Transmitter A serves one queue per slot and its power is the objective
/// y0. Transmitter B can serve queue 2 alongside A, but its average power
/// is capped: y1 = p_B(t) - 0.2.
NetworkModel constrained_2q();

/// Two queues with three channel/arrival events (ON/OFF style links) and a
/// power objective; no constraint penalties.
NetworkModel opportunistic_3s();

/// Every scenario shipped with the project, in a fixed order.
std::vector<NetworkModel> corpus();

}  // namespace dpp::scenarios
