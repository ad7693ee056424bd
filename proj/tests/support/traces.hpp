#pragma once

#include <cstdint>
#include <vector>

#include "dpp/simulator.hpp"

namespace dpp::testing {

/// Record-bearing trace following a prescribed path Q(0..T) (and optional
/// Z(0..T)); outcomes are whatever arrivals, services and penalties produce
/// those increments. The constraint penalty is the Z increment, y0 is zero.
inline Trace path_trace(const std::vector<double>& q, const std::vector<double>& z = {},
                        const std::string& scenario = "synthetic") {
  const Eigen::Index M = z.empty() ? 0 : 1;
  Trace trace;
  trace.scenario = scenario;
  trace.controller = "synthetic";
  trace.horizon = q.size() - 1;
  trace.initial = SystemState{Vector::Constant(1, q[0]), Vector::Constant(M, M ? z[0] : 0.0), 0};
  trace.records_retained = true;
  trace.omega_ids = {"w"};
  trace.action_ids = {{"a"}};
  TraceRecorder recorder(trace, 0, 20);
  SystemState state = trace.initial;
  for (std::size_t t = 0; t + 1 < q.size(); ++t) {
    recorder.before_slot(state);
    const double dq = q[t + 1] - q[t];
    Vector y = Vector::Zero(M + 1);
    if (M) y(1) = z[t + 1] - z[t];
    const SlotOutcome o{Vector::Constant(1, dq > 0 ? dq : 0.0), Vector::Constant(1, dq < 0 ? -dq : 0.0), y};
    state = SystemState{Vector::Constant(1, q[t + 1]), Vector::Constant(M, M ? z[t + 1] : 0.0), t + 1};
    recorder.after_slot(0, 0, o, state);
  }
  recorder.finish(state);
  return trace;
}

}  // namespace dpp::testing
