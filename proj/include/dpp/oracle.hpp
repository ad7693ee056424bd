#pragma once

#include <optional>
#include <vector>

#include "dpp/controller.hpp"
#include "dpp/model.hpp"

namespace dpp {

/// Optimal event-only policy for one slack level epsilon.
struct PolicySolution {
  double epsilon = 0.0;
  double objective = 0.0;  ///< E[y0] under `policy`
  OmegaOnlyPolicy policy;
};

/// Minimum E[y0] over event-only policies whose expected queue drifts
/// E[a_k - b_k] and constraint penalties E[y_m] are all <= -epsilon.
/// nullopt when no such policy exists.
std::optional<PolicySolution> compute_y0_opt(const NetworkModel& model, double epsilon);

/// Largest slack epsilon achievable by any event-only policy, with a policy
/// attaining it. Zero when only epsilon = 0 is feasible; nullopt when even
/// epsilon = 0 is infeasible.
std::optional<PolicySolution> compute_epsilon_max(const NetworkModel& model);

struct CurvePoint {
  double epsilon = 0.0;
  std::optional<double> y0_opt;  ///< nullopt past epsilon_max
};

std::vector<CurvePoint> y0_opt_curve(const NetworkModel& model, const std::vector<double>& grid);

/// Expected (y0, a - b, y_1..M) of an event-only policy, by enumeration.
struct PolicyExpectations {
  double objective = 0.0;
  Vector drift;        ///< E[a_k - b_k]
  Vector constraints;  ///< E[y_m], m = 1..M
};

PolicyExpectations policy_expectations(const NetworkModel& model, const OmegaOnlyPolicy& policy);

/// Constants the performance bounds need, gathered in one place.
struct OracleValues {
  double y0_opt = 0.0;            ///< y0_opt(0)
  double epsilon_max = 0.0;
  double y0_opt_at_epsilon_max = 0.0;
  double y0_min = 0.0;
};

/// nullopt when the scenario is infeasible at epsilon = 0.
std::optional<OracleValues> oracle_values(const NetworkModel& model);

}  // namespace dpp
