#include "dpp/oracle.hpp"

#include <algorithm>
#include <stdexcept>

#include "dpp/simplex.hpp"

namespace dpp {

namespace {

using Program = lp::LinearProgram<double>;

// Variable layout: one column per (event, action) pair holding p(alpha|omega),
// optionally followed by epsilon itself.
struct Layout {
  std::vector<Eigen::Index> offset;
  Eigen::Index pairs = 0;

  explicit Layout(const NetworkModel& model) {
    for (std::size_t w = 0; w < model.event_count(); ++w) {
      offset.push_back(pairs);
      pairs += static_cast<Eigen::Index>(model.action_count(w));
    }
  }
};

// Rows of E-weighted coefficients: row 0 is y0, rows 1..K are a_k - b_k,
// rows K+1..K+M are y_m.
Eigen::MatrixXd expectation_rows(const NetworkModel& model, const Layout& layout) {
  const auto K = static_cast<Eigen::Index>(model.queue_count());
  const auto M = static_cast<Eigen::Index>(model.constraint_count());
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(1 + K + M, layout.pairs);
  for (std::size_t w = 0; w < model.event_count(); ++w) {
    const double p = model.probability(w);
    for (std::size_t a = 0; a < model.action_count(w); ++a) {
      const auto col = layout.offset[w] + static_cast<Eigen::Index>(a);
      const auto& o = model.outcome(w, a);
      rows(0, col) = p * o.penalties(0);
      rows.block(1, col, K, 1) = p * (o.arrivals - o.services);
      rows.block(1 + K, col, M, 1) = p * o.penalties.tail(M);
    }
  }
  return rows;
}

void add_normalization(Program& program, const NetworkModel& model, const Layout& layout) {
  for (std::size_t w = 0; w < model.event_count(); ++w) {
    Vector row = Vector::Zero(program.variables());
    row.segment(layout.offset[w], static_cast<Eigen::Index>(model.action_count(w))).setOnes();
    program.add_equality(row, 1.0);
  }
}

OmegaOnlyPolicy extract_policy(const NetworkModel& model, const Layout& layout, const Vector& x) {
  OmegaOnlyPolicy policy;
  for (std::size_t w = 0; w < model.event_count(); ++w) {
    const auto n = static_cast<Eigen::Index>(model.action_count(w));
    Vector p = x.segment(layout.offset[w], n).cwiseMax(0.0);
    p /= p.sum();
    policy.probabilities.push_back(std::move(p));
  }
  return policy;
}

}  // namespace

std::optional<PolicySolution> compute_y0_opt(const NetworkModel& model, double epsilon) {
  if (!(epsilon >= 0.0)) throw std::domain_error("compute_y0_opt: epsilon must be >= 0");
  const Layout layout(model);
  const Eigen::MatrixXd rows = expectation_rows(model, layout);

  Program program(layout.pairs);
  program.cost = rows.row(0).transpose();
  for (Eigen::Index r = 1; r < rows.rows(); ++r) program.add_upper(rows.row(r).transpose(), -epsilon);
  add_normalization(program, model, layout);

  const auto sol = lp::solve(program);
  if (sol.status != lp::Status::Optimal) return std::nullopt;
  PolicySolution out{epsilon, 0.0, extract_policy(model, layout, sol.x)};
  out.objective = policy_expectations(model, out.policy).objective;
  return out;
}

std::optional<PolicySolution> compute_epsilon_max(const NetworkModel& model) {
  const Layout layout(model);
  const Eigen::MatrixXd rows = expectation_rows(model, layout);
  const Eigen::Index eps = layout.pairs;

  // maximise epsilon >= 0:  E[row_r] + epsilon <= 0 for every constraint row.
  Program program(layout.pairs + 1);
  program.cost(eps) = -1.0;
  for (Eigen::Index r = 1; r < rows.rows(); ++r) {
    Vector row(layout.pairs + 1);
    row << rows.row(r).transpose(), 1.0;
    program.add_upper(row, 0.0);
  }
  add_normalization(program, model, layout);

  const auto sol = lp::solve(program);
  if (sol.status != lp::Status::Optimal) return std::nullopt;
  PolicySolution out{sol.x(eps), 0.0, extract_policy(model, layout, sol.x.head(layout.pairs))};
  out.objective = policy_expectations(model, out.policy).objective;
  return out;
}

std::vector<CurvePoint> y0_opt_curve(const NetworkModel& model, const std::vector<double>& grid) {
  std::vector<CurvePoint> curve;
  curve.reserve(grid.size());
  for (double e : grid) {
    const auto sol = compute_y0_opt(model, e);
    curve.push_back({e, sol ? std::optional<double>(sol->objective) : std::nullopt});
  }
  return curve;
}

PolicyExpectations policy_expectations(const NetworkModel& model, const OmegaOnlyPolicy& policy) {
  policy.check(model);
  const auto K = static_cast<Eigen::Index>(model.queue_count());
  const auto M = static_cast<Eigen::Index>(model.constraint_count());
  PolicyExpectations e{0.0, Vector::Zero(K), Vector::Zero(M)};
  for (std::size_t w = 0; w < model.event_count(); ++w) {
    for (std::size_t a = 0; a < model.action_count(w); ++a) {
      const double weight = model.probability(w) * policy.probabilities[w](static_cast<Eigen::Index>(a));
      if (weight == 0.0) continue;
      const auto& o = model.outcome(w, a);
      e.objective += weight * o.penalties(0);
      e.drift += weight * (o.arrivals - o.services);
      e.constraints += weight * o.penalties.tail(M);
    }
  }
  return e;
}

std::optional<OracleValues> oracle_values(const NetworkModel& model) {
  const auto at_zero = compute_y0_opt(model, 0.0);
  const auto eps = compute_epsilon_max(model);
  if (!at_zero || !eps) return std::nullopt;
  OracleValues v;
  v.y0_opt = at_zero->objective;
  v.epsilon_max = std::max(0.0, eps->epsilon);
  // Re-solve at epsilon_max; round-off can make the exact boundary
  // marginally infeasible, in which case the epsilon_max policy is used.
  const auto at_max = compute_y0_opt(model, v.epsilon_max);
  v.y0_opt_at_epsilon_max = at_max ? at_max->objective : eps->objective;
  v.y0_min = model.y0_min();
  return v;
}

}  // namespace dpp
