#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpp/controller.hpp"
#include "dpp/model.hpp"
#include "dpp/oracle.hpp"
#include "dpp/simulator.hpp"

namespace dpp {

/// (1/t) sum_{tau<t} x(tau) with compensated summation.
double time_average(std::span<const double> series, std::size_t t);

/// Fraction of samples with |x| > q.
double tail_fraction(std::span<const double> series, double q);

struct TailPoint {
  double q = 0.0;
  double fraction = 0.0;
};

/// Sample-path stability figures for one queue (actual or virtual).
struct QueueStability {
  std::string label;                 ///< "Q1", "Z1", ...
  double time_average = 0.0;         ///< (1/T) sum_{t<T} |Q(t)|
  std::vector<TailPoint> tail;       ///< q -> (1/T) sum 1{|Q(t)| > q}
  double terminal_ratio = 0.0;       ///< |Q(T)| / T
  std::vector<double> checkpoint_averages;  ///< time averages at T/10, T/2, T
  bool tail_from_checkpoints = false;       ///< streaming traces sample the tail
};

/// Across-seed versions of the expectation-form metrics.
struct EnsembleStability {
  std::size_t seeds = 0;
  double mean_time_average = 0.0;    ///< strong stability estimate
  std::vector<TailPoint> mean_tail;  ///< (1/T) sum Pr[|Q(t)| > q] estimate
  double mean_terminal_ratio = 0.0;  ///< E|Q(T)|/T estimate
};

struct StabilityReport {
  std::uint64_t horizon = 0;
  std::vector<QueueStability> queues;              ///< first seed (or the only trace)
  std::vector<EnsembleStability> ensemble;         ///< empty for a single trace
  std::vector<std::vector<QueueStability>> per_seed;  ///< all seeds, ensemble only
};

/// Tail grid used when none is supplied: multiples of each queue's time
/// average.
std::vector<double> default_tail_multipliers();

StabilityReport stability_metrics(const Trace& trace,
                                  const std::vector<double>& tail_multipliers = default_tail_multipliers());

/// Seeds must share scenario and horizon. Ensemble tail points are
/// evaluated at the first seed's q grid.
StabilityReport stability_metrics(std::span<const Trace> traces,
                                  const std::vector<double>& tail_multipliers = default_tail_multipliers());

struct BoundTolerance {
  double penalty = 0.0;
  double backlog = 0.0;

  /// k standard errors of the summary's batch means.
  static BoundTolerance standard_errors(const RunSummary& summary, double k);
};

struct BoundReport {
  double penalty_empirical = 0.0;
  std::optional<double> penalty_cap;  ///< y0_opt + (B+C)/V; unset for V == 0
  double backlog_empirical = 0.0;
  std::optional<double> backlog_cap;  ///< (B+C+V(y0_opt(eps_max)-y0_min))/eps_max
  std::optional<double> sharper_backlog_cap;  ///< y0_min replaced by observed ybar0
  BoundTolerance tolerance;
  bool penalty_pass = true;
  bool backlog_pass = true;
  bool sharper_backlog_pass = true;

  /// Primary verdict (penalty and backlog caps); the sharper cap is reported
  /// separately.
  bool pass() const { return penalty_pass && backlog_pass; }
  double penalty_margin() const;
  double backlog_margin() const;
};

BoundReport verify_bounds(const RunSummary& summary, const std::optional<OracleValues>& oracle,
                          double B, double C, const BoundTolerance& tolerance);

struct ConstraintVerdict {
  std::size_t m = 0;  ///< 1-based constraint index
  double terminal_ratio = 0.0;  ///< Z_m(T)/T
  double penalty_average = 0.0; ///< ybar_m(T)
  bool pass = false;            ///< terminal_ratio <= threshold
};

std::vector<ConstraintVerdict> constraint_satisfaction(const RunSummary& summary,
                                                       double threshold = 1e-2);
std::vector<ConstraintVerdict> constraint_satisfaction(const Trace& trace, double threshold = 1e-2);

struct MomentCheck {
  std::string label;
  double empirical_max = 0.0;
  double empirical_mean = 0.0;
  double worst_case = 0.0;  ///< pointwise bound over all (event, action) pairs
  bool pass = false;        ///< empirical_max <= worst_case
};

struct MomentCheckReport {
  std::vector<MomentCheck> queue_changes;  ///< (Q(t+1)-Q(t))^4 and (Z(t+1)-Z(t))^4
  MomentCheck objective_square;            ///< y0(t)^2
  MomentReport expected;                   ///< enumerated expectation bounds

  bool pass() const;
};

/// Requires a trace with retained records and at least 1000 slots.
MomentCheckReport moment_checks(const Trace& trace, const NetworkModel& model);

struct LlnVerdict {
  std::uint64_t samples = 0;
  double terminal_mean = 0.0;
  double bound = 0.0;
  double tolerance = 0.0;
  bool mean_zero = false;
  bool pass = false;
  std::vector<std::pair<std::uint64_t, double>> partial_means;  ///< (t, mean) at log-spaced t

  /// Distance to the bound, tolerance excluded.
  double margin() const { return mean_zero ? -std::abs(terminal_mean) : bound - terminal_mean; }
};

/// Partial-mean check for a martingale-difference series (mean_zero: pass
/// when |mean| <= tolerance) or a series with conditional mean <= bound
/// (pass when mean <= bound + tolerance).
LlnVerdict lln_check(std::span<const double> series, double bound, double tolerance,
                     bool mean_zero);
LlnVerdict lln_check(const std::function<double(std::uint64_t)>& generator, std::uint64_t n,
                     double bound, double tolerance, bool mean_zero);

/// ceil(n^(1 + delta)).
std::uint64_t sparse_time(std::uint64_t n, double delta);

struct SparseSample {
  std::uint64_t n = 0;
  std::uint64_t t = 0;
  double ratio = 0.0;  ///< |Q(t_n)| / t_n
};

struct SparseRateVerdict {
  double delta = 0.0;
  std::vector<SparseSample> samples;
  bool pass = false;  ///< final sampled ratio <= threshold
};

/// `path` holds Q(0), Q(1), ..., Q(T).
SparseRateVerdict sparse_rate_check(std::span<const double> path, double delta,
                                    double threshold = 1e-2);

/// Q_k(0..T) (or Z_m for index >= K) from a trace with retained records.
std::vector<double> queue_path(const Trace& trace, Eigen::Index component);

struct DriftConditionVerdict {
  std::size_t states = 0;
  std::size_t violations = 0;
  double worst_slack = 0.0;  ///< min over states of rhs - lhs
  double epsilon = 0.0;
  double y0_opt_epsilon = 0.0;
};

/// For every state, enumerates E[L(Theta') - L(Theta) + V y0 | Theta] under
/// the DPP selector and checks it against
/// B + C + V y0_opt(eps) - eps sum_i w_i |theta_i|.
/// Throws std::domain_error when epsilon is beyond epsilon_max.
DriftConditionVerdict dpp_condition_check(const NetworkModel& model, const DppConfig& config,
                                          std::span<const SystemState> states, double epsilon,
                                          double B);

}  // namespace dpp
