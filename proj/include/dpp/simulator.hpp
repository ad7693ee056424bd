#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dpp/controller.hpp"
#include "dpp/dynamics.hpp"
#include "dpp/model.hpp"
#include "dpp/summation.hpp"

namespace dpp {

/// One simulated slot. `queues_after`/`virtual_queues_after` hold Theta(t+1).
struct SlotRecord {
  std::uint64_t slot = 0;
  std::string omega_id;
  std::string action_id;
  SlotOutcome outcome;
  Vector queues_after;
  Vector virtual_queues_after;
};

/// Running totals sampled every `checkpoint_every` slots, kept even when
/// per-slot records are dropped.
struct Checkpoint {
  std::uint64_t slot = 0;  ///< number of completed slots t
  Vector queues;           ///< Q(t)
  Vector virtual_queues;   ///< Z(t)
  Vector penalty_sums;     ///< sum_{tau<t} y_m(tau), m = 0..M
  Vector queue_sums;       ///< sum_{tau<t} |Q_k(tau)|
  Vector virtual_sums;     ///< sum_{tau<t} Z_m(tau)
};

struct RunOptions {
  std::uint64_t horizon = 1;
  std::uint64_t seed = 0;
  /// Zero queues of the model's dimensions when unset.
  std::optional<SystemState> initial;
  /// Keep per-slot records. Unset: keep them when horizon <= 1e6.
  std::optional<bool> retain_records;
  /// 0 selects ceil(T / 1000).
  std::uint64_t checkpoint_every = 0;
  /// Batches for the batch-means standard errors in RunSummary.
  std::size_t batch_count = 20;
};

/// Result of one run. Per-slot data is stored column-wise (one column per
/// slot) when records are retained; totals and checkpoints are always kept.
struct Trace {
  std::string scenario;
  std::string controller;
  DppConfig config;
  std::uint64_t seed = 0;
  std::uint64_t horizon = 0;
  SystemState initial;
  SystemState final_state;

  std::vector<std::uint32_t> omega_index;
  std::vector<std::uint32_t> action_index;
  std::vector<std::string> omega_ids;                 ///< by event index
  std::vector<std::vector<std::string>> action_ids;   ///< by event, action index
  Eigen::MatrixXd arrivals;        ///< K x T
  Eigen::MatrixXd services;        ///< K x T
  Eigen::MatrixXd penalties;       ///< (M+1) x T
  Eigen::MatrixXd queues;          ///< K x T, Q(t+1)
  Eigen::MatrixXd virtual_queues;  ///< M x T, Z(t+1)

  Vector penalty_sums;   ///< compensated sum_{tau<T} y_m(tau)
  Vector queue_sums;     ///< compensated sum_{tau<T} |Q_k(tau)|
  Vector virtual_sums;   ///< compensated sum_{tau<T} Z_m(tau)
  double backlog_sum = 0.0;  ///< sum_{tau<T} (sum_k |Q_k| + sum_m Z_m)

  std::vector<double> batch_penalty_means;  ///< per-batch mean of y0
  std::vector<double> batch_backlog_means;  ///< per-batch mean combined backlog

  std::vector<Checkpoint> checkpoints;

  bool records_retained = false;

  bool has_records() const { return records_retained; }
  Eigen::Index queue_count() const { return initial.queues.size(); }
  Eigen::Index constraint_count() const { return initial.virtual_queues.size(); }

  SlotRecord record(std::uint64_t t) const;
  /// Theta(t) for t in [0, T]; requires records for t > 0 (or t == T).
  SystemState state(std::uint64_t t) const;
};

/// Per-slot bookkeeping shared by the simulator and the trace readers:
/// running sums, batch means, checkpoints and (optionally) column records.
class TraceRecorder {
 public:
  /// `trace` must already carry its metadata, ids and initial state.
  TraceRecorder(Trace& trace, std::uint64_t checkpoint_every, std::size_t batch_count);

  /// Accounts Theta(t) before slot t's decision.
  void before_slot(const SystemState& state);
  /// Records slot t's decision and the resulting Theta(t+1).
  void after_slot(std::size_t omega, std::size_t alpha, const SlotOutcome& outcome,
                  const SystemState& next);
  void finish(const SystemState& final_state);

 private:
  void push_checkpoint(const SystemState& state);

  Trace& trace_;
  std::uint64_t t_ = 0;
  std::uint64_t checkpoint_every_;
  std::uint64_t batches_;
  std::uint64_t batch_length_;
  double pending_backlog_ = 0.0;
  CompensatedVectorSum<double> penalty_sums_;
  CompensatedVectorSum<double> queue_sums_;
  CompensatedVectorSum<double> virtual_sums_;
  CompensatedSum<double> backlog_sum_;
  CompensatedSum<double> batch_penalty_;
  CompensatedSum<double> batch_backlog_;
};

struct RunSummary {
  std::string scenario;
  std::string controller;
  std::uint64_t seed = 0;
  std::uint64_t horizon = 0;
  double V = 0.0;
  double C = 0.0;
  double B = 0.0;
  Vector penalty_average;        ///< ybar_m(T), m = 0..M
  Vector queue_average;          ///< time-average |Q_k|
  Vector virtual_average;        ///< time-average Z_m
  double backlog_average = 0.0;  ///< time-average sum |Q_k| + sum Z_m
  Vector queue_terminal_ratio;   ///< |Q_k(T)| / T
  Vector virtual_terminal_ratio; ///< Z_m(T) / T
  double penalty_standard_error = 0.0;  ///< batch means, y0
  double backlog_standard_error = 0.0;  ///< batch means, combined backlog

  bool operator==(const RunSummary&) const = default;
};

/// Simulates T slots: draw omega, choose an action, record the outcome and
/// apply the queue updates. Throws ConfigError for T == 0 or a non-finite
/// or negative initial state.
Trace run(const NetworkModel& model, const Controller& controller, const RunOptions& options);

RunSummary summarize(const Trace& trace, double B);

/// L(Theta(t+1)) - L(Theta(t)). Requires retained records.
double empirical_drift(const Trace& trace, const LyapunovWeights& weights, std::uint64_t t);

/// Recomputes every recorded state from the recorded outcomes with the
/// dynamics updates; returns the first slot whose stored state differs
/// bit-wise, or nullopt when the trace replays exactly.
std::optional<std::uint64_t> replay_mismatch(const Trace& trace);

enum class SeedPolicy { Derived, Common };

struct SweepOptions {
  std::uint64_t horizon = 1;
  std::uint64_t seed = 0;
  SeedPolicy seed_policy = SeedPolicy::Derived;
  double C = 0.0;
  LyapunovWeights weights;
  std::uint64_t checkpoint_every = 0;
  std::size_t batch_count = 20;
  /// Upper bound on concurrent runs; 0 uses the hardware concurrency.
  std::size_t max_parallel = 0;
};

/// Seed used for the i-th sweep point.
std::uint64_t sweep_seed(const SweepOptions& options, std::size_t index);

/// One independent DPP run per V (streaming mode); summaries in input order.
std::vector<RunSummary> sweep_V(const NetworkModel& model, const std::vector<double>& Vs,
                                const SweepOptions& options);

}  // namespace dpp
