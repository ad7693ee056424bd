#include "dpp/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dpp/summation.hpp"

namespace dpp {

double time_average(std::span<const double> series, std::size_t t) {
  if (t == 0 || t > series.size()) throw std::out_of_range("time_average: t out of range");
  CompensatedSum<double> sum;
  for (std::size_t i = 0; i < t; ++i) sum += series[i];
  return sum.value() / static_cast<double>(t);
}

double tail_fraction(std::span<const double> series, double q) {
  if (series.empty()) return 0.0;
  std::size_t above = 0;
  for (double x : series) above += std::abs(x) > q ? 1 : 0;
  return static_cast<double>(above) / static_cast<double>(series.size());
}

std::vector<double> default_tail_multipliers() { return {0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0}; }

namespace {

std::string component_label(const Trace& trace, Eigen::Index c) {
  const auto K = trace.queue_count();
  return c < K ? "Q" + std::to_string(c + 1) : "Z" + std::to_string(c - K + 1);
}

double component_value(const Vector& queues, const Vector& virtual_queues, Eigen::Index c) {
  const auto K = queues.size();
  return c < K ? std::abs(queues(c)) : std::abs(virtual_queues(c - K));
}

// |component(t)| for the slots the tail fraction averages over: every
// t < T with records, otherwise the checkpoint samples with slot < T.
std::vector<double> tail_samples(const Trace& trace, Eigen::Index c) {
  std::vector<double> xs;
  if (trace.has_records()) {
    xs.reserve(trace.horizon);
    xs.push_back(component_value(trace.initial.queues, trace.initial.virtual_queues, c));
    const auto K = trace.queue_count();
    for (std::uint64_t t = 0; t + 1 < trace.horizon; ++t) {
      const auto col = static_cast<Eigen::Index>(t);
      xs.push_back(c < K ? std::abs(trace.queues(c, col)) : std::abs(trace.virtual_queues(c - K, col)));
    }
  } else {
    for (const auto& cp : trace.checkpoints) {
      if (cp.slot < trace.horizon) xs.push_back(component_value(cp.queues, cp.virtual_queues, c));
    }
  }
  return xs;
}

double component_sum(const Vector& queue_sums, const Vector& virtual_sums, Eigen::Index c) {
  const auto K = queue_sums.size();
  return c < K ? queue_sums(c) : virtual_sums(c - K);
}

std::vector<double> checkpoint_averages(const Trace& trace, Eigen::Index c) {
  std::vector<double> out;
  for (std::uint64_t target : {trace.horizon / 10, trace.horizon / 2, trace.horizon}) {
    const Checkpoint* best = nullptr;
    for (const auto& cp : trace.checkpoints) {
      if (cp.slot > 0 && cp.slot <= target) best = &cp;
    }
    out.push_back(best ? component_sum(best->queue_sums, best->virtual_sums, c) /
                             static_cast<double>(best->slot)
                       : 0.0);
  }
  return out;
}

std::vector<QueueStability> single_trace(const Trace& trace, const std::vector<double>& multipliers) {
  const double T = static_cast<double>(trace.horizon);
  const auto dims = trace.queue_count() + trace.constraint_count();
  std::vector<QueueStability> out;
  for (Eigen::Index c = 0; c < dims; ++c) {
    QueueStability s;
    s.label = component_label(trace, c);
    s.time_average = component_sum(trace.queue_sums, trace.virtual_sums, c) / T;
    s.terminal_ratio = component_value(trace.final_state.queues, trace.final_state.virtual_queues, c) / T;
    s.checkpoint_averages = checkpoint_averages(trace, c);
    s.tail_from_checkpoints = !trace.has_records();
    const auto xs = tail_samples(trace, c);
    for (double m : multipliers) {
      const double q = m * s.time_average;
      s.tail.push_back({q, tail_fraction(xs, q)});
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

StabilityReport stability_metrics(const Trace& trace, const std::vector<double>& tail_multipliers) {
  if (trace.horizon == 0) throw std::invalid_argument("stability_metrics: empty trace");
  StabilityReport report;
  report.horizon = trace.horizon;
  report.queues = single_trace(trace, tail_multipliers);
  return report;
}

StabilityReport stability_metrics(std::span<const Trace> traces,
                                  const std::vector<double>& tail_multipliers) {
  if (traces.empty()) throw std::invalid_argument("stability_metrics: no traces");
  if (traces.size() == 1) return stability_metrics(traces.front(), tail_multipliers);
  for (const auto& t : traces) {
    if (t.horizon != traces.front().horizon || t.scenario != traces.front().scenario) {
      throw std::invalid_argument("stability_metrics: ensemble traces must share scenario and horizon");
    }
  }

  StabilityReport report;
  report.horizon = traces.front().horizon;
  for (const auto& t : traces) report.per_seed.push_back(single_trace(t, tail_multipliers));
  report.queues = report.per_seed.front();

  const double n = static_cast<double>(traces.size());
  for (std::size_t c = 0; c < report.queues.size(); ++c) {
    EnsembleStability e;
    e.seeds = traces.size();
    CompensatedSum<double> avg;
    CompensatedSum<double> terminal;
    for (const auto& seed : report.per_seed) {
      avg += seed[c].time_average;
      terminal += seed[c].terminal_ratio;
    }
    e.mean_time_average = avg.value() / n;
    e.mean_terminal_ratio = terminal.value() / n;
    for (const auto& point : report.queues[c].tail) {
      CompensatedSum<double> frac;
      for (const auto& t : traces) frac += tail_fraction(tail_samples(t, static_cast<Eigen::Index>(c)), point.q);
      e.mean_tail.push_back({point.q, frac.value() / n});
    }
    report.ensemble.push_back(std::move(e));
  }
  return report;
}

BoundTolerance BoundTolerance::standard_errors(const RunSummary& summary, double k) {
  return {k * summary.penalty_standard_error, k * summary.backlog_standard_error};
}

double BoundReport::penalty_margin() const {
  return penalty_cap ? *penalty_cap + tolerance.penalty - penalty_empirical : 0.0;
}

double BoundReport::backlog_margin() const {
  return backlog_cap ? *backlog_cap + tolerance.backlog - backlog_empirical : 0.0;
}

BoundReport verify_bounds(const RunSummary& summary, const std::optional<OracleValues>& oracle,
                          double B, double C, const BoundTolerance& tolerance) {
  if (!oracle) throw std::invalid_argument("verify_bounds: oracle values missing");
  const auto& o = *oracle;
  const double V = summary.V;
  BoundReport r;
  r.tolerance = tolerance;
  r.penalty_empirical = summary.penalty_average(0);
  r.backlog_empirical = summary.backlog_average;

  if (V > 0.0) {
    r.penalty_cap = o.y0_opt + (B + C) / V;
    r.penalty_pass = r.penalty_empirical <= *r.penalty_cap + tolerance.penalty;
  }
  if (o.epsilon_max > 0.0) {
    r.backlog_cap = (B + C + V * (o.y0_opt_at_epsilon_max - o.y0_min)) / o.epsilon_max;
    r.backlog_pass = r.backlog_empirical <= *r.backlog_cap + tolerance.backlog;
    r.sharper_backlog_cap =
        (B + C + V * (o.y0_opt_at_epsilon_max - r.penalty_empirical)) / o.epsilon_max;
    r.sharper_backlog_pass = r.backlog_empirical <= *r.sharper_backlog_cap + tolerance.backlog;
  }
  return r;
}

std::vector<ConstraintVerdict> constraint_satisfaction(const RunSummary& summary, double threshold) {
  std::vector<ConstraintVerdict> out;
  for (Eigen::Index m = 0; m < summary.virtual_terminal_ratio.size(); ++m) {
    ConstraintVerdict v;
    v.m = static_cast<std::size_t>(m + 1);
    v.terminal_ratio = summary.virtual_terminal_ratio(m);
    v.penalty_average = summary.penalty_average(m + 1);
    v.pass = v.terminal_ratio <= threshold;
    out.push_back(v);
  }
  return out;
}

std::vector<ConstraintVerdict> constraint_satisfaction(const Trace& trace, double threshold) {
  return constraint_satisfaction(summarize(trace, 0.0), threshold);
}

bool MomentCheckReport::pass() const {
  return objective_square.pass &&
         std::all_of(queue_changes.begin(), queue_changes.end(), [](const auto& c) { return c.pass; });
}

MomentCheckReport moment_checks(const Trace& trace, const NetworkModel& model) {
  if (!trace.has_records()) throw std::invalid_argument("moment_checks: trace has no records");
  if (trace.horizon < 1000) throw std::invalid_argument("moment_checks: need at least 1000 slots");
  const auto K = trace.queue_count();
  const auto M = trace.constraint_count();
  const auto T = static_cast<Eigen::Index>(trace.horizon);

  // Pointwise worst cases: |dQ_k| <= max(a_k, b_k), |dZ_m| <= |y_m|.
  Vector worst = Vector::Zero(K + M);
  double worst_y0 = 0.0;
  for (std::size_t w = 0; w < model.event_count(); ++w) {
    for (std::size_t a = 0; a < model.action_count(w); ++a) {
      const auto& o = model.outcome(w, a);
      worst.head(K) = worst.head(K).cwiseMax(o.arrivals.cwiseMax(o.services).array().pow(4).matrix());
      if (M > 0) worst.tail(M) = worst.tail(M).cwiseMax(o.penalties.tail(M).cwiseAbs().array().pow(4).matrix());
      worst_y0 = std::max(worst_y0, o.penalties(0) * o.penalties(0));
    }
  }

  MomentCheckReport report;
  report.expected = estimate_moment_bounds(model);
  for (Eigen::Index c = 0; c < K + M; ++c) {
    const Eigen::RowVectorXd after = c < K ? Eigen::RowVectorXd(trace.queues.row(c))
                                           : Eigen::RowVectorXd(trace.virtual_queues.row(c - K));
    double prev = c < K ? trace.initial.queues(c) : trace.initial.virtual_queues(c - K);
    MomentCheck check;
    check.label = (c < K ? "dQ" : "dZ") + std::to_string(c < K ? c + 1 : c - K + 1) + "^4";
    CompensatedSum<double> sum;
    for (Eigen::Index t = 0; t < T; ++t) {
      const double d = after(t) - prev;
      const double d4 = d * d * d * d;
      check.empirical_max = std::max(check.empirical_max, d4);
      sum += d4;
      prev = after(t);
    }
    check.empirical_mean = sum.value() / static_cast<double>(T);
    check.worst_case = worst(c);
    check.pass = check.empirical_max <= check.worst_case;
    report.queue_changes.push_back(check);
  }

  auto& y0 = report.objective_square;
  y0.label = "y0^2";
  CompensatedSum<double> sum;
  for (Eigen::Index t = 0; t < T; ++t) {
    const double s = trace.penalties(0, t) * trace.penalties(0, t);
    y0.empirical_max = std::max(y0.empirical_max, s);
    sum += s;
  }
  y0.empirical_mean = sum.value() / static_cast<double>(T);
  y0.worst_case = worst_y0;
  y0.pass = y0.empirical_max <= worst_y0;
  return report;
}

LlnVerdict lln_check(const std::function<double(std::uint64_t)>& generator, std::uint64_t n,
                     double bound, double tolerance, bool mean_zero) {
  if (n < 1000) throw std::invalid_argument("lln_check: need at least 1000 samples");
  LlnVerdict v;
  v.samples = n;
  v.bound = bound;
  v.tolerance = tolerance;
  v.mean_zero = mean_zero;
  CompensatedSum<double> sum;
  std::uint64_t next_record = 1;
  for (std::uint64_t t = 0; t < n; ++t) {
    sum += generator(t);
    if (t + 1 == next_record || t + 1 == n) {
      v.partial_means.emplace_back(t + 1, sum.value() / static_cast<double>(t + 1));
      next_record = std::max(next_record + 1, next_record + next_record / 10);
    }
  }
  v.terminal_mean = sum.value() / static_cast<double>(n);
  v.pass = mean_zero ? std::abs(v.terminal_mean) <= tolerance : v.terminal_mean <= bound + tolerance;
  return v;
}

LlnVerdict lln_check(std::span<const double> series, double bound, double tolerance, bool mean_zero) {
  return lln_check([&](std::uint64_t t) { return series[t]; }, series.size(), bound, tolerance,
                   mean_zero);
}

std::uint64_t sparse_time(std::uint64_t n, double delta) {
  const double x = std::pow(static_cast<double>(n), 1.0 + delta);
  const double r = std::round(x);
  // pow() may overshoot an exact integer power by an ulp.
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, x)) return static_cast<std::uint64_t>(r);
  return static_cast<std::uint64_t>(std::ceil(x));
}

SparseRateVerdict sparse_rate_check(std::span<const double> path, double delta, double threshold) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("sparse_rate_check: delta must lie in (0, 1)");
  if (path.size() < 2) throw std::invalid_argument("sparse_rate_check: horizon shorter than t_1");
  const std::uint64_t T = path.size() - 1;
  SparseRateVerdict v;
  v.delta = delta;
  for (std::uint64_t n = 1;; ++n) {
    const auto t = sparse_time(n, delta);
    if (t > T) break;
    v.samples.push_back({n, t, std::abs(path[t]) / static_cast<double>(t)});
  }
  v.pass = v.samples.back().ratio <= threshold;
  return v;
}

std::vector<double> queue_path(const Trace& trace, Eigen::Index component) {
  if (!trace.has_records()) throw std::invalid_argument("queue_path: trace has no records");
  const auto K = trace.queue_count();
  std::vector<double> path;
  path.reserve(trace.horizon + 1);
  path.push_back(component < K ? trace.initial.queues(component)
                               : trace.initial.virtual_queues(component - K));
  for (std::uint64_t t = 0; t < trace.horizon; ++t) {
    const auto col = static_cast<Eigen::Index>(t);
    path.push_back(component < K ? trace.queues(component, col)
                                 : trace.virtual_queues(component - K, col));
  }
  return path;
}

DriftConditionVerdict dpp_condition_check(const NetworkModel& model, const DppConfig& config,
                                          std::span<const SystemState> states, double epsilon,
                                          double B) {
  const auto target = compute_y0_opt(model, epsilon);
  if (!target) throw std::domain_error("dpp_condition_check: epsilon beyond epsilon_max");
  config.check();
  const auto dim = static_cast<Eigen::Index>(model.queue_count() + model.constraint_count());
  DppConfig resolved = config;
  if (!resolved.weights) resolved.weights = LyapunovWeights::uniform(dim);
  const auto& w = resolved.weights.values;

  DriftConditionVerdict v;
  v.states = states.size();
  v.epsilon = epsilon;
  v.y0_opt_epsilon = target->objective;
  v.worst_slack = std::numeric_limits<double>::infinity();

  for (const auto& s : states) {
    const double L0 = lyapunov_value(s, resolved.weights);
    double lhs = 0.0;
    for (std::size_t omega = 0; omega < model.event_count(); ++omega) {
      const auto alpha = select_action_dpp(model, omega, s, resolved);
      const auto& o = model.outcome(omega, alpha);
      const SystemState next{queue_update(s.queues, o.arrivals, o.services),
                             virtual_queue_update(s.virtual_queues, o.penalties.tail(s.virtual_queues.size())),
                             s.slot + 1};
      lhs += model.probability(omega) *
             (lyapunov_value(next, resolved.weights) - L0 + config.V * o.penalties(0));
    }
    const double weighted_backlog = w.dot(s.combined().cwiseAbs());
    const double rhs = B + config.C + config.V * target->objective - epsilon * weighted_backlog;
    const double slack = rhs - lhs;
    v.worst_slack = std::min(v.worst_slack, slack);
    if (slack < -1e-9 * std::max({1.0, std::abs(lhs), std::abs(rhs)})) ++v.violations;
  }
  if (states.empty()) v.worst_slack = 0.0;
  return v;
}

}  // namespace dpp
