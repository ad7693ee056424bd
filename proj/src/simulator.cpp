#include "dpp/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>
#include <thread>

#include "dpp/summation.hpp"

namespace dpp {

namespace {

constexpr std::uint64_t kRetentionLimit = 1'000'000;

SystemState resolve_initial(const NetworkModel& model, const RunOptions& options) {
  const auto K = static_cast<Eigen::Index>(model.queue_count());
  const auto M = static_cast<Eigen::Index>(model.constraint_count());
  if (!options.initial) return SystemState::zero(K, M);
  SystemState s = *options.initial;
  if (s.queues.size() != K || s.virtual_queues.size() != M) {
    throw ConfigError("initial state: expected K queues and M virtual queues");
  }
  if (!s.finite()) throw ConfigError("initial state: must be finite");
  if ((s.queues.array() < 0.0).any() || (s.virtual_queues.array() < 0.0).any()) {
    throw ConfigError("initial state: queues must be non-negative");
  }
  s.slot = 0;
  return s;
}

// Per-controller action choice, resolved once before the slot loop.
class ActionChooser {
 public:
  ActionChooser(const NetworkModel& model, const Controller& controller)
      : model_(model), controller_(controller) {
    if (const auto* dpp = std::get_if<DppController>(&controller_)) {
      dpp->config.check();
      config_ = dpp->config;
      const auto dim = static_cast<Eigen::Index>(model.queue_count() + model.constraint_count());
      if (!config_.weights) config_.weights = LyapunovWeights::uniform(dim);
      config_.weights.check(dim);
    } else if (const auto* only = std::get_if<OmegaOnlyController>(&controller_)) {
      only->policy.check(model);
    } else {
      const auto& id = std::get<FixedActionController>(controller_).action_id;
      for (std::size_t w = 0; w < model.event_count(); ++w) {
        try {
          fixed_.push_back(model.action_index(w, id));
        } catch (const std::domain_error& e) {
          throw ConfigError(std::string("action: ") + e.what());
        }
      }
    }
  }

  std::size_t choose(std::size_t omega, const SystemState& state, CounterRng& rng) const {
    switch (controller_.index()) {
      case 0:
        return select_action_dpp(model_, omega, state, config_);
      case 1:
        return select_action_policy(std::get<OmegaOnlyController>(controller_).policy, omega, rng);
      default:
        return fixed_[omega];
    }
  }

  const DppConfig& config() const { return config_; }

 private:
  const NetworkModel& model_;
  const Controller& controller_;
  DppConfig config_;
  std::vector<std::size_t> fixed_;
};

}  // namespace

TraceRecorder::TraceRecorder(Trace& trace, std::uint64_t checkpoint_every, std::size_t batch_count)
    : trace_(trace),
      checkpoint_every_(checkpoint_every > 0 ? checkpoint_every : (trace.horizon + 999) / 1000),
      batches_(std::max<std::uint64_t>(1, std::min<std::uint64_t>(batch_count, trace.horizon))),
      batch_length_(trace.horizon / batches_),
      penalty_sums_(trace.constraint_count() + 1),
      queue_sums_(trace.queue_count()),
      virtual_sums_(trace.constraint_count()) {
  const auto K = trace.queue_count();
  const auto M = trace.constraint_count();
  const auto cols = trace.records_retained ? static_cast<Eigen::Index>(trace.horizon) : 0;
  if (trace.records_retained) {
    trace.omega_index.resize(trace.horizon);
    trace.action_index.resize(trace.horizon);
  }
  trace.arrivals.resize(K, cols);
  trace.services.resize(K, cols);
  trace.penalties.resize(M + 1, cols);
  trace.queues.resize(K, cols);
  trace.virtual_queues.resize(M, cols);
  trace.checkpoints.clear();
  trace.batch_penalty_means.clear();
  trace.batch_backlog_means.clear();
  push_checkpoint(trace.initial);
}

void TraceRecorder::push_checkpoint(const SystemState& state) {
  trace_.checkpoints.push_back({t_, state.queues, state.virtual_queues, penalty_sums_.value(),
                                queue_sums_.value(), virtual_sums_.value()});
}

void TraceRecorder::before_slot(const SystemState& state) {
  pending_backlog_ = state.queues.cwiseAbs().sum() + state.virtual_queues.sum();
  queue_sums_ += state.queues.cwiseAbs();
  virtual_sums_ += state.virtual_queues;
  backlog_sum_ += pending_backlog_;
}

void TraceRecorder::after_slot(std::size_t omega, std::size_t alpha, const SlotOutcome& o,
                               const SystemState& next) {
  const auto t = t_;
  penalty_sums_ += o.penalties;

  if (t < batches_ * batch_length_) {
    batch_penalty_ += o.penalties(0);
    batch_backlog_ += pending_backlog_;
    if ((t + 1) % batch_length_ == 0) {
      const auto n = static_cast<double>(batch_length_);
      trace_.batch_penalty_means.push_back(batch_penalty_.value() / n);
      trace_.batch_backlog_means.push_back(batch_backlog_.value() / n);
      batch_penalty_ = {};
      batch_backlog_ = {};
    }
  }

  if (trace_.records_retained) {
    const auto c = static_cast<Eigen::Index>(t);
    trace_.omega_index[t] = static_cast<std::uint32_t>(omega);
    trace_.action_index[t] = static_cast<std::uint32_t>(alpha);
    trace_.arrivals.col(c) = o.arrivals;
    trace_.services.col(c) = o.services;
    trace_.penalties.col(c) = o.penalties;
    trace_.queues.col(c) = next.queues;
    trace_.virtual_queues.col(c) = next.virtual_queues;
  }

  ++t_;
  if (t_ % checkpoint_every_ == 0 || t_ == trace_.horizon) push_checkpoint(next);
}

void TraceRecorder::finish(const SystemState& final_state) {
  trace_.final_state = final_state;
  trace_.penalty_sums = penalty_sums_.value();
  trace_.queue_sums = queue_sums_.value();
  trace_.virtual_sums = virtual_sums_.value();
  trace_.backlog_sum = backlog_sum_.value();
}

Trace run(const NetworkModel& model, const Controller& controller, const RunOptions& options) {
  if (options.horizon == 0) throw ConfigError("T: horizon must be at least 1");
  const auto T = options.horizon;
  const auto M = static_cast<Eigen::Index>(model.constraint_count());

  const ActionChooser chooser(model, controller);

  Trace trace;
  trace.scenario = model.name();
  trace.controller = controller_kind(controller);
  trace.config = chooser.config();
  trace.seed = options.seed;
  trace.horizon = T;
  trace.initial = resolve_initial(model, options);
  trace.records_retained = options.retain_records.value_or(T <= kRetentionLimit);
  for (std::size_t w = 0; w < model.event_count(); ++w) {
    trace.omega_ids.push_back(model.event(w).id);
    std::vector<std::string> ids;
    for (std::size_t a = 0; a < model.action_count(w); ++a) ids.push_back(model.action(w, a).id);
    trace.action_ids.push_back(std::move(ids));
  }

  TraceRecorder recorder(trace, options.checkpoint_every, options.batch_count);
  SystemState state = trace.initial;
  CounterRng rng(options.seed);

  for (std::uint64_t t = 0; t < T; ++t) {
    recorder.before_slot(state);
    const std::size_t omega = sample_omega(model, rng);
    const std::size_t alpha = chooser.choose(omega, state, rng);
    const SlotOutcome& o = model.outcome(omega, alpha);

    state.queues = queue_update(state.queues, o.arrivals, o.services);
    state.virtual_queues = virtual_queue_update(state.virtual_queues, o.penalties.tail(M));
    state.slot = t + 1;
    recorder.after_slot(omega, alpha, o, state);
  }
  recorder.finish(state);
  return trace;
}

SlotRecord Trace::record(std::uint64_t t) const {
  if (!records_retained) throw std::logic_error("trace: per-slot records were not retained");
  if (t >= horizon) throw std::out_of_range("trace: slot out of range");
  const auto c = static_cast<Eigen::Index>(t);
  const auto w = omega_index[t];
  const auto a = action_index[t];
  return {t,
          omega_ids[w],
          action_ids[w][a],
          {arrivals.col(c), services.col(c), penalties.col(c)},
          queues.col(c),
          virtual_queues.col(c)};
}

SystemState Trace::state(std::uint64_t t) const {
  if (t > horizon) throw std::out_of_range("trace: slot out of range");
  if (t == 0) return initial;
  if (t == horizon) return final_state;
  if (!records_retained) throw std::logic_error("trace: per-slot records were not retained");
  const auto c = static_cast<Eigen::Index>(t - 1);
  return {queues.col(c), virtual_queues.col(c), t};
}

namespace {

double batch_standard_error(const std::vector<double>& means) {
  const auto n = means.size();
  if (n < 2) return 0.0;
  CompensatedSum<double> sum;
  for (double m : means) sum += m;
  const double mean = sum.value() / static_cast<double>(n);
  CompensatedSum<double> ss;
  for (double m : means) ss += (m - mean) * (m - mean);
  return std::sqrt(ss.value() / static_cast<double>(n - 1) / static_cast<double>(n));
}

}  // namespace

RunSummary summarize(const Trace& trace, double B) {
  const double T = static_cast<double>(trace.horizon);
  RunSummary s;
  s.scenario = trace.scenario;
  s.controller = trace.controller;
  s.seed = trace.seed;
  s.horizon = trace.horizon;
  s.V = trace.config.V;
  s.C = trace.config.C;
  s.B = B;
  s.penalty_average = trace.penalty_sums / T;
  s.queue_average = trace.queue_sums / T;
  s.virtual_average = trace.virtual_sums / T;
  s.backlog_average = trace.backlog_sum / T;
  s.queue_terminal_ratio = trace.final_state.queues.cwiseAbs() / T;
  s.virtual_terminal_ratio = trace.final_state.virtual_queues / T;
  s.penalty_standard_error = batch_standard_error(trace.batch_penalty_means);
  s.backlog_standard_error = batch_standard_error(trace.batch_backlog_means);
  return s;
}

double empirical_drift(const Trace& trace, const LyapunovWeights& weights, std::uint64_t t) {
  if (t >= trace.horizon) throw std::out_of_range("empirical_drift: t + 1 beyond trace");
  const SystemState before = trace.state(t);
  const SystemState after = trace.state(t + 1);
  const auto w = weights ? weights : LyapunovWeights::uniform(before.dimension());
  return lyapunov_difference(before, after, w);
}

std::optional<std::uint64_t> replay_mismatch(const Trace& trace) {
  if (!trace.records_retained) throw std::logic_error("replay: per-slot records were not retained");
  Vector q = trace.initial.queues;
  Vector z = trace.initial.virtual_queues;
  for (std::uint64_t t = 0; t < trace.horizon; ++t) {
    const auto c = static_cast<Eigen::Index>(t);
    for (Eigen::Index k = 0; k < q.size(); ++k) {
      q(k) = queue_update(q(k), trace.arrivals(k, c), trace.services(k, c));
      if (q(k) != trace.queues(k, c)) return t;
    }
    for (Eigen::Index m = 0; m < z.size(); ++m) {
      z(m) = virtual_queue_update(z(m), trace.penalties(m + 1, c));
      if (z(m) != trace.virtual_queues(m, c)) return t;
    }
  }
  if (q != trace.final_state.queues || z != trace.final_state.virtual_queues) {
    return trace.horizon - 1;
  }
  return std::nullopt;
}

std::uint64_t sweep_seed(const SweepOptions& options, std::size_t index) {
  return options.seed_policy == SeedPolicy::Common ? options.seed
                                                   : derive_seed(options.seed, index);
}

std::vector<RunSummary> sweep_V(const NetworkModel& model, const std::vector<double>& Vs,
                                const SweepOptions& options) {
  if (Vs.empty()) throw ConfigError("V: sweep needs at least one value");
  const double B = compute_B(model, options.weights);

  auto one = [&](std::size_t i) {
    DppConfig config{Vs[i], options.C, options.weights, TieBreak::LowestIndex};
    RunOptions run_options;
    run_options.horizon = options.horizon;
    run_options.seed = sweep_seed(options, i);
    run_options.retain_records = false;
    run_options.checkpoint_every = options.checkpoint_every;
    run_options.batch_count = options.batch_count;
    return summarize(run(model, DppController{config}, run_options), B);
  };

  std::size_t parallel = options.max_parallel > 0
                             ? options.max_parallel
                             : std::max<std::size_t>(1, std::thread::hardware_concurrency());
  std::vector<RunSummary> out(Vs.size());
  for (std::size_t start = 0; start < Vs.size(); start += parallel) {
    const auto stop = std::min(Vs.size(), start + parallel);
    if (stop - start == 1) {
      out[start] = one(start);
      continue;
    }
    std::vector<std::future<RunSummary>> pending;
    for (std::size_t i = start; i < stop; ++i) pending.push_back(std::async(std::launch::async, one, i));
    for (std::size_t i = start; i < stop; ++i) out[i] = pending[i - start].get();
  }
  return out;
}

}  // namespace dpp
