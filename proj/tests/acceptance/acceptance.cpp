// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Every tolerance is pinned below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <sstream>
#include <string>
#include <vector>

#include "dpp/controller.hpp"
#include "dpp/diagnostics.hpp"
#include "dpp/io.hpp"
#include "dpp/oracle.hpp"
#include "dpp/scenarios.hpp"
#include "dpp/simulator.hpp"
#include "support/brute_force_oracle.hpp"

using namespace dpp;

namespace {

constexpr std::uint64_t kHorizon = 1'000'000;
constexpr std::size_t kSeeds = 8;
constexpr double kSeTolerance = 3.0;          // criteria 1, 3, 5
constexpr double kRuntimeBudget = 60.0;       // seconds, criterion 1
constexpr double kGapRatio = 0.2;             // criterion 2
constexpr double kRateThreshold = 1e-2;       // criteria 4, 5
constexpr double kTailFraction = 0.1;         // criterion 5
constexpr double kTailMultiple = 10.0;        // criterion 5
constexpr double kLlnTolerance = 5e-3;        // criterion 6
constexpr double kLlnShift = 0.3;             // criterion 6
constexpr double kOracleAgreement = 1e-9;     // criterion 7
constexpr double kPolicySe = 5.0;             // criterion 7
constexpr std::size_t kDriftStates = 1000;    // criterion 8
constexpr double kSparseRatio = 1e-3;         // criterion 10
constexpr double kSparseDelta = 0.5;          // criterion 10
constexpr std::uint64_t kSparseN = 100;       // criterion 10

// Frozen oracle constants for power-min.
constexpr double kPowerMinY0Opt = 0.5;
constexpr double kPowerMinB = 0.125;
constexpr double kPowerMinEpsMax = 0.5;
constexpr double kPowerMinY0AtEpsMax = 1.0;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void report(int id, const std::string& title, Verdict& v) {
  std::printf("criterion %2d %s  %s:%s\n", id, v.pass ? "PASS" : "FAIL", title.c_str(), v.detail.str().c_str());
  std::fflush(stdout);
  if (!v.pass) ++failures;
}

RunOptions streaming(std::uint64_t seed, std::uint64_t horizon = kHorizon) {
  RunOptions o;
  o.horizon = horizon;
  o.seed = seed;
  o.retain_records = false;
  return o;
}

Controller dpp(double V, double C = 0.0) { return DppController{{V, C, {}, TieBreak::LowestIndex}}; }

/// Runs `count` seeds in parallel and summarizes each.
std::vector<Trace> ensemble(const NetworkModel& model, const Controller& c, std::size_t count,
                            std::uint64_t root, std::uint64_t horizon, bool retain_first) {
  std::vector<std::future<Trace>> jobs;
  for (std::size_t i = 0; i < count; ++i) {
    RunOptions o = streaming(derive_seed(root, i), horizon);
    o.retain_records = retain_first && i == 0;
    jobs.push_back(std::async(std::launch::async, [&model, &c, o] { return run(model, c, o); }));
  }
  std::vector<Trace> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

struct EnsembleMean {
  double value = 0.0;
  double se = 0.0;  ///< sqrt(sum se_i^2) / n over independent seeds
};

EnsembleMean mean_of(const std::vector<RunSummary>& runs, const std::function<double(const RunSummary&)>& x,
                     const std::function<double(const RunSummary&)>& se) {
  EnsembleMean m;
  double var = 0.0;
  for (const auto& r : runs) {
    m.value += x(r);
    var += se(r) * se(r);
  }
  const double n = static_cast<double>(runs.size());
  m.value /= n;
  m.se = std::sqrt(var) / n;
  return m;
}

struct PowerMinSweep {
  std::vector<double> Vs{1.0, 10.0, 100.0};
  std::vector<std::vector<RunSummary>> runs;
  double seconds = 0.0;
  double B = 0.0;
  OracleValues oracle;
};

PowerMinSweep power_min_sweep() {
  PowerMinSweep s;
  const auto model = scenarios::power_min();
  const auto start = std::chrono::steady_clock::now();
  s.B = compute_B(model);
  s.oracle = *oracle_values(model);
  for (double V : s.Vs) {
    const Controller c = dpp(V);
    std::vector<RunSummary> row;
    for (const auto& t : ensemble(model, c, kSeeds, 1000 + static_cast<std::uint64_t>(V), kHorizon, false)) {
      row.push_back(summarize(t, s.B));
    }
    s.runs.push_back(std::move(row));
  }
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return s;
}

double penalty(const RunSummary& r) { return r.penalty_average(0); }
double penalty_se(const RunSummary& r) { return r.penalty_standard_error; }
double backlog(const RunSummary& r) { return r.backlog_average; }
double backlog_se(const RunSummary& r) { return r.backlog_standard_error; }

void criterion1(const PowerMinSweep& s) {
  Verdict v;
  v.require(std::abs(s.oracle.y0_opt - kPowerMinY0Opt) <= 1e-12, "oracle y0_opt = 0.5");
  v.require(s.B == kPowerMinB, "B = 0.125");
  for (std::size_t i = 0; i < s.Vs.size(); ++i) {
    const auto m = mean_of(s.runs[i], penalty, penalty_se);
    const double cap = kPowerMinY0Opt + kPowerMinB / s.Vs[i];
    v.detail << " V=" << s.Vs[i] << " ybar0=" << m.value << " cap=" << cap << "+" << kSeTolerance * m.se << ";";
    v.require(m.value <= cap + kSeTolerance * m.se, "penalty cap at V=" + std::to_string(s.Vs[i]));
  }
  v.detail << " runtime " << s.seconds << " s";
  v.require(s.seconds < kRuntimeBudget, "runtime budget");
  report(1, "penalty within B/V of y0_opt (power-min, 8 seeds, T=1e6)", v);
}

void criterion2(const PowerMinSweep& s) {
  Verdict v;
  const double gap1 = mean_of(s.runs.front(), penalty, penalty_se).value - kPowerMinY0Opt;
  const double gap100 = mean_of(s.runs.back(), penalty, penalty_se).value - kPowerMinY0Opt;
  v.detail << " gap(V=1)=" << gap1 << " gap(V=100)=" << gap100 << " (signed)";
  v.require(gap100 <= kGapRatio * gap1, "gap(100) <= 0.2 gap(1)");
  report(2, "penalty gap decays with V", v);
}

void criterion3(const PowerMinSweep& s) {
  Verdict v;
  v.require(std::abs(s.oracle.epsilon_max - kPowerMinEpsMax) <= 1e-12, "eps_max = 0.5");
  v.require(std::abs(s.oracle.y0_opt_at_epsilon_max - kPowerMinY0AtEpsMax) <= 1e-12, "y0_opt(eps_max) = 1");
  for (std::size_t i = 0; i < s.Vs.size(); ++i) {
    const double V = s.Vs[i];
    const auto q = mean_of(s.runs[i], backlog, backlog_se);
    const auto y = mean_of(s.runs[i], penalty, penalty_se);
    const double cap = (kPowerMinB + V * (kPowerMinY0AtEpsMax - 0.0)) / kPowerMinEpsMax;
    const double sharper = (kPowerMinB + V * (kPowerMinY0AtEpsMax - y.value)) / kPowerMinEpsMax;
    v.detail << " V=" << V << " backlog=" << q.value << " cap=" << cap << " sharper=" << sharper << ";";
    v.require(q.value <= cap + kSeTolerance * q.se, "backlog cap at V=" + std::to_string(V));
    v.require(q.value <= sharper + kSeTolerance * q.se, "sharper cap at V=" + std::to_string(V));
    for (const auto& r : s.runs[i]) {
      const auto b = verify_bounds(r, s.oracle, s.B, 0.0, BoundTolerance::standard_errors(r, kSeTolerance));
      v.require(b.pass() && b.sharper_backlog_pass, "per-seed bound report");
    }
  }
  report(3, "backlog within the O(V) cap and its observed-penalty variant", v);
}

void criterion4() {
  Verdict v;
  const auto model = scenarios::constrained_2q();
  const auto trace = run(model, dpp(10.0), streaming(4));
  for (const auto& c : constraint_satisfaction(summarize(trace, compute_B(model)), kRateThreshold)) {
    v.detail << " m=" << c.m << " Z(T)/T=" << c.terminal_ratio << " ybar=" << c.penalty_average << ";";
    v.require(c.pass, "Z(T)/T <= 1e-2");
    v.require(c.penalty_average <= kRateThreshold, "ybar_m <= 1e-2");
  }
  report(4, "time-average constraints hold (constrained-2q, V=10, T=1e6)", v);
}

void criterion5() {
  Verdict v;
  const auto model = scenarios::constrained_2q();
  const double B = compute_B(model);
  const auto oracle = *oracle_values(model);
  const double cap = B / oracle.epsilon_max;
  const auto traces = ensemble(model, dpp(0.0), kSeeds, 55, kHorizon, true);
  std::vector<RunSummary> all;
  for (const auto& t : traces) all.push_back(summarize(t, B));

  // Tail threshold is 10x each queue's own average, never above 10x the
  // combined backlog, so the fraction can only be larger than required.
  const auto stab = stability_metrics(std::span<const Trace>(traces), {kTailMultiple});
  const auto& first = all.front();
  double path_tail = 0.0;
  double path_ratio = 0.0;
  for (const auto& q : stab.queues) {
    path_tail = std::max(path_tail, q.tail.front().fraction);
    path_ratio = std::max(path_ratio, q.terminal_ratio);
  }
  v.detail << " path: backlog=" << first.backlog_average << " cap=" << cap << " tail=" << path_tail
           << " max|Q(T)|/T=" << path_ratio << ";";
  v.require(first.backlog_average <= cap + kSeTolerance * first.backlog_standard_error, "sample-path backlog");
  v.require(path_tail <= kTailFraction, "sample-path tail fraction");
  v.require(path_ratio <= kRateThreshold, "sample-path rate stability");

  const auto mean_backlog = mean_of(all, backlog, backlog_se);
  double ens_tail = 0.0;
  double ens_ratio = 0.0;
  for (const auto& e : stab.ensemble) {
    ens_tail = std::max(ens_tail, e.mean_tail.front().fraction);
    ens_ratio = std::max(ens_ratio, e.mean_terminal_ratio);
  }
  v.detail << " ensemble: backlog=" << mean_backlog.value << " tail=" << ens_tail << " E|Q(T)|/T=" << ens_ratio;
  v.require(mean_backlog.value <= cap + kSeTolerance * mean_backlog.se, "ensemble backlog");
  v.require(ens_tail <= kTailFraction, "ensemble tail fraction");
  v.require(ens_ratio <= kRateThreshold, "mean rate stability");
  report(5, "drift-only (V=0) stability in all six forms (constrained-2q)", v);
}

void criterion6() {
  Verdict v;
  CounterRng rng(6);
  std::vector<double> x(kHorizon);
  for (auto& xi : x) xi = (rng.next_u64() >> 63) ? 1.0 : -1.0;
  const auto fair = lln_check(x, 0.0, kLlnTolerance, true);
  for (auto& xi : x) xi += kLlnShift;
  const auto shifted = lln_check(x, kLlnShift, kLlnTolerance, false);
  v.detail << " |mean|=" << std::abs(fair.terminal_mean) << " shifted mean=" << shifted.terminal_mean;
  v.require(fair.pass && std::abs(fair.terminal_mean) <= kLlnTolerance, "fair coin");
  v.require(shifted.pass && shifted.terminal_mean <= kLlnShift + kLlnTolerance, "shifted coin");
  report(6, "strong-law checker on Rademacher differences", v);
}

void criterion7() {
  Verdict v;
  for (const auto& model : scenarios::corpus()) {
    if (model.event_count() > 3 || model.max_action_count() > 4) continue;
    const auto lp_emax = compute_epsilon_max(model);
    const auto bf_emax = testing::brute_force_epsilon_max(model);
    v.require(lp_emax && bf_emax && std::abs(lp_emax->epsilon - *bf_emax) <= kOracleAgreement,
              model.name() + " eps_max");
    double worst = 0.0;
    for (int i = 0; i <= 10; ++i) {
      const double eps = lp_emax ? lp_emax->epsilon * i / 10.0 : 0.0;
      const auto lp = compute_y0_opt(model, eps);
      const auto bf = testing::brute_force_y0_opt(model, eps);
      v.require(lp.has_value() == bf.has_value(), model.name() + " feasibility");
      if (lp && bf) worst = std::max(worst, std::abs(lp->objective - *bf));
    }
    v.require(worst <= kOracleAgreement, model.name() + " y0_opt agreement");

    const auto opt = compute_y0_opt(model, 0.0);
    const auto trace = run(model, OmegaOnlyController{opt->policy}, streaming(77));
    const auto s = summarize(trace, compute_B(model));
    const double z = std::abs(s.penalty_average(0) - opt->objective) / s.penalty_standard_error;
    v.detail << " " << model.name() << ": |LP-brute|=" << worst << " sim z=" << z << ";";
    v.require(z <= kPolicySe, model.name() + " simulated policy");
  }
  report(7, "oracle LP matches brute-force enumeration and simulation", v);
}

void criterion8() {
  Verdict v;
  std::size_t violations = 0;
  std::size_t checked = 0;
  for (const auto& model : scenarios::corpus()) {
    const double B = compute_B(model);
    const auto emax = compute_epsilon_max(model)->epsilon;
    CounterRng rng(derive_seed(8, checked));
    for (double V : {0.0, 1.0, 10.0, 100.0}) {
      std::vector<SystemState> states;
      for (std::size_t i = 0; i < kDriftStates; ++i) {
        auto s = SystemState::zero(static_cast<Eigen::Index>(model.queue_count()),
                                   static_cast<Eigen::Index>(model.constraint_count()));
        const double scale = 10.0 * (V + 1.0) * rng.uniform();
        for (Eigen::Index k = 0; k < s.queues.size(); ++k) s.queues(k) = scale * rng.uniform();
        for (Eigen::Index m = 0; m < s.virtual_queues.size(); ++m) s.virtual_queues(m) = scale * rng.uniform();
        states.push_back(s);
      }
      for (double C : {0.0, 0.5}) {
        for (double frac : {0.0, 0.5, 1.0}) {
          const auto r = dpp_condition_check(model, {V, C, {}, TieBreak::LowestIndex}, states, frac * emax, B);
          violations += r.violations;
          checked += r.states;
        }
      }
    }
  }
  v.detail << " states checked=" << checked << " violations=" << violations;
  v.require(checked >= 3 * kDriftStates && violations == 0, "no violations");
  report(8, "conditional drift-plus-penalty inequality by exact enumeration", v);
}

void criterion9() {
  Verdict v;
  for (const auto& model : scenarios::corpus()) {
    RunOptions o;
    o.horizon = 200000;
    o.seed = 909;
    o.retain_records = true;
    const auto a = run(model, dpp(10.0), o);
    const auto b = run(model, dpp(10.0), o);
    std::ostringstream ca, cb;
    io::write_trace_csv(a, ca);
    io::write_trace_csv(b, cb);
    v.require(ca.str() == cb.str() && a.queues == b.queues && a.virtual_queues == b.virtual_queues,
              model.name() + " identical traces");
    v.require(!replay_mismatch(a).has_value(), model.name() + " replay");
    std::istringstream in(ca.str());
    const auto back = io::read_trace_csv(in, model, a.initial);
    v.require(!replay_mismatch(back).has_value() && back.queues == a.queues, model.name() + " CSV replay");
  }
  v.detail << " 3 scenarios, T=2e5, bit-identical CSV and exact replay";
  report(9, "determinism and replay", v);
}

void criterion10() {
  Verdict v;
  const std::uint64_t T = sparse_time(kSparseN, kSparseDelta);
  std::vector<double> bounded(T + 1), linear(T + 1);
  for (std::uint64_t t = 0; t <= T; ++t) {
    bounded[t] = static_cast<double>(t) / static_cast<double>(t + 1);
    linear[t] = static_cast<double>(t);
  }
  const auto ok = sparse_rate_check(bounded, kSparseDelta, kSparseRatio);
  bool monotone = true;
  for (std::size_t i = 1; i < ok.samples.size(); ++i) monotone = monotone && ok.samples[i].ratio < ok.samples[i - 1].ratio;
  const auto& last = ok.samples.back();
  v.detail << " bounded: n=" << last.n << " t=" << last.t << " ratio=" << last.ratio;
  v.require(last.n == kSparseN && monotone && last.ratio < kSparseRatio && ok.pass, "bounded trace");
  const auto bad = sparse_rate_check(linear, kSparseDelta, kSparseRatio);
  const bool all_one = std::all_of(bad.samples.begin(), bad.samples.end(), [](const auto& s) { return s.ratio == 1.0; });
  v.detail << "; Q(t)=t ratios all 1: " << (all_one ? "yes" : "no");
  v.require(all_one && !bad.pass, "linear trace fails");
  report(10, "sparse-subsequence rate diagnostic", v);
}

}  // namespace

int main() {
  const auto sweep = power_min_sweep();
  criterion1(sweep);
  criterion2(sweep);
  criterion3(sweep);
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
