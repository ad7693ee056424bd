#include "dpp/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "dpp/controller.hpp"
#include "dpp/diagnostics.hpp"
#include "dpp/io.hpp"
#include "dpp/model.hpp"
#include "dpp/oracle.hpp"
#include "dpp/random.hpp"
#include "dpp/scenarios.hpp"
#include "dpp/simulator.hpp"

namespace dpp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

nlohmann::json ExperimentConfig::to_json() const {
  return {{"scenario", scenario},
          {"controller", controller},
          {"V", V},
          {"C", C},
          {"T", T},
          {"seed", seed},
          {"ensemble", ensemble},
          {"out", out},
          {"trace", write_trace},
          {"checkpoint_every", checkpoint_every},
          {"action", action},
          {"epsilon", epsilon},
          {"crn", common_random_numbers},
          {"eps_grid", epsilon_grid},
          {"trace_file", trace_file},
          {"summary_file", summary_file},
          {"rate_threshold", rate_threshold},
          {"constraint_threshold", constraint_threshold},
          {"tolerance_se", tolerance_se}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  ExperimentConfig c;
  for (const auto& [key, value] : doc.items()) {
    try {
      if (key == "scenario") c.scenario = value.get<std::string>();
      else if (key == "controller") c.controller = value.get<std::string>();
      else if (key == "V") c.V = value.is_array() ? value.get<std::vector<double>>() : std::vector<double>{value.get<double>()};
      else if (key == "C") c.C = value.get<double>();
      else if (key == "T") c.T = value.get<std::uint64_t>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "ensemble") c.ensemble = value.get<std::size_t>();
      else if (key == "out") c.out = value.get<std::string>();
      else if (key == "trace") c.write_trace = value.get<bool>();
      else if (key == "checkpoint_every") c.checkpoint_every = value.get<std::uint64_t>();
      else if (key == "action") c.action = value.get<std::string>();
      else if (key == "epsilon") c.epsilon = value.get<double>();
      else if (key == "crn") c.common_random_numbers = value.get<bool>();
      else if (key == "eps_grid") c.epsilon_grid = value.get<std::vector<double>>();
      else if (key == "trace_file") c.trace_file = value.get<std::string>();
      else if (key == "summary_file") c.summary_file = value.get<std::string>();
      else if (key == "rate_threshold") c.rate_threshold = value.get<double>();
      else if (key == "constraint_threshold") c.constraint_threshold = value.get<double>();
      else if (key == "tolerance_se") c.tolerance_se = value.get<double>();
      else throw ConfigError("config: unknown field '" + key + "'");
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config: field '" + key + "' has the wrong type (" + e.what() + ")");
    }
  }
  return c;
}

namespace {

/// Resolved config plus the streams a command reports to.
struct Context {
  ExperimentConfig config;
  std::ostream& out;
  std::ostream& err;
};

void require_finite_nonneg(double x, const std::string& field) {
  if (!std::isfinite(x) || x < 0) throw ConfigError("config: '" + field + "' must be finite and >= 0");
}

void validate(const ExperimentConfig& c) {
  if (c.scenario.empty()) throw ConfigError("config: 'scenario' is required");
  for (double v : c.V) require_finite_nonneg(v, "V");
  if (c.V.empty()) throw ConfigError("config: 'V' is empty");
  require_finite_nonneg(c.C, "C");
  require_finite_nonneg(c.epsilon, "epsilon");
  if (c.T < 1) throw ConfigError("config: 'T' must be >= 1");
  if (c.ensemble < 1) throw ConfigError("config: 'ensemble' must be >= 1");
  if (c.controller != "dpp" && c.controller != "omega-only" && c.controller != "fixed-action") {
    throw ConfigError("config: 'controller' must be dpp, omega-only or fixed-action");
  }
  if (c.controller == "fixed-action" && c.action.empty()) {
    throw ConfigError("config: 'action' is required for the fixed-action controller");
  }
  if (!(c.tolerance_se >= 0) || !(c.rate_threshold > 0) || !(c.constraint_threshold > 0)) {
    throw ConfigError("config: thresholds must be positive");
  }
}

NetworkModel load(const ExperimentConfig& c) {
  if (c.scenario.empty()) throw ConfigError("config: 'scenario' is required");
  return io::load_scenario(c.scenario);
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("out: cannot write '" + path.string() + "'");
  f << text;
}

fs::path output_dir(const ExperimentConfig& c) {
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec) throw ConfigError("out: cannot create '" + c.out + "': " + ec.message());
  return c.out;
}

json stamped(json doc, const std::string& hash, std::uint64_t seed) {
  doc["scenario_hash"] = hash;
  doc["seed"] = seed;
  return doc;
}

json oracle_document(const NetworkModel& model, const std::string& hash,
                     const std::vector<double>& grid) {
  json doc{{"scenario", model.name()}, {"scenario_hash", hash}};
  const auto emax = compute_epsilon_max(model);
  if (!emax) {
    doc["feasible"] = false;
    return doc;
  }
  doc["feasible"] = true;
  doc["y0_min"] = model.y0_min();
  doc["epsilon_max"] = emax->epsilon;
  const auto base = compute_y0_opt(model, 0.0);
  const auto at_max = compute_y0_opt(model, emax->epsilon);
  doc["y0_opt"] = base->objective;
  doc["y0_opt_at_epsilon_max"] = at_max ? at_max->objective : emax->objective;
  doc["epsilon_max_policy"] = io::to_json(emax->policy, model);

  std::vector<double> points = grid.empty() ? std::vector<double>{0.0} : grid;
  json curve = json::array();
  for (double eps : points) {
    if (!(eps >= 0) || !std::isfinite(eps)) throw ConfigError("eps_grid: values must be finite and >= 0");
    const auto sol = compute_y0_opt(model, eps);
    json point{{"epsilon", eps}};
    if (sol) {
      point["y0_opt"] = sol->objective;
      point["policy"] = io::to_json(sol->policy, model);
    } else {
      point["y0_opt"] = nullptr;
    }
    curve.push_back(std::move(point));
  }
  doc["curve"] = std::move(curve);
  return doc;
}

/// Loads `oracle-<hash>.json` from the output directory, computing and
/// caching it when absent.
std::optional<OracleValues> cached_oracle(const NetworkModel& model, const std::string& hash,
                                          const fs::path& dir) {
  const fs::path path = dir / ("oracle-" + hash + ".json");
  json doc;
  if (std::ifstream in(path); in) {
    try {
      in >> doc;
    } catch (const json::exception&) {
      doc = json();
    }
  }
  if (!doc.is_object() || !doc.contains("feasible") || doc.value("scenario_hash", "") != hash) {
    doc = oracle_document(model, hash, {});
    write_file(path, doc.dump(2) + "\n");
  }
  if (!doc["feasible"].get<bool>()) return std::nullopt;
  return OracleValues{doc["y0_opt"].get<double>(), doc["epsilon_max"].get<double>(),
                      doc["y0_opt_at_epsilon_max"].get<double>(), doc["y0_min"].get<double>()};
}

Controller make_controller(const ExperimentConfig& c, const NetworkModel& model, double V) {
  if (c.controller == "dpp") return DppController{DppConfig{V, c.C, {}, TieBreak::LowestIndex}};
  if (c.controller == "fixed-action") {
    for (std::size_t w = 0; w < model.event_count(); ++w) {
      try {
        (void)model.action_index(w, c.action);
      } catch (const std::domain_error&) {
        throw ConfigError("config: 'action' '" + c.action + "' is missing under event '" +
                          model.event(w).id + "'");
      }
    }
    return FixedActionController{c.action};
  }
  const auto sol = compute_y0_opt(model, c.epsilon);
  if (!sol) throw ConfigError("config: 'epsilon' exceeds what any event-only policy achieves");
  return OmegaOnlyController{sol->policy};
}

std::uint64_t ensemble_seed(std::uint64_t root, std::size_t i) {
  return i == 0 ? root : derive_seed(root, i);
}

bool rate_stable(const RunSummary& s, double threshold) {
  return (s.queue_terminal_ratio.array() <= threshold).all() &&
         (s.virtual_terminal_ratio.array() <= threshold).all();
}

int cmd_run(Context& ctx) {
  const auto& c = ctx.config;
  validate(c);
  if (c.V.size() != 1) throw ConfigError("config: 'run' takes a single V; use 'sweep' for a list");
  const NetworkModel model = load(c);
  const std::string hash = io::content_hash(model);
  const fs::path dir = output_dir(c);
  const double V = c.V.front();
  const Controller controller = make_controller(c, model, V);
  const double B = compute_B(model);
  const std::optional<OracleValues> oracle =
      c.controller == "dpp" ? cached_oracle(model, hash, dir) : std::nullopt;

  RunOptions options;
  options.horizon = c.T;
  options.checkpoint_every = c.checkpoint_every;

  std::vector<Trace> traces(c.ensemble);
  const std::size_t lanes = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  for (std::size_t start = 0; start < c.ensemble; start += lanes) {
    std::vector<std::future<Trace>> jobs;
    for (std::size_t i = start; i < std::min(c.ensemble, start + lanes); ++i) {
      RunOptions o = options;
      o.seed = ensemble_seed(c.seed, i);
      // Only the root seed keeps per-slot records; the rest stream.
      o.retain_records = i == 0 && (c.write_trace || c.T <= 1'000'000);
      jobs.push_back(std::async(std::launch::async, [&model, &controller, o] { return run(model, controller, o); }));
    }
    for (std::size_t i = 0; i < jobs.size(); ++i) traces[start + i] = jobs[i].get();
  }

  bool pass = true;
  json summaries = json::array();
  json bound_docs = json::array();
  json constraint_docs = json::array();
  std::optional<BoundReport> first_bounds;
  std::vector<ConstraintVerdict> first_constraints;
  RunSummary first_summary;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const Trace& trace = traces[i];
    const RunSummary summary = summarize(trace, B);
    if (!rate_stable(summary, c.rate_threshold)) pass = false;
    const auto constraints = constraint_satisfaction(summary, c.constraint_threshold);
    for (const auto& v : constraints) pass = pass && v.pass;
    std::optional<BoundReport> bounds;
    if (oracle) {
      bounds = verify_bounds(summary, oracle, B, c.C, BoundTolerance::standard_errors(summary, c.tolerance_se));
      pass = pass && bounds->pass();
      bound_docs.push_back(stamped(io::to_json(*bounds), hash, trace.seed));
    }
    json sdoc = stamped(io::to_json(summary), hash, trace.seed);
    sdoc["initial"] = io::to_json(trace.initial);
    summaries.push_back(std::move(sdoc));
    constraint_docs.push_back(stamped(json{{"constraints", io::to_json(constraints)}}, hash, trace.seed));
    if (i == 0) {
      first_summary = summary;
      first_bounds = bounds;
      first_constraints = constraints;
    }
    if (c.write_trace && i == 0) {
      std::ostringstream csv;
      csv << "# scenario_hash=" << hash << " seed=" << trace.seed << '\n';
      io::write_trace_csv(trace, csv);
      write_file(dir / "trace.csv", csv.str());
    }
  }

  const StabilityReport stability =
      traces.size() == 1 ? stability_metrics(traces.front()) : stability_metrics(std::span<const Trace>(traces));
  const json summary_doc = traces.size() == 1 ? summaries.front() : json{{"scenario_hash", hash}, {"seed", c.seed}, {"runs", summaries}};
  write_file(dir / "summary.json", summary_doc.dump(2) + "\n");
  write_file(dir / "stability.json", stamped(io::to_json(stability), hash, c.seed).dump(2) + "\n");
  if (oracle) {
    write_file(dir / "bounds.json", (traces.size() == 1 ? bound_docs.front() : json{{"scenario_hash", hash}, {"seed", c.seed}, {"runs", bound_docs}}).dump(2) + "\n");
  }
  write_file(dir / "constraints.json", json{{"scenario_hash", hash}, {"seed", c.seed}, {"runs", constraint_docs}}.dump(2) + "\n");
  std::ostringstream tail;
  tail << "# scenario_hash=" << hash << " seed=" << c.seed << '\n';
  io::write_tail_csv(stability, tail);
  write_file(dir / "tail.csv", tail.str());
  write_file(dir / "config.json", c.to_json().dump(2) + "\n");

  std::string text = io::render_text(first_summary, stability, first_bounds, first_constraints);
  std::ostringstream report;
  report << "scenario_hash " << hash << '\n' << text;
  for (const auto& e : stability.ensemble) {
    report << "  ensemble (" << e.seeds << " seeds): mean time-avg " << e.mean_time_average
           << ", mean |Q(T)|/T " << e.mean_terminal_ratio << '\n';
  }
  if (oracle && traces.size() > 1) {
    const auto passed = std::count_if(bound_docs.begin(), bound_docs.end(),
                                      [](const json& b) { return b["pass"].get<bool>(); });
    report << "  bounds: " << passed << " of " << bound_docs.size() << " seeds pass\n";
  }
  if (c.controller == "dpp" && !oracle) report << "  bounds: scenario infeasible, not checked\n";
  report << (pass ? "PASS" : "FAIL") << '\n';
  write_file(dir / "report.txt", report.str());
  ctx.out << report.str();
  return pass ? kPass : kCheckFailed;
}

int cmd_sweep(Context& ctx) {
  auto c = ctx.config;
  std::vector<double> Vs;
  for (double v : c.V) {
    if (std::find(Vs.begin(), Vs.end(), v) != Vs.end()) {
      ctx.err << "warning: duplicate V " << v << " dropped\n";
    } else {
      Vs.push_back(v);
    }
  }
  c.V = Vs;
  validate(c);
  if (Vs.size() < 2) throw ConfigError("config: 'sweep' needs at least two distinct V values");
  if (c.controller != "dpp") throw ConfigError("config: 'sweep' runs the dpp controller only");
  const NetworkModel model = load(c);
  const std::string hash = io::content_hash(model);
  const fs::path dir = output_dir(c);
  const auto oracle = cached_oracle(model, hash, dir);
  const double B = compute_B(model);

  SweepOptions options;
  options.horizon = c.T;
  options.seed = c.seed;
  options.seed_policy = c.common_random_numbers ? SeedPolicy::Common : SeedPolicy::Derived;
  options.C = c.C;
  options.checkpoint_every = c.checkpoint_every;
  const auto summaries = sweep_V(model, Vs, options);

  bool pass = true;
  std::ostringstream csv;
  csv << "# scenario_hash=" << hash << " seed=" << c.seed << '\n';
  csv << "V,seed,ybar0,gap,penalty_cap,avg_backlog,backlog_cap,sharper_backlog_cap,penalty_pass,backlog_pass\n";
  json runs = json::array();
  std::ostringstream table;
  table << "scenario_hash " << hash << "  seed " << c.seed << '\n';
  table << std::setw(10) << "V" << std::setw(16) << "ybar0" << std::setw(16) << "gap" << std::setw(16)
        << "avg backlog" << std::setw(16) << "backlog cap" << "  verdict\n";
  auto cell = [](const std::optional<double>& x) { return x ? io::format_double(*x) : std::string(); };
  for (const auto& s : summaries) {
    if (!rate_stable(s, c.rate_threshold)) pass = false;
    json run = stamped(io::to_json(s), hash, s.seed);
    std::optional<BoundReport> bounds;
    std::optional<double> gap;
    if (oracle) {
      bounds = verify_bounds(s, oracle, B, c.C, BoundTolerance::standard_errors(s, c.tolerance_se));
      pass = pass && bounds->pass();
      gap = s.penalty_average(0) - oracle->y0_opt;
      run["bounds"] = io::to_json(*bounds);
    }
    runs.push_back(std::move(run));
    csv << io::format_double(s.V) << ',' << s.seed << ',' << io::format_double(s.penalty_average(0)) << ','
        << cell(gap) << ',' << (bounds ? cell(bounds->penalty_cap) : "") << ','
        << io::format_double(s.backlog_average) << ',' << (bounds ? cell(bounds->backlog_cap) : "") << ','
        << (bounds ? cell(bounds->sharper_backlog_cap) : "") << ','
        << (bounds ? (bounds->penalty_pass ? "1" : "0") : "") << ','
        << (bounds ? (bounds->backlog_pass ? "1" : "0") : "") << '\n';
    table << std::setw(10) << s.V << std::setw(16) << s.penalty_average(0) << std::setw(16)
          << (gap ? *gap : std::nan("")) << std::setw(16) << s.backlog_average << std::setw(16)
          << (bounds && bounds->backlog_cap ? *bounds->backlog_cap : std::nan("")) << "  "
          << (bounds ? (bounds->pass() ? "PASS" : "FAIL") : "n/a") << '\n';
  }
  if (!oracle) table << "bounds: scenario infeasible, not checked\n";
  table << (pass ? "PASS" : "FAIL") << '\n';
  write_file(dir / "sweep.csv", csv.str());
  write_file(dir / "sweep.json", json{{"scenario_hash", hash}, {"seed", c.seed}, {"runs", runs}}.dump(2) + "\n");
  write_file(dir / "config.json", c.to_json().dump(2) + "\n");
  ctx.out << table.str();
  return pass ? kPass : kCheckFailed;
}

int cmd_oracle(Context& ctx) {
  const auto& c = ctx.config;
  const NetworkModel model = load(c);
  const std::string hash = io::content_hash(model);
  const json doc = oracle_document(model, hash, c.epsilon_grid);
  const fs::path dir = output_dir(c);
  write_file(dir / ("oracle-" + hash + ".json"), doc.dump(2) + "\n");
  if (!doc["feasible"].get<bool>()) {
    ctx.out << "infeasible\n";
    return kPass;
  }
  ctx.out << doc.dump(2) << '\n';
  return kPass;
}

int cmd_verify(Context& ctx, bool V_given) {
  const auto& c = ctx.config;
  if (c.trace_file.empty()) throw ConfigError("config: 'trace_file' is required for verify");
  const NetworkModel model = load(c);
  const std::string hash = io::content_hash(model);
  SystemState initial = SystemState::zero(static_cast<Eigen::Index>(model.queue_count()),
                                          static_cast<Eigen::Index>(model.constraint_count()));
  bool check_bounds = V_given;
  double V = c.V.front();
  double C = c.C;
  std::uint64_t seed = c.seed;
  if (!c.summary_file.empty()) {
    std::ifstream in(c.summary_file);
    if (!in) throw ConfigError("summary_file: cannot open '" + c.summary_file + "'");
    json doc;
    try {
      in >> doc;
      if (doc.contains("initial")) initial = io::state_from_json(doc["initial"]);
      if (!check_bounds && doc.value("controller", "") == "dpp") {
        V = doc.at("V").get<double>();
        check_bounds = true;
      }
      if (doc.contains("C")) C = doc["C"].get<double>();
      seed = doc.value("seed", seed);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("summary_file: ") + e.what());
    }
  }
  if (check_bounds) require_finite_nonneg(V, "V");

  std::ifstream in(c.trace_file);
  if (!in) throw ConfigError("trace_file: cannot open '" + c.trace_file + "'");
  Trace trace = io::read_trace_csv(in, model, initial);
  trace.seed = seed;
  const double B = compute_B(model);
  RunSummary summary = summarize(trace, B);
  if (check_bounds) {
    summary.V = V;
    summary.C = C;
  }

  bool pass = true;
  json doc{{"scenario", model.name()}, {"scenario_hash", hash}, {"seed", seed}, {"T", trace.horizon}};
  const auto mismatch = replay_mismatch(trace);
  doc["replay_exact"] = !mismatch.has_value();
  if (mismatch) {
    doc["replay_first_mismatch"] = *mismatch;
    pass = false;
  }
  const StabilityReport stability = stability_metrics(trace);
  doc["stability"] = io::to_json(stability);
  pass = pass && rate_stable(summary, c.rate_threshold);
  const auto constraints = constraint_satisfaction(summary, c.constraint_threshold);
  for (const auto& v : constraints) pass = pass && v.pass;
  doc["constraints"] = io::to_json(constraints);
  if (trace.horizon >= 1000) {
    const auto moments = moment_checks(trace, model);
    doc["moments"] = io::to_json(moments);
    pass = pass && moments.pass();
  }
  std::optional<BoundReport> bounds;
  if (check_bounds) {
    const auto oracle = oracle_values(model);
    if (oracle) {
      bounds = verify_bounds(summary, oracle, B, C, BoundTolerance::standard_errors(summary, c.tolerance_se));
      doc["bounds"] = io::to_json(*bounds);
      pass = pass && bounds->pass();
    }
  }
  doc["pass"] = pass;
  const fs::path dir = output_dir(c);
  write_file(dir / "verify.json", doc.dump(2) + "\n");
  ctx.out << "scenario_hash " << hash << '\n'
          << io::render_text(summary, stability, bounds, constraints)
          << "  replay: " << (mismatch ? "MISMATCH at slot " + std::to_string(*mismatch) : std::string("exact")) << '\n'
          << (pass ? "PASS" : "FAIL") << '\n';
  return pass ? kPass : kCheckFailed;
}

int cmd_fixtures(Context& ctx) {
  const fs::path dir = output_dir(ctx.config);
  json index = json::object();
  for (const auto& model : scenarios::corpus()) {
    const fs::path path = dir / (model.name() + ".json");
    io::save_scenario(model, path);
    index[model.name()] = {{"file", path.filename().string()}, {"scenario_hash", io::content_hash(model)}};
    ctx.out << path.string() << "  " << io::content_hash(model) << '\n';
  }
  write_file(dir / "corpus.json", index.dump(2) + "\n");
  return kPass;
}

/// Flag storage for one subcommand; values are copied into the config only
/// when the flag was given.
struct Flags {
  ExperimentConfig v;
  std::string config_path;
};

void add_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config_path, "JSON experiment config; flags override its fields");
  sub->add_option("--scenario", f.v.scenario, "Scenario JSON file");
  sub->add_option("--controller", f.v.controller, "dpp | omega-only | fixed-action");
  sub->add_option("--V", f.v.V, "Penalty weight V (a list for sweep)")->delimiter(',');
  sub->add_option("--C", f.v.C, "Additive approximation slack");
  sub->add_option("--T", f.v.T, "Horizon in slots");
  sub->add_option("--seed", f.v.seed, "Root seed");
  sub->add_option("--out", f.v.out, "Output directory");
  sub->add_option("--ensemble", f.v.ensemble, "Number of seeds");
  sub->add_option("--checkpoint-every", f.v.checkpoint_every, "Checkpoint cadence in slots (0: T/1000)");
  sub->add_flag("--trace", f.v.write_trace, "Write the per-slot trace CSV");
  sub->add_option("--action", f.v.action, "Action id for the fixed-action controller");
  sub->add_option("--epsilon", f.v.epsilon, "Slack of the omega-only policy");
  sub->add_flag("--crn", f.v.common_random_numbers, "Common random numbers across a sweep");
  sub->add_option("--eps-grid", f.v.epsilon_grid, "Epsilon grid for the oracle curve")->delimiter(',');
  sub->add_option("--trace-file", f.v.trace_file, "Trace CSV to verify");
  sub->add_option("--summary", f.v.summary_file, "Run summary JSON accompanying the trace");
  sub->add_option("--tolerance-se", f.v.tolerance_se, "Bound tolerance in batch-means standard errors");
}

ExperimentConfig resolve(const CLI::App* sub, const Flags& f) {
  ExperimentConfig c;
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) throw ConfigError("config: cannot open '" + f.config_path + "'");
    json doc;
    try {
      in >> doc;
    } catch (const json::exception& e) {
      throw ConfigError("config: '" + f.config_path + "' is not valid JSON: " + e.what());
    }
    c = ExperimentConfig::from_json(doc);
  }
  auto given = [sub](const char* name) { return sub->get_option(name)->count() > 0; };
  if (given("--scenario")) c.scenario = f.v.scenario;
  if (given("--controller")) c.controller = f.v.controller;
  if (given("--V")) c.V = f.v.V;
  if (given("--C")) c.C = f.v.C;
  if (given("--T")) c.T = f.v.T;
  if (given("--seed")) c.seed = f.v.seed;
  if (given("--out")) c.out = f.v.out;
  if (given("--ensemble")) c.ensemble = f.v.ensemble;
  if (given("--checkpoint-every")) c.checkpoint_every = f.v.checkpoint_every;
  if (given("--trace")) c.write_trace = true;
  if (given("--action")) c.action = f.v.action;
  if (given("--epsilon")) c.epsilon = f.v.epsilon;
  if (given("--crn")) c.common_random_numbers = true;
  if (given("--eps-grid")) c.epsilon_grid = f.v.epsilon_grid;
  if (given("--trace-file")) c.trace_file = f.v.trace_file;
  if (given("--summary")) c.summary_file = f.v.summary_file;
  if (given("--tolerance-se")) c.tolerance_se = f.v.tolerance_se;
  return c;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Drift-plus-penalty network simulator, oracle and diagnostics", "dpp"};
  app.require_subcommand(1);
  std::map<std::string, Flags> flags;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"run", "Simulate one configuration and check its bounds"},
      {"sweep", "Run a list of V values and tabulate the tradeoff"},
      {"oracle", "Solve for epsilon_max and the y0_opt curve"},
      {"verify", "Re-run diagnostics on an existing trace CSV"},
      {"fixtures", "Write the built-in scenario corpus"}};
  for (const auto& [name, help] : commands) add_flags(app.add_subcommand(name, help), flags[name]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kPass : kConfigError;
  }

  try {
    for (auto& [name, f] : flags) {
      const CLI::App* sub = app.get_subcommand(name);
      if (!sub->parsed()) continue;
      Context ctx{resolve(sub, f), out, err};
      if (name == "run") return cmd_run(ctx);
      if (name == "sweep") return cmd_sweep(ctx);
      if (name == "oracle") return cmd_oracle(ctx);
      if (name == "verify") return cmd_verify(ctx, sub->get_option("--V")->count() > 0);
      return cmd_fixtures(ctx);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kConfigError;
}

}  // namespace dpp::cli
