#include "dpp/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace dpp::io {

namespace {

json vector_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Vector vector_from(const json& arr, const std::string& field) {
  if (!arr.is_array()) throw ConfigError(field + ": expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) throw ConfigError(field + ": expected an array of numbers");
    v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
  }
  return v;
}

const json& require(const json& doc, const std::string& key, const std::string& where) {
  if (!doc.is_object() || !doc.contains(key)) throw ConfigError(where + key + ": missing field");
  return doc.at(key);
}

double number(const json& doc, const std::string& key, const std::string& where) {
  const auto& v = require(doc, key, where);
  if (!v.is_number()) throw ConfigError(where + key + ": expected a number");
  return v.get<double>();
}

std::size_t count(const json& doc, const std::string& key) {
  const auto& v = require(doc, key, "");
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(key + ": expected a non-negative integer");
  }
  return v.get<std::size_t>();
}

double parse_double(std::string_view text, const std::string& what) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ConfigError(what + ": cannot parse '" + std::string(text) + "'");
  return value;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

NetworkModel scenario_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("scenario: expected a JSON object");
  const std::string name = doc.value("name", std::string("scenario"));
  const auto K = count(doc, "K");
  const auto M = count(doc, "M");
  const double y0_min = number(doc, "y0_min", "");

  const auto& omega = require(doc, "omega", "");
  if (!omega.is_array()) throw ConfigError("omega: expected an array");
  const auto& actions = require(doc, "actions", "");
  if (!actions.is_object()) throw ConfigError("actions: expected an object keyed by omega id");

  std::vector<EventSpec> events;
  std::vector<std::vector<ActionSpec>> menus;
  for (std::size_t i = 0; i < omega.size(); ++i) {
    const auto where = "omega[" + std::to_string(i) + "].";
    const auto& e = omega[i];
    const auto& id = require(e, "id", where);
    if (!id.is_string()) throw ConfigError(where + "id: expected a string");
    EventSpec spec;
    spec.state.id = id.get<std::string>();
    spec.probability = number(e, "prob", where);
    spec.state.payload = e.contains("payload") ? vector_from(e.at("payload"), where + "payload") : Vector();

    if (!actions.contains(spec.state.id)) {
      throw ConfigError("actions." + spec.state.id + ": missing action set");
    }
    const auto& list = actions.at(spec.state.id);
    if (!list.is_array()) throw ConfigError("actions." + spec.state.id + ": expected an array");
    std::vector<ActionSpec> menu;
    for (std::size_t j = 0; j < list.size(); ++j) {
      const auto aw = "actions." + spec.state.id + "[" + std::to_string(j) + "].";
      const auto& a = list[j];
      const auto& aid = require(a, "id", aw);
      if (!aid.is_string()) throw ConfigError(aw + "id: expected a string");
      menu.push_back({{aid.get<std::string>()},
                      {vector_from(require(a, "a", aw), aw + "a"), vector_from(require(a, "b", aw), aw + "b"),
                       vector_from(require(a, "y", aw), aw + "y")}});
    }
    events.push_back(std::move(spec));
    menus.push_back(std::move(menu));
  }
  for (const auto& [key, _] : actions.items()) {
    bool known = false;
    for (const auto& e : events) known = known || e.state.id == key;
    if (!known) throw ConfigError("actions." + key + ": no such omega id");
  }
  return NetworkModel(name, K, M, y0_min, std::move(events), std::move(menus));
}

json scenario_to_json(const NetworkModel& model) {
  json doc;
  doc["name"] = model.name();
  doc["K"] = model.queue_count();
  doc["M"] = model.constraint_count();
  doc["y0_min"] = model.y0_min();
  doc["omega"] = json::array();
  doc["actions"] = json::object();
  for (std::size_t w = 0; w < model.event_count(); ++w) {
    const auto& e = model.event(w);
    doc["omega"].push_back({{"id", e.id}, {"prob", model.probability(w)}, {"payload", vector_json(e.payload)}});
    json list = json::array();
    for (std::size_t a = 0; a < model.action_count(w); ++a) {
      const auto& o = model.outcome(w, a);
      list.push_back({{"id", model.action(w, a).id},
                      {"a", vector_json(o.arrivals)},
                      {"b", vector_json(o.services)},
                      {"y", vector_json(o.penalties)}});
    }
    doc["actions"][e.id] = std::move(list);
  }
  return doc;
}

NetworkModel load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("scenario: cannot open '" + path.string() + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("scenario: '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return scenario_from_json(doc);
}

void save_scenario(const NetworkModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << scenario_to_json(model).dump(2) << '\n';
}

std::string content_hash(const NetworkModel& model) {
  const std::string text = scenario_to_json(model).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

void write_trace_csv(const Trace& trace, std::ostream& out) {
  if (!trace.has_records()) throw std::logic_error("write_trace_csv: trace has no records");
  const auto K = trace.queue_count();
  const auto M = trace.constraint_count();
  out << "t,omega_id,action_id";
  for (Eigen::Index k = 1; k <= K; ++k) out << ",a_" << k;
  for (Eigen::Index k = 1; k <= K; ++k) out << ",b_" << k;
  for (Eigen::Index m = 0; m <= M; ++m) out << ",y_" << m;
  for (Eigen::Index k = 1; k <= K; ++k) out << ",Q_" << k;
  for (Eigen::Index m = 1; m <= M; ++m) out << ",Z_" << m;
  out << '\n';

  std::string line;
  for (std::uint64_t t = 0; t < trace.horizon; ++t) {
    const auto c = static_cast<Eigen::Index>(t);
    const auto w = trace.omega_index[t];
    line = std::to_string(t);
    line += ',';
    line += trace.omega_ids[w];
    line += ',';
    line += trace.action_ids[w][trace.action_index[t]];
    auto column = [&](const Eigen::MatrixXd& m) {
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        line += ',';
        line += format_double(m(r, c));
      }
    };
    column(trace.arrivals);
    column(trace.services);
    column(trace.penalties);
    column(trace.queues);
    column(trace.virtual_queues);
    line += '\n';
    out << line;
  }
}

Trace read_trace_csv(std::istream& in, const NetworkModel& model, const SystemState& initial) {
  const auto K = static_cast<Eigen::Index>(model.queue_count());
  const auto M = static_cast<Eigen::Index>(model.constraint_count());
  const auto width = static_cast<std::size_t>(3 + 3 * K + 2 * M + 1);

  std::string line;
  do {
    if (!std::getline(in, line)) throw ConfigError("trace: empty file");
  } while (line.starts_with('#'));
  if (split(line).size() != width) throw ConfigError("trace: header does not match scenario dimensions");

  struct Row {
    std::size_t omega;
    std::size_t alpha;
    Vector queues;
    Vector virtual_queues;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line.starts_with('#')) continue;
    const auto fields = split(line);
    const auto where = "trace row " + std::to_string(rows.size());
    if (fields.size() != width) throw ConfigError(where + ": wrong number of columns");
    if (parse_double(fields[0], where) != static_cast<double>(rows.size())) {
      throw ConfigError(where + ": slots must be contiguous from 0");
    }
    Row row;
    try {
      row.omega = model.event_index(std::string(fields[1]));
      row.alpha = model.action_index(row.omega, std::string(fields[2]));
    } catch (const std::domain_error& e) {
      throw ConfigError(where + ": " + e.what());
    }
    std::size_t f = 3;
    auto take = [&](Eigen::Index n) {
      Vector v(n);
      for (Eigen::Index i = 0; i < n; ++i) v(i) = parse_double(fields[f++], where);
      return v;
    };
    const SlotOutcome outcome{take(K), take(K), take(M + 1)};
    if (!(outcome == model.outcome(row.omega, row.alpha))) {
      throw ConfigError(where + ": outcome differs from the scenario's table");
    }
    row.queues = take(K);
    row.virtual_queues = take(M);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("trace: no rows");

  Trace trace;
  trace.scenario = model.name();
  trace.controller = "recorded";
  trace.horizon = rows.size();
  trace.initial = initial;
  trace.records_retained = true;
  for (std::size_t w = 0; w < model.event_count(); ++w) {
    trace.omega_ids.push_back(model.event(w).id);
    std::vector<std::string> ids;
    for (std::size_t a = 0; a < model.action_count(w); ++a) ids.push_back(model.action(w, a).id);
    trace.action_ids.push_back(std::move(ids));
  }

  TraceRecorder recorder(trace, 0, 20);
  SystemState state = initial;
  for (std::size_t t = 0; t < rows.size(); ++t) {
    recorder.before_slot(state);
    state = {rows[t].queues, rows[t].virtual_queues, t + 1};
    recorder.after_slot(rows[t].omega, rows[t].alpha, model.outcome(rows[t].omega, rows[t].alpha), state);
  }
  recorder.finish(state);
  return trace;
}

json to_json(const RunSummary& s) {
  return {{"scenario", s.scenario},
          {"controller", s.controller},
          {"seed", s.seed},
          {"T", s.horizon},
          {"V", s.V},
          {"C", s.C},
          {"B", s.B},
          {"y_avg", vector_json(s.penalty_average)},
          {"Q_avg", vector_json(s.queue_average)},
          {"Z_avg", vector_json(s.virtual_average)},
          {"backlog_avg", s.backlog_average},
          {"Q_terminal_ratio", vector_json(s.queue_terminal_ratio)},
          {"Z_terminal_ratio", vector_json(s.virtual_terminal_ratio)},
          {"y0_batch_se", s.penalty_standard_error},
          {"backlog_batch_se", s.backlog_standard_error}};
}

RunSummary summary_from_json(const json& doc) {
  RunSummary s;
  s.scenario = require(doc, "scenario", "").get<std::string>();
  s.controller = require(doc, "controller", "").get<std::string>();
  s.seed = require(doc, "seed", "").get<std::uint64_t>();
  s.horizon = require(doc, "T", "").get<std::uint64_t>();
  s.V = number(doc, "V", "");
  s.C = number(doc, "C", "");
  s.B = number(doc, "B", "");
  s.penalty_average = vector_from(require(doc, "y_avg", ""), "y_avg");
  s.queue_average = vector_from(require(doc, "Q_avg", ""), "Q_avg");
  s.virtual_average = vector_from(require(doc, "Z_avg", ""), "Z_avg");
  s.backlog_average = number(doc, "backlog_avg", "");
  s.queue_terminal_ratio = vector_from(require(doc, "Q_terminal_ratio", ""), "Q_terminal_ratio");
  s.virtual_terminal_ratio = vector_from(require(doc, "Z_terminal_ratio", ""), "Z_terminal_ratio");
  s.penalty_standard_error = number(doc, "y0_batch_se", "");
  s.backlog_standard_error = number(doc, "backlog_batch_se", "");
  return s;
}

namespace {

json tail_json(const std::vector<TailPoint>& tail) {
  json arr = json::array();
  for (const auto& p : tail) arr.push_back({{"q", p.q}, {"fraction", p.fraction}});
  return arr;
}

json queue_json(const QueueStability& q) {
  return {{"queue", q.label},
          {"time_average", q.time_average},
          {"terminal_ratio", q.terminal_ratio},
          {"checkpoint_averages", q.checkpoint_averages},
          {"tail", tail_json(q.tail)},
          {"tail_from_checkpoints", q.tail_from_checkpoints}};
}

}  // namespace

json to_json(const StabilityReport& r) {
  json doc{{"T", r.horizon}, {"queues", json::array()}};
  for (const auto& q : r.queues) doc["queues"].push_back(queue_json(q));
  if (!r.ensemble.empty()) {
    doc["ensemble"] = json::array();
    for (std::size_t c = 0; c < r.ensemble.size(); ++c) {
      const auto& e = r.ensemble[c];
      doc["ensemble"].push_back({{"queue", r.queues[c].label},
                                 {"seeds", e.seeds},
                                 {"mean_time_average", e.mean_time_average},
                                 {"mean_terminal_ratio", e.mean_terminal_ratio},
                                 {"mean_tail", tail_json(e.mean_tail)}});
    }
  }
  return doc;
}

json to_json(const BoundReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return {{"penalty_empirical", r.penalty_empirical},
          {"penalty_cap", opt(r.penalty_cap)},
          {"penalty_tolerance", r.tolerance.penalty},
          {"penalty_pass", r.penalty_pass},
          {"backlog_empirical", r.backlog_empirical},
          {"backlog_cap", opt(r.backlog_cap)},
          {"backlog_tolerance", r.tolerance.backlog},
          {"backlog_pass", r.backlog_pass},
          {"sharper_backlog_cap", opt(r.sharper_backlog_cap)},
          {"sharper_backlog_pass", r.sharper_backlog_pass},
          {"pass", r.pass()}};
}

json to_json(const std::vector<ConstraintVerdict>& verdicts) {
  json arr = json::array();
  for (const auto& v : verdicts) {
    arr.push_back({{"m", v.m},
                   {"Z_terminal_ratio", v.terminal_ratio},
                   {"y_avg", v.penalty_average},
                   {"pass", v.pass}});
  }
  return arr;
}

json to_json(const MomentCheckReport& r) {
  auto check = [](const MomentCheck& c) {
    return json{{"label", c.label},
                {"empirical_max", c.empirical_max},
                {"empirical_mean", c.empirical_mean},
                {"worst_case", c.worst_case},
                {"pass", c.pass}};
  };
  json doc{{"queue_changes", json::array()}, {"objective_square", check(r.objective_square)}};
  for (const auto& c : r.queue_changes) doc["queue_changes"].push_back(check(c));
  doc["expected_bounds"] = {{"E[a^4]", vector_json(r.expected.arrivals_fourth)},
                            {"E[b^4]", vector_json(r.expected.services_fourth)},
                            {"E[y^4]", vector_json(r.expected.constraints_fourth)},
                            {"E[y0^2]", r.expected.objective_second},
                            {"D", r.expected.bound()}};
  doc["pass"] = r.pass();
  return doc;
}

json to_json(const OmegaOnlyPolicy& policy, const NetworkModel& model) {
  json doc = json::object();
  for (std::size_t w = 0; w < policy.probabilities.size(); ++w) {
    json dist = json::object();
    for (std::size_t a = 0; a < model.action_count(w); ++a) {
      dist[model.action(w, a).id] = policy.probabilities[w](static_cast<Eigen::Index>(a));
    }
    doc[model.event(w).id] = std::move(dist);
  }
  return doc;
}

json to_json(const SystemState& state) {
  return {{"Q", vector_json(state.queues)}, {"Z", vector_json(state.virtual_queues)}};
}

SystemState state_from_json(const json& doc) {
  return {vector_from(require(doc, "Q", "initial."), "initial.Q"),
          vector_from(require(doc, "Z", "initial."), "initial.Z"), 0};
}

std::string render_text(const RunSummary& s, const StabilityReport& stability,
                        const std::optional<BoundReport>& bounds,
                        const std::vector<ConstraintVerdict>& constraints) {
  std::ostringstream out;
  out << std::setprecision(8);
  out << "scenario " << s.scenario << "  controller " << s.controller << "  seed " << s.seed
      << "  T " << s.horizon << "  V " << s.V << "  C " << s.C << "  B " << s.B << '\n';
  out << "  ybar0 = " << s.penalty_average(0) << " (batch SE " << s.penalty_standard_error << ")\n";
  out << "  avg backlog = " << s.backlog_average << " (batch SE " << s.backlog_standard_error << ")\n";
  for (const auto& q : stability.queues) {
    out << "  " << q.label << ": time-avg " << q.time_average << ", |Q(T)|/T " << q.terminal_ratio;
    if (!q.tail.empty()) {
      out << ", tail";
      for (const auto& p : q.tail) out << " [" << p.q << ": " << p.fraction << "]";
    }
    out << '\n';
  }
  if (bounds) {
    out << "  penalty: " << bounds->penalty_empirical;
    if (bounds->penalty_cap) out << " <= " << *bounds->penalty_cap << " + " << bounds->tolerance.penalty;
    out << (bounds->penalty_pass ? "  PASS" : "  FAIL") << '\n';
    out << "  backlog: " << bounds->backlog_empirical;
    if (bounds->backlog_cap) out << " <= " << *bounds->backlog_cap << " + " << bounds->tolerance.backlog;
    out << (bounds->backlog_pass ? "  PASS" : "  FAIL") << '\n';
    if (bounds->sharper_backlog_cap) {
      out << "  backlog (observed ybar0 cap): <= " << *bounds->sharper_backlog_cap
          << (bounds->sharper_backlog_pass ? "  PASS" : "  FAIL") << '\n';
    }
  }
  for (const auto& c : constraints) {
    out << "  constraint " << c.m << ": Z(T)/T " << c.terminal_ratio << ", ybar " << c.penalty_average
        << (c.pass ? "  PASS" : "  FAIL") << '\n';
  }
  return out.str();
}

void write_tail_csv(const StabilityReport& report, std::ostream& out) {
  out << "queue,q,fraction\n";
  for (const auto& q : report.queues) {
    for (const auto& p : q.tail) out << q.label << ',' << format_double(p.q) << ',' << format_double(p.fraction) << '\n';
  }
}

}  // namespace dpp::io
