#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "dpp/diagnostics.hpp"
#include "dpp/model.hpp"
#include "dpp/oracle.hpp"
#include "dpp/simulator.hpp"

namespace dpp::io {

using nlohmann::json;

/// Scenario document:
/// {name?, K, M, y0_min, omega: [{id, prob, payload}],
///  actions: {omega_id: [{id, a: [...], b: [...], y: [...]}]}}
NetworkModel scenario_from_json(const json& doc);
json scenario_to_json(const NetworkModel& model);

/// Throws ConfigError naming the file or field on failure.
NetworkModel load_scenario(const std::filesystem::path& path);
void save_scenario(const NetworkModel& model, const std::filesystem::path& path);

/// 64-bit FNV-1a of the canonical scenario JSON, as 16 hex digits.
std::string content_hash(const NetworkModel& model);

/// Shortest decimal string that round-trips the double exactly.
std::string format_double(double x);

/// CSV with header t, omega_id, action_id, a_1..a_K, b_1..b_K, y_0..y_M,
/// Q_1..Q_K, Z_1..Z_M; one row per slot. Requires retained records.
void write_trace_csv(const Trace& trace, std::ostream& out);

/// Rebuilds a record-bearing trace from CSV against its scenario. Running
/// sums, checkpoints and batch means are recomputed from the rows. Lines
/// starting with '#' are skipped.
Trace read_trace_csv(std::istream& in, const NetworkModel& model, const SystemState& initial);

json to_json(const RunSummary& summary);
RunSummary summary_from_json(const json& doc);
json to_json(const StabilityReport& report);
json to_json(const BoundReport& report);
json to_json(const std::vector<ConstraintVerdict>& verdicts);
json to_json(const MomentCheckReport& report);
json to_json(const OmegaOnlyPolicy& policy, const NetworkModel& model);
json to_json(const SystemState& state);
SystemState state_from_json(const json& doc);

/// Human-readable multi-line report.
std::string render_text(const RunSummary& summary, const StabilityReport& stability,
                        const std::optional<BoundReport>& bounds,
                        const std::vector<ConstraintVerdict>& constraints);

/// q, fraction rows for every queue; columns label,q,fraction.
void write_tail_csv(const StabilityReport& report, std::ostream& out);

}  // namespace dpp::io
