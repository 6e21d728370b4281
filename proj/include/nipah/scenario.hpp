#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nipah/analysis.hpp"
#include "nipah/integrator.hpp"
#include "nipah/model.hpp"
#include "nipah/optimal_control.hpp"

namespace nipah {

enum class Mode { TreatmentFree, Full, Controlled };

/// A fully validated simulation/optimization request.
struct Scenario {
    std::string label = "scenario";
    std::string time_unit = "years";
    Params params;
    State x0;
    TimeGrid grid;
    Mode mode = Mode::Full;
    ControlVector fixed_controls; // used by simulate when mode == Controlled
    FbsConfig fbs;                // grid is filled in from `grid`
    bool check_invariant_region = true;
};

/// key=value overrides applied to the parsed document before validation.
using Override = std::pair<std::string, std::string>;

/// Parse and validate a scenario document. Unknown keys are rejected; every
/// model rate must be present (solver knobs have documented defaults).
/// Errors name the offending key.
Scenario load_scenario(const std::string& json_text,
                       std::span<const Override> overrides = {});
Scenario load_scenario_file(const std::filesystem::path& path,
                            std::span<const Override> overrides = {});

/// Canonical JSON text; load(serialize(s)) reproduces every field.
std::string serialize_scenario(const Scenario& s);

/// Soft diagnostics (e.g. x0 outside the invariant region) that warrant a
/// warning but not a rejection.
std::vector<std::string> lint_scenario(const Scenario& s);

/// Assign a Params field by its scenario-file name ("beta", "mu", ...).
void set_param_by_name(Params& p, const std::string& name, double value);

/// CSV persistence. Header: t,S,E,I,T,R[,u1,u2,u3][,l1,l2,l3,l4,l5], one row
/// per node, shortest round-trip decimal, deterministic bytes.
std::string trajectory_to_csv(const Trajectory& traj);
void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path);
Trajectory read_trajectory_csv(const std::filesystem::path& path);

/// One named curve of an SVG chart.
struct ChartSeries {
    std::string name;
    std::vector<std::pair<double, double>> points;
};

/// Standalone deterministic SVG line chart with axes, legend and title.
/// Requires at least one series and two points per series.
void emit_chart_svg(std::span<const ChartSeries> series,
                    const std::filesystem::path& path, const std::string& title,
                    const std::string& x_label = "t", const std::string& y_label = "");

struct SweepAxis {
    std::string param;          // a Params field name
    std::vector<double> values; // at least one
};

struct SweepSpec {
    Scenario base;
    std::vector<SweepAxis> axes;
    std::filesystem::path outputs;
};

SweepSpec load_sweep_spec(const std::string& json_text,
                          std::span<const Override> overrides = {});
SweepSpec load_sweep_spec_file(const std::filesystem::path& path,
                               std::span<const Override> overrides = {});

struct SweepCell {
    std::size_t index = 0;
    std::vector<std::pair<std::string, double>> settings; // axis values of this cell
    bool ok = false;
    std::string error;     // populated when !ok
    double r0 = 0;         // variant matching the scenario mode (NaN if unavailable)
    double peak_i = 0;
    double cumulative_i = 0;
    double final_r = 0;
    std::string csv_file;  // relative to the output directory
};

struct SweepSummary {
    std::vector<SweepCell> cells;
    bool all_ok = false;
    std::filesystem::path summary_csv;
};

/// Cartesian product over the axes; cells run concurrently, each writing its
/// own trajectory CSV; a summary CSV is assembled afterwards in cell order.
/// Per-cell failures are recorded in the summary, not thrown.
SweepSummary run_sweep(const SweepSpec& spec);

/// JSON serialization of analysis results (schema in the README).
std::string analysis_report_to_json(const AnalysisReport& report, int indent = 2);
std::string combined_analysis_to_json(const std::string& label,
                                      const AnalysisReport& treatment_free,
                                      const AnalysisReport& treatment, int indent = 2);

/// JSON serialization of solver metadata (objective history, convergence).
std::string fbs_result_to_json(const FbsResult& result, const FbsConfig& cfg,
                               double baseline_objective, int indent = 2);

} // namespace nipah
