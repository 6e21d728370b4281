// Command-line front end: analyze / simulate / optimize / sweep over scenario
// files. Machine-readable artifacts go to files or stdout; human-readable
// summaries go to stderr. Exit codes: 0 success, 1 I/O or unexpected error,
// 2 validation error, 3 analysis-domain error, 4 non-finite blow-up,
// 5 sweep finished with failed cells.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nipah/analysis.hpp"
#include "nipah/scenario.hpp"

namespace fs = std::filesystem;
using namespace nipah;

namespace {

struct CmdOptions {
    std::string scenario_path;
    std::string out_dir;
    std::vector<std::string> sets;
    bool svg = false;
    bool adjoints = false;
};

std::vector<Override> parse_overrides(const std::vector<std::string>& sets) {
    std::vector<Override> out;
    out.reserve(sets.size());
    for (const std::string& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ValidationError("--set: expected key=value, got \"" + kv + "\"");
        }
        out.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return out;
}

void print_warnings(const Scenario& sc) {
    for (const std::string& w : lint_scenario(sc)) {
        std::cerr << "warning: " << w << "\n";
    }
}

fs::path ensure_out_dir(const std::string& dir) {
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) {
        throw IoError("cannot create output directory: " + dir);
    }
    return p;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open file for writing: " + path.string());
    }
    out << text;
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

Trajectory run_simulation(const Scenario& sc) {
    switch (sc.mode) {
    case Mode::TreatmentFree:
        return simulate_uncontrolled(sc.params, sc.x0, sc.grid, Variant::TreatmentFree);
    case Mode::Full:
        return simulate_uncontrolled(sc.params, sc.x0, sc.grid, Variant::Treatment);
    case Mode::Controlled:
        return simulate_controlled(sc.params, sc.x0, sc.grid, sc.fixed_controls);
    }
    throw ValidationError("scenario.mode: unknown mode");
}

void report_checks(const Trajectory& traj, const Params& p) {
    const TrajectoryChecks c = check_trajectory(traj, p);
    std::cerr << "positivity: min compartment sample = " << c.min_component
              << (c.positivity_ok ? " (ok)" : " (WARNING: below tolerance)") << "\n";
    if (c.region_applicable) {
        std::cerr << "invariant region: max N(t) = " << c.max_total << ", bound pi/mu = "
                  << p.dfe_population() << (c.region_ok ? " (ok)" : " (WARNING: exceeded)")
                  << "\n";
    } else {
        std::cerr << "invariant region: not applicable (N(0) > pi/mu)\n";
    }
}

int cmd_analyze(const CmdOptions& opt) {
    const auto overrides = parse_overrides(opt.sets);
    const Scenario sc = load_scenario_file(opt.scenario_path, overrides);
    print_warnings(sc);

    const AnalysisReport tf = build_analysis_report(sc.params, Variant::TreatmentFree);
    const AnalysisReport tr = build_analysis_report(sc.params, Variant::Treatment);
    const std::string doc = combined_analysis_to_json(sc.label, tf, tr);

    std::cerr << "r0 (treatment-free) = " << tf.r0.value << ", r0 (treatment) = " << tr.r0.value
              << "\n"
              << "DFE locally stable: treatment-free " << (tf.dfe_locally_stable ? "yes" : "no")
              << ", treatment " << (tr.dfe_locally_stable ? "yes" : "no") << "\n"
              << "endemic equilibrium: treatment-free "
              << (tf.endemic_exists ? "present" : "absent") << ", treatment "
              << (tr.endemic_exists ? "present" : "absent") << "\n";

    if (!opt.out_dir.empty()) {
        const fs::path dir = ensure_out_dir(opt.out_dir);
        write_text(dir / (sc.label + "_analysis.json"), doc);
        std::cerr << "wrote " << (dir / (sc.label + "_analysis.json")).string() << "\n";
    } else {
        std::cout << doc;
    }
    return 0;
}

int cmd_simulate(const CmdOptions& opt) {
    const auto overrides = parse_overrides(opt.sets);
    const Scenario sc = load_scenario_file(opt.scenario_path, overrides);
    print_warnings(sc);
    if (opt.svg && opt.out_dir.empty()) {
        throw ValidationError("--svg requires --out");
    }

    const Trajectory traj = run_simulation(sc);
    report_checks(traj, sc.params);

    if (!opt.out_dir.empty()) {
        const fs::path dir = ensure_out_dir(opt.out_dir);
        const fs::path csv = dir / (sc.label + ".csv");
        write_trajectory_csv(traj, csv);
        std::cerr << "wrote " << csv.string() << "\n";
        if (opt.svg) {
            const char* comps[] = {"S", "E", "I", "T", "R"};
            for (int k = 0; k < 5; ++k) {
                ChartSeries series;
                series.name = comps[k];
                series.points.reserve(traj.states.size());
                for (std::size_t i = 0; i < traj.states.size(); ++i) {
                    series.points.emplace_back(traj.grid.time_at(i),
                                               traj.states[i].to_array()[k]);
                }
                const fs::path svg = dir / (sc.label + "_" + comps[k] + ".svg");
                emit_chart_svg(std::span(&series, 1), svg, sc.label + ": " + comps[k] + "(t)",
                               "t [" + sc.time_unit + "]", comps[k]);
                std::cerr << "wrote " << svg.string() << "\n";
            }
        }
    } else {
        std::cout << trajectory_to_csv(traj);
    }
    return 0;
}

int cmd_optimize(const CmdOptions& opt) {
    const auto overrides = parse_overrides(opt.sets);
    const Scenario sc = load_scenario_file(opt.scenario_path, overrides);
    print_warnings(sc);
    if (sc.mode != Mode::Controlled) {
        throw ValidationError("optimize requires a scenario with mode \"controlled\"");
    }
    if (opt.out_dir.empty()) {
        throw ValidationError("optimize requires --out");
    }

    FbsResult res = solve_fbs(sc.params, sc.x0, sc.fbs);

    // reference run with controls switched off
    const Trajectory baseline =
        simulate_controlled(sc.params, sc.x0, sc.grid, ControlVector{0, 0, 0});
    const double j0 = objective(baseline, sc.fbs.weights);
    const double j = res.objective_history.back();

    std::cerr << (res.converged ? "converged" : "NOT converged") << " after " << res.iterations
              << " iterations\n"
              << "objective J = " << j << " (uncontrolled baseline " << j0 << ")\n";

    const fs::path dir = ensure_out_dir(opt.out_dir);
    Trajectory out_traj = res.trajectory;
    if (!opt.adjoints) {
        out_traj.adjoints.clear();
    }
    const fs::path csv = dir / (sc.label + "_trajectory.csv");
    write_trajectory_csv(out_traj, csv);
    write_text(dir / (sc.label + "_fbs.json"), fbs_result_to_json(res, sc.fbs, j0));
    std::cerr << "wrote " << csv.string() << "\n";

    if (opt.svg) {
        const char* names[] = {"u1", "u2", "u3"};
        std::vector<ChartSeries> series(3);
        for (int k = 0; k < 3; ++k) {
            series[k].name = names[k];
            series[k].points.reserve(res.trajectory.controls.size());
        }
        for (std::size_t i = 0; i < res.trajectory.controls.size(); ++i) {
            const double t = res.trajectory.grid.time_at(i);
            series[0].points.emplace_back(t, res.trajectory.controls[i].u1);
            series[1].points.emplace_back(t, res.trajectory.controls[i].u2);
            series[2].points.emplace_back(t, res.trajectory.controls[i].u3);
        }
        const fs::path svg = dir / (sc.label + "_controls.svg");
        emit_chart_svg(series, svg, sc.label + ": optimal controls",
                       "t [" + sc.time_unit + "]", "control intensity");
        std::cerr << "wrote " << svg.string() << "\n";
    }
    return 0;
}

int cmd_sweep(const CmdOptions& opt) {
    const auto overrides = parse_overrides(opt.sets);
    SweepSpec spec = load_sweep_spec_file(opt.scenario_path, overrides);
    if (!opt.out_dir.empty()) {
        spec.outputs = opt.out_dir;
    }

    const SweepSummary summary = run_sweep(spec);
    for (const SweepCell& cell : summary.cells) {
        std::cerr << "cell " << cell.index;
        for (const auto& [name, value] : cell.settings) {
            std::cerr << " " << name << "=" << value;
        }
        if (cell.ok) {
            std::cerr << ": ok, r0=" << cell.r0 << ", peak I=" << cell.peak_i
                      << ", final R=" << cell.final_r << "\n";
        } else {
            std::cerr << ": FAILED: " << cell.error << "\n";
        }
    }
    std::cerr << "wrote " << summary.summary_csv.string() << "\n";
    return summary.all_ok ? 0 : 5;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nipah virus transmission model: simulation, analysis and optimal control"};
    app.require_subcommand(1);

    CmdOptions opt;
    const char* sub_names[] = {"analyze", "simulate", "optimize", "sweep"};
    const char* sub_desc[] = {
        "reproduction numbers, equilibria and stability report (JSON)",
        "integrate a scenario and write the trajectory CSV",
        "solve the optimal-control problem with the forward-backward sweep",
        "run a parameter sweep over scenario cells"};
    for (int k = 0; k < 4; ++k) {
        CLI::App* sub = app.add_subcommand(sub_names[k], sub_desc[k]);
        sub->add_option("scenario", opt.scenario_path,
                        k == 3 ? "sweep spec JSON file" : "scenario JSON file")
            ->required();
        sub->add_option("--out", opt.out_dir, "output directory");
        sub->add_option("--set", opt.sets, "override key=value (params/fbs keys)");
        sub->add_flag("--svg", opt.svg, "emit SVG charts");
        sub->add_flag("--adjoints", opt.adjoints, "include adjoint columns in trajectory CSV");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2; // usage problems are validation errors
    }

    try {
        if (app.got_subcommand("analyze")) return cmd_analyze(opt);
        if (app.got_subcommand("simulate")) return cmd_simulate(opt);
        if (app.got_subcommand("optimize")) return cmd_optimize(opt);
        return cmd_sweep(opt);
    } catch (const ValidationError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    } catch (const DomainError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 3;
    } catch (const NonFiniteError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 4;
    } catch (const IoError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    } catch (const std::exception& ex) {
        std::cerr << "unexpected error: " << ex.what() << "\n";
        return 1;
    }
}
