#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "nipah/model.hpp"

namespace nipah {

/// Uniform time grid with n_steps intervals and n_steps+1 nodes.
struct TimeGrid {
    double t0 = 0;
    double tf = 0;
    std::size_t n_steps = 0;

    double dt() const { return (tf - t0) / static_cast<double>(n_steps); }
    std::size_t n_nodes() const { return n_steps + 1; }
    double time_at(std::size_t i) const { return t0 + static_cast<double>(i) * dt(); }

    void validate() const; // tf > t0, n_steps >= 2
};

/// Generic autonomous-or-not vector field y' = f(t, y).
using VectorField =
    std::function<std::vector<double>(double t, const std::vector<double>& y)>;

/// Classical fixed-step RK4, forward in time. Output holds one sample per
/// node, index i at time grid.time_at(i). Throws NonFiniteError with the
/// step index if a sample stops being finite.
std::vector<std::vector<double>> rk4_forward(const VectorField& f,
                                             const std::vector<double>& x0,
                                             const TimeGrid& grid);

/// Fixed-step RK4 from tf down to t0 with terminal data. Output is stored in
/// forward index order: result[grid.n_steps] == terminal.
std::vector<std::vector<double>> rk4_backward(const VectorField& f,
                                              const std::vector<double>& terminal,
                                              const TimeGrid& grid);

/// Composite trapezoid rule over per-node samples. values.size() must equal
/// grid.n_nodes().
double quadrature(std::span<const double> values, const TimeGrid& grid);

/// Node-aligned samples of a solved problem: states always, controls and
/// adjoints when the producing operation supplies them.
struct Trajectory {
    TimeGrid grid;
    std::vector<State> states;
    std::vector<ControlVector> controls; // empty or n_nodes entries
    std::vector<AdjointState> adjoints;  // empty or n_nodes entries

    bool has_controls() const { return !controls.empty(); }
    bool has_adjoints() const { return !adjoints.empty(); }

    /// Linear interpolation between nodes; t clamped to [t0, tf].
    State state_at(double t) const;
    ControlVector control_at(double t) const;

    void validate_shape() const; // array lengths match the grid
};

/// Integrate the uncontrolled model (full or treatment-free) with RK4.
Trajectory simulate_uncontrolled(const Params& p, const State& x0,
                                 const TimeGrid& grid, Variant variant);

/// Integrate the controlled system under a per-node control schedule
/// (linearly interpolated at RK4 half-steps).
Trajectory simulate_controlled(const Params& p, const State& x0,
                               const TimeGrid& grid,
                               const std::vector<ControlVector>& controls);

/// Constant-control convenience overload.
Trajectory simulate_controlled(const Params& p, const State& x0,
                               const TimeGrid& grid, const ControlVector& u);

/// Adjoint field: dl/dt = g(t, l, x(t), u(t)) with x, u read off a frozen
/// forward trajectory.
using AdjointField = std::function<AdjointState(
    double t, const AdjointState& l, const State& x, const ControlVector& u)>;

/// Backward RK4 for the adjoint system. Interior stage values of the frozen
/// state/control are linearly interpolated at t +- h/2. Forward index order.
std::vector<AdjointState> rk4_adjoint_backward(const AdjointField& g,
                                               const AdjointState& terminal,
                                               const TimeGrid& grid,
                                               const Trajectory& frozen);

/// Numerical positivity and invariant-region diagnostics for a trajectory.
struct TrajectoryChecks {
    double min_component = 0;    // most negative compartment sample
    double max_total = 0;        // largest N(t) over the grid
    bool region_applicable = false; // N(0) <= pi/mu, so the bound must hold
    bool positivity_ok = false;  // min_component >= -1e-9 * pi/mu
    bool region_ok = false;      // max_total <= pi/mu * (1 + 1e-9), when applicable
};

TrajectoryChecks check_trajectory(const Trajectory& traj, const Params& p);

} // namespace nipah
