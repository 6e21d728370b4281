#include "nipah/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nipah {

namespace {

bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

std::vector<double> axpy(const std::vector<double>& x, double a,
                         const std::vector<double>& y) {
    std::vector<double> out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        out[k] = x[k] + a * y[k];
    }
    return out;
}

// x + h/6 * (k1 + 2 k2 + 2 k3 + k4)
std::vector<double> rk4_combine(const std::vector<double>& x, double h,
                                const std::vector<double>& k1, const std::vector<double>& k2,
                                const std::vector<double>& k3, const std::vector<double>& k4) {
    std::vector<double> out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        out[k] = x[k] + h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
    }
    return out;
}

} // namespace

void TimeGrid::validate() const {
    if (!(tf > t0) || !std::isfinite(t0) || !std::isfinite(tf)) {
        throw ValidationError("grid: tf must be greater than t0");
    }
    if (n_steps < 2) {
        throw ValidationError("grid: n_steps must be at least 2");
    }
}

std::vector<std::vector<double>> rk4_forward(const VectorField& f,
                                             const std::vector<double>& x0,
                                             const TimeGrid& grid) {
    grid.validate();
    const double h = grid.dt();
    std::vector<std::vector<double>> out;
    out.reserve(grid.n_nodes());
    out.push_back(x0);
    std::vector<double> x = x0;
    for (std::size_t i = 0; i < grid.n_steps; ++i) {
        const double t = grid.time_at(i);
        const auto k1 = f(t, x);
        const auto k2 = f(t + h / 2.0, axpy(x, h / 2.0, k1));
        const auto k3 = f(t + h / 2.0, axpy(x, h / 2.0, k2));
        const auto k4 = f(t + h, axpy(x, h, k3));
        x = rk4_combine(x, h, k1, k2, k3, k4);
        if (!all_finite(x)) {
            throw NonFiniteError("rk4_forward: non-finite state at step " + std::to_string(i + 1), i + 1);
        }
        out.push_back(x);
    }
    return out;
}

std::vector<std::vector<double>> rk4_backward(const VectorField& f,
                                              const std::vector<double>& terminal,
                                              const TimeGrid& grid) {
    grid.validate();
    const double h = grid.dt();
    std::vector<std::vector<double>> out(grid.n_nodes());
    out[grid.n_steps] = terminal;
    std::vector<double> y = terminal;
    for (std::size_t i = grid.n_steps; i > 0; --i) {
        const double t = grid.time_at(i);
        const auto k1 = f(t, y);
        const auto k2 = f(t - h / 2.0, axpy(y, -h / 2.0, k1));
        const auto k3 = f(t - h / 2.0, axpy(y, -h / 2.0, k2));
        const auto k4 = f(t - h, axpy(y, -h, k3));
        y = rk4_combine(y, -h, k1, k2, k3, k4);
        if (!all_finite(y)) {
            throw NonFiniteError("rk4_backward: non-finite state at step " + std::to_string(i), i);
        }
        out[i - 1] = y;
    }
    return out;
}

double quadrature(std::span<const double> values, const TimeGrid& grid) {
    grid.validate();
    if (values.size() != grid.n_nodes()) {
        throw ValidationError("quadrature: expected " + std::to_string(grid.n_nodes()) +
                              " samples, got " + std::to_string(values.size()));
    }
    const double h = grid.dt();
    double acc = 0.5 * (values.front() + values.back());
    for (std::size_t i = 1; i + 1 < values.size(); ++i) {
        acc += values[i];
    }
    return acc * h;
}

void Trajectory::validate_shape() const {
    grid.validate();
    if (states.size() != grid.n_nodes()) {
        throw ValidationError("trajectory: state samples do not match the grid");
    }
    if (!controls.empty() && controls.size() != grid.n_nodes()) {
        throw ValidationError("trajectory: control samples do not match the grid");
    }
    if (!adjoints.empty() && adjoints.size() != grid.n_nodes()) {
        throw ValidationError("trajectory: adjoint samples do not match the grid");
    }
}

namespace {

// Locate t in the grid and return (left index, interpolation weight).
std::pair<std::size_t, double> locate(const TimeGrid& grid, double t) {
    const double h = grid.dt();
    double u = (t - grid.t0) / h;
    if (u <= 0) return {0, 0.0};
    if (u >= static_cast<double>(grid.n_steps)) return {grid.n_steps - 1, 1.0};
    auto i = static_cast<std::size_t>(u);
    if (i >= grid.n_steps) i = grid.n_steps - 1;
    return {i, u - static_cast<double>(i)};
}

} // namespace

State Trajectory::state_at(double t) const {
    const auto [i, w] = locate(grid, t);
    const auto a = states[i].to_array();
    const auto b = states[i + 1].to_array();
    std::array<double, 5> out{};
    for (int k = 0; k < 5; ++k) {
        out[k] = (1.0 - w) * a[k] + w * b[k];
    }
    return State::from_array(out);
}

ControlVector Trajectory::control_at(double t) const {
    if (controls.empty()) {
        return {};
    }
    const auto [i, w] = locate(grid, t);
    const ControlVector& a = controls[i];
    const ControlVector& b = controls[i + 1];
    return {(1.0 - w) * a.u1 + w * b.u1, (1.0 - w) * a.u2 + w * b.u2,
            (1.0 - w) * a.u3 + w * b.u3};
}

namespace {

Trajectory trajectory_from_samples(const TimeGrid& grid,
                                   std::vector<std::vector<double>> samples) {
    Trajectory traj;
    traj.grid = grid;
    traj.states.reserve(samples.size());
    for (const auto& s : samples) {
        traj.states.push_back(State::from_array({s[0], s[1], s[2], s[3], s[4]}));
    }
    return traj;
}

} // namespace

Trajectory simulate_uncontrolled(const Params& p, const State& x0, const TimeGrid& grid,
                                 Variant variant) {
    VectorField f = [&p, variant](double, const std::vector<double>& y) {
        const State d = rhs_variant(p, State::from_array({y[0], y[1], y[2], y[3], y[4]}), variant);
        const auto a = d.to_array();
        return std::vector<double>(a.begin(), a.end());
    };
    return trajectory_from_samples(grid, rk4_forward(f, {x0.s, x0.e, x0.i, x0.t, x0.r}, grid));
}

Trajectory simulate_controlled(const Params& p, const State& x0, const TimeGrid& grid,
                               const std::vector<ControlVector>& controls) {
    grid.validate();
    if (controls.size() != grid.n_nodes()) {
        throw ValidationError("simulate_controlled: control samples do not match the grid");
    }
    // piecewise-linear control signal, sampled at the RK4 stage times
    const double h = grid.dt();
    auto control_at = [&](double t) -> ControlVector {
        double u = (t - grid.t0) / h;
        if (u <= 0) return controls.front();
        if (u >= static_cast<double>(grid.n_steps)) return controls.back();
        auto i = static_cast<std::size_t>(u);
        if (i >= grid.n_steps) i = grid.n_steps - 1;
        const double w = u - static_cast<double>(i);
        const ControlVector& a = controls[i];
        const ControlVector& b = controls[i + 1];
        return {(1.0 - w) * a.u1 + w * b.u1, (1.0 - w) * a.u2 + w * b.u2,
                (1.0 - w) * a.u3 + w * b.u3};
    };
    VectorField f = [&p, control_at](double t, const std::vector<double>& y) {
        const State d = rhs_controlled(p, State::from_array({y[0], y[1], y[2], y[3], y[4]}),
                                       control_at(t));
        const auto a = d.to_array();
        return std::vector<double>(a.begin(), a.end());
    };
    Trajectory traj =
        trajectory_from_samples(grid, rk4_forward(f, {x0.s, x0.e, x0.i, x0.t, x0.r}, grid));
    traj.controls = controls;
    return traj;
}

Trajectory simulate_controlled(const Params& p, const State& x0, const TimeGrid& grid,
                               const ControlVector& u) {
    grid.validate();
    return simulate_controlled(p, x0, grid, std::vector<ControlVector>(grid.n_nodes(), u));
}

std::vector<AdjointState> rk4_adjoint_backward(const AdjointField& g,
                                               const AdjointState& terminal,
                                               const TimeGrid& grid,
                                               const Trajectory& frozen) {
    frozen.validate_shape();
    if (frozen.grid.n_steps != grid.n_steps || frozen.grid.t0 != grid.t0 ||
        frozen.grid.tf != grid.tf) {
        throw ValidationError("rk4_adjoint_backward: frozen trajectory grid mismatch");
    }
    VectorField f = [&](double t, const std::vector<double>& y) {
        const AdjointState l = AdjointState::from_array({y[0], y[1], y[2], y[3], y[4]});
        const AdjointState d = g(t, l, frozen.state_at(t), frozen.control_at(t));
        const auto a = d.to_array();
        return std::vector<double>(a.begin(), a.end());
    };
    const auto term = terminal.to_array();
    auto samples = rk4_backward(f, std::vector<double>(term.begin(), term.end()), grid);
    std::vector<AdjointState> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        out.push_back(AdjointState::from_array({s[0], s[1], s[2], s[3], s[4]}));
    }
    return out;
}

TrajectoryChecks check_trajectory(const Trajectory& traj, const Params& p) {
    traj.validate_shape();
    const double cap = p.dfe_population();
    TrajectoryChecks c;
    c.min_component = traj.states.front().to_array()[0];
    c.max_total = 0;
    for (const State& x : traj.states) {
        for (double v : x.to_array()) {
            c.min_component = std::min(c.min_component, v);
        }
        c.max_total = std::max(c.max_total, x.total());
    }
    c.region_applicable = traj.states.front().total() <= cap;
    c.positivity_ok = c.min_component >= -1e-9 * cap;
    c.region_ok = !c.region_applicable || c.max_total <= cap * (1.0 + 1e-9);
    return c;
}

} // namespace nipah
