#include "nipah/optimal_control.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nipah {

void FbsConfig::validate() const {
    if (!(tol > 0)) {
        throw ValidationError("fbs.tol: must be strictly positive");
    }
    if (!(relaxation > 0) || !(relaxation <= 1)) {
        throw ValidationError("fbs.relaxation: must lie in (0, 1]");
    }
    if (max_iters == 0) {
        throw ValidationError("fbs.max_iters: must be positive");
    }
    weights.validate();
    bounds.validate();
    grid.validate();
}

double hamiltonian(const Params& p, const ObjectiveWeights& w, const State& x,
                   const ControlVector& u, const AdjointState& l) {
    const State d = rhs_controlled(p, x, u);
    const double running = w.b1 * x.e + w.b2 * x.i +
                           0.5 * (w.w1 * u.u1 * u.u1 + w.w2 * u.u2 * u.u2 + w.w3 * u.u3 * u.u3);
    return running + l.l1 * d.s + l.l2 * d.e + l.l3 * d.i + l.l4 * d.t + l.l5 * d.r;
}

AdjointState adjoint_rhs(const Params& p, const ObjectiveWeights& w, const State& x,
                         const ControlVector& u, const AdjointState& l) {
    // phi = (1-u1) beta I S / N; its state gradient depends on the convention
    const double n = effective_population(p, x);
    const double c = (1.0 - u.u1) * p.beta;
    double phi_s, phi_e, phi_i, phi_t, phi_r;
    if (p.mixing == Mixing::ConstantN) {
        phi_s = c * x.i / n;
        phi_i = c * x.s / n;
        phi_e = phi_t = phi_r = 0.0;
    } else {
        const double n2 = n * n;
        phi_s = c * x.i * (n - x.s) / n2;
        phi_i = c * x.s * (n - x.i) / n2;
        phi_e = phi_t = phi_r = -c * x.i * x.s / n2;
    }
    const double dl = l.l1 - l.l2;
    AdjointState out;
    out.l1 = dl * phi_s + p.mu * l.l1;
    out.l2 = -w.b1 + dl * phi_e + (p.sigma + p.mu) * l.l2 - p.sigma * l.l3;
    out.l3 = -w.b2 + dl * phi_i + (p.eps1 + p.delta + p.mu + p.gamma + u.u2) * l.l3 -
             (p.gamma + u.u2) * l.l4 - p.eps1 * l.l5;
    out.l4 = dl * phi_t - p.nu * l.l3 +
             (p.nu + p.theta * p.delta + p.eps2 + p.mu + p.alpha + u.u3) * l.l4 -
             (p.alpha + u.u3 + p.eps2) * l.l5;
    out.l5 = dl * phi_r + p.mu * l.l5;
    return out;
}

ControlVector characterize_controls(const Params& p, const ObjectiveWeights& w,
                                    const ControlBounds& bounds, const State& x,
                                    const AdjointState& l) {
    const double n = effective_population(p, x);
    const double u1 = (l.l2 - l.l1) * p.beta * x.i * x.s / (n * w.w1);
    const double u2 = (l.l3 - l.l4) * x.i / w.w2;
    const double u3 = (l.l4 - l.l5) * x.t / w.w3;
    return {bounds.clamp(u1), bounds.clamp(u2), bounds.clamp(u3)};
}

double objective(const Trajectory& traj, const ObjectiveWeights& w) {
    traj.validate_shape();
    if (!traj.has_controls()) {
        throw ValidationError("objective: trajectory carries no controls");
    }
    std::vector<double> integrand(traj.states.size());
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        const State& x = traj.states[i];
        const ControlVector& u = traj.controls[i];
        integrand[i] = w.b1 * x.e + w.b2 * x.i +
                       0.5 * (w.w1 * u.u1 * u.u1 + w.w2 * u.u2 * u.u2 + w.w3 * u.u3 * u.u3);
    }
    return quadrature(integrand, traj.grid);
}

namespace {

std::vector<AdjointState> backward_sweep(const Params& p, const ObjectiveWeights& w,
                                         const TimeGrid& grid, const Trajectory& frozen) {
    AdjointField g = [&p, &w](double, const AdjointState& l, const State& x,
                              const ControlVector& u) { return adjoint_rhs(p, w, x, u, l); };
    return rk4_adjoint_backward(g, AdjointState{}, grid, frozen);
}

// Relative-change stopping rule: tol*||a||_1 - ||a - a_old||_1 >= 0 for every
// tracked array (each control, state and adjoint component over the grid).
bool converged_pass(double tol, const std::vector<std::array<double, 13>>& cur,
                    const std::vector<std::array<double, 13>>& old_) {
    for (int k = 0; k < 13; ++k) {
        double norm = 0;
        double diff = 0;
        for (std::size_t i = 0; i < cur.size(); ++i) {
            norm += std::abs(cur[i][k]);
            diff += std::abs(cur[i][k] - old_[i][k]);
        }
        if (tol * norm - diff < 0) {
            return false;
        }
    }
    return true;
}

std::array<double, 13> pack_node(const State& x, const ControlVector& u, const AdjointState& l) {
    return {u.u1, u.u2, u.u3, x.s, x.e, x.i, x.t, x.r, l.l1, l.l2, l.l3, l.l4, l.l5};
}

} // namespace

FbsResult solve_fbs(const Params& p, const State& x0, const FbsConfig& cfg) {
    cfg.validate();
    const TimeGrid& grid = cfg.grid;
    const std::size_t nodes = grid.n_nodes();

    std::vector<ControlVector> u(nodes, ControlVector{cfg.bounds.lower, cfg.bounds.lower,
                                                      cfg.bounds.lower});
    std::vector<std::array<double, 13>> prev(nodes, std::array<double, 13>{});

    FbsResult res;
    Trajectory forward;
    std::vector<AdjointState> adj;
    for (std::size_t iter = 1; iter <= cfg.max_iters; ++iter) {
        res.iterations = iter;
        try {
            forward = simulate_controlled(p, x0, grid, u);
            adj = backward_sweep(p, cfg.weights, grid, forward);
        } catch (const NonFiniteError& ex) {
            throw NonFiniteError(std::string(ex.what()) + " (sweep iteration " +
                                     std::to_string(iter) + ")",
                                 ex.step());
        }

        std::vector<ControlVector> u_new(nodes);
        for (std::size_t i = 0; i < nodes; ++i) {
            const ControlVector uc = characterize_controls(p, cfg.weights, cfg.bounds,
                                                           forward.states[i], adj[i]);
            u_new[i] = {cfg.relaxation * uc.u1 + (1.0 - cfg.relaxation) * u[i].u1,
                        cfg.relaxation * uc.u2 + (1.0 - cfg.relaxation) * u[i].u2,
                        cfg.relaxation * uc.u3 + (1.0 - cfg.relaxation) * u[i].u3};
        }

        Trajectory iterate = forward;
        iterate.controls = u_new;
        res.objective_history.push_back(objective(iterate, cfg.weights));

        std::vector<std::array<double, 13>> cur(nodes);
        for (std::size_t i = 0; i < nodes; ++i) {
            cur[i] = pack_node(forward.states[i], u_new[i], adj[i]);
        }
        const bool done = converged_pass(cfg.tol, cur, prev);
        prev = std::move(cur);
        u = std::move(u_new);
        if (done) {
            res.converged = true;
            break;
        }
    }

    // Final coherent pass: re-solve with the settled controls and return the
    // pure characterization along the resulting state/adjoint pair, so the
    // reported solution satisfies the optimality conditions pointwise.
    forward = simulate_controlled(p, x0, grid, u);
    adj = backward_sweep(p, cfg.weights, grid, forward);
    std::vector<ControlVector> u_final(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
        u_final[i] =
            characterize_controls(p, cfg.weights, cfg.bounds, forward.states[i], adj[i]);
    }
    res.trajectory = std::move(forward);
    res.trajectory.controls = std::move(u_final);
    res.trajectory.adjoints = std::move(adj);
    res.objective_history.push_back(objective(res.trajectory, cfg.weights));
    return res;
}

} // namespace nipah
