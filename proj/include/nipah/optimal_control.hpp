#pragma once

#include <cstddef>
#include <vector>

#include "nipah/integrator.hpp"
#include "nipah/model.hpp"

namespace nipah {

/// Knobs of the forward-backward sweep solver.
struct FbsConfig {
    double relaxation = 0.5; // weight of the characterized controls in the update
    double tol = 1e-3;       // relative convergence tolerance
    std::size_t max_iters = 100;
    ObjectiveWeights weights;
    ControlBounds bounds;
    TimeGrid grid;

    void validate() const;
};

struct FbsResult {
    Trajectory trajectory; // states + controls + adjoints on the grid
    std::vector<double> objective_history;
    bool converged = false;
    std::size_t iterations = 0;
};

/// Running cost plus costate-weighted controlled dynamics:
/// b1*E + b2*I + (w1*u1^2 + w2*u2^2 + w3*u3^2)/2 + l . rhs_controlled(x, u).
double hamiltonian(const Params& p, const ObjectiveWeights& w, const State& x,
                   const ControlVector& u, const AdjointState& l);

/// Costate dynamics dl/dt = -dH/dx. The gradient honors the mixing
/// convention: under DynamicN the population total is differentiated through.
AdjointState adjoint_rhs(const Params& p, const ObjectiveWeights& w, const State& x,
                         const ControlVector& u, const AdjointState& l);

/// Pointwise minimizer of the Hamiltonian over the admissible box: the
/// stationary values of dH/du clamped to the bounds.
///   u1 = (l2 - l1) * beta * I * S / (N * w1)
///   u2 = (l3 - l4) * I / w2
///   u3 = (l4 - l5) * T / w3
ControlVector characterize_controls(const Params& p, const ObjectiveWeights& w,
                                    const ControlBounds& bounds, const State& x,
                                    const AdjointState& l);

/// Trapezoid quadrature of the running cost over a trajectory that carries
/// controls; throws ValidationError otherwise.
double objective(const Trajectory& traj, const ObjectiveWeights& w);

/// Forward-backward sweep: alternate a forward RK4 solve of the controlled
/// system and a backward RK4 solve of the adjoint system (zero terminal
/// costates), then relax the controls toward their characterization, until
/// controls, states and adjoints all pass the relative-change test or
/// max_iters is reached. Non-convergence is reported, not thrown; a
/// non-finite sample is thrown as NonFiniteError with the iteration index.
FbsResult solve_fbs(const Params& p, const State& x0, const FbsConfig& cfg);

} // namespace nipah
