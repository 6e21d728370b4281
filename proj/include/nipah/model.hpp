#pragma once

#include <array>
#include <cstddef>

#include "nipah/errors.hpp"

namespace nipah {

/// Convention for the population N appearing in the force of infection beta*I/N.
/// ConstantN uses the fixed census size n_total; DynamicN uses the current
/// compartment total S+E+I+T+R.
enum class Mixing { ConstantN, DynamicN };

/// Which ODE system is under study: the reduced model without a treatment
/// compartment, or the full model with one.
enum class Variant { TreatmentFree, Treatment };

/// Rate constants of the transmission model. All rates are per unit model time
/// (the scenario file declares the unit; years by default).
struct Params {
    double pi = 0;      // recruitment (people per time)
    double beta = 0;    // transmission rate
    double sigma = 0;   // exposed -> infected progression
    double gamma = 0;   // infected -> treatment progression
    double delta = 0;   // disease-induced death rate
    double nu = 0;      // re-infection rate inside the treatment class
    double alpha = 0;   // recovery-by-treatment rate
    double eps1 = 0;    // natural recovery, infected class
    double eps2 = 0;    // natural recovery, treated class
    double theta = 0;   // death modification factor for the treated class
    double mu = 0;      // natural death rate
    double n_total = 0; // census population for the constant-N convention
    Mixing mixing = Mixing::ConstantN;

    /// Carrying capacity pi/mu of the invariant region.
    double dfe_population() const { return pi / mu; }

    /// Throws ValidationError naming the offending field. Every rate and
    /// n_total must be strictly positive; theta only nonnegative.
    void validate() const;
};

/// Compartment sizes (people).
struct State {
    double s = 0, e = 0, i = 0, t = 0, r = 0;

    double total() const { return s + e + i + t + r; }

    std::array<double, 5> to_array() const { return {s, e, i, t, r}; }
    static State from_array(const std::array<double, 5>& a) {
        return {a[0], a[1], a[2], a[3], a[4]};
    }

    /// Throws ValidationError if any compartment is negative or non-finite.
    void validate_nonnegative(const char* context) const;
};

/// Time-dependent control intensities: u1 prevention, u2 treatment effort in
/// the infectious class, u3 treatment effort in the treatment class.
struct ControlVector {
    double u1 = 0, u2 = 0, u3 = 0;
};

/// Costate vector, one multiplier per compartment.
struct AdjointState {
    double l1 = 0, l2 = 0, l3 = 0, l4 = 0, l5 = 0;

    std::array<double, 5> to_array() const { return {l1, l2, l3, l4, l5}; }
    static AdjointState from_array(const std::array<double, 5>& a) {
        return {a[0], a[1], a[2], a[3], a[4]};
    }
};

/// Weights of the running cost b1*E + b2*I + (w1*u1^2 + w2*u2^2 + w3*u3^2)/2.
struct ObjectiveWeights {
    double b1 = 1, b2 = 1;
    double w1 = 100, w2 = 100, w3 = 100;

    void validate() const; // w's strictly positive, b's nonnegative
};

/// Admissible range for every control component.
struct ControlBounds {
    double lower = 0.0;
    double upper = 0.99;

    void validate() const; // 0 <= lower < upper < 1
    double clamp(double u) const { return u < lower ? lower : (u > upper ? upper : u); }
};

/// Population N in force-of-infection denominators under the active mixing
/// convention. Throws DomainError if the dynamic total is zero.
double effective_population(const Params& p, const State& x);

/// Per-susceptible infection rate (1-u1)*beta*I/N. Zero when I = 0.
double force_of_infection(const Params& p, const State& x, double u1);

/// Right-hand side of the full (treatment) system.
State rhs_full(const Params& p, const State& x);

/// Right-hand side of the treatment-free reduction: gamma = nu = alpha =
/// theta = 0 and T frozen at zero. The T component of x is ignored.
State rhs_treatment_free(const Params& p, const State& x);

/// Right-hand side of the controlled system; with u = 0 identical to rhs_full.
State rhs_controlled(const Params& p, const State& x, const ControlVector& u);

/// Dispatch by variant (uncontrolled systems).
State rhs_variant(const Params& p, const State& x, Variant v);

} // namespace nipah
