#include "nipah/model.hpp"

#include <cmath>
#include <string>

namespace nipah {

namespace {

void require_positive(double v, const char* name) {
    if (!(v > 0) || !std::isfinite(v)) {
        throw ValidationError(std::string("params.") + name + ": must be a finite positive number");
    }
}

} // namespace

void Params::validate() const {
    require_positive(pi, "pi");
    require_positive(beta, "beta");
    require_positive(sigma, "sigma");
    require_positive(gamma, "gamma");
    require_positive(delta, "delta");
    require_positive(nu, "nu");
    require_positive(alpha, "alpha");
    require_positive(eps1, "eps1");
    require_positive(eps2, "eps2");
    require_positive(mu, "mu");
    require_positive(n_total, "n_total");
    if (!(theta >= 0) || !std::isfinite(theta)) {
        throw ValidationError("params.theta: must be a finite nonnegative number");
    }
}

void State::validate_nonnegative(const char* context) const {
    const double vals[] = {s, e, i, t, r};
    const char* names[] = {"s", "e", "i", "t", "r"};
    for (int k = 0; k < 5; ++k) {
        if (!(vals[k] >= 0) || !std::isfinite(vals[k])) {
            throw ValidationError(std::string(context) + "." + names[k] +
                                  ": must be a finite nonnegative number");
        }
    }
}

void ObjectiveWeights::validate() const {
    if (!(w1 > 0) || !(w2 > 0) || !(w3 > 0)) {
        throw ValidationError("weights: w1, w2, w3 must be strictly positive");
    }
    if (!(b1 >= 0) || !(b2 >= 0)) {
        throw ValidationError("weights: b1, b2 must be nonnegative");
    }
}

void ControlBounds::validate() const {
    if (!(lower >= 0) || !(lower < upper) || !(upper < 1)) {
        throw ValidationError("bounds: require 0 <= lower < upper < 1");
    }
}

double effective_population(const Params& p, const State& x) {
    if (p.mixing == Mixing::ConstantN) {
        return p.n_total;
    }
    const double n = x.total();
    if (n == 0) {
        throw DomainError("force of infection undefined: dynamic population total is zero");
    }
    return n;
}

double force_of_infection(const Params& p, const State& x, double u1) {
    const double n = effective_population(p, x);
    if (x.i == 0) {
        return 0.0;
    }
    return (1.0 - u1) * p.beta * x.i / n;
}

State rhs_full(const Params& p, const State& x) {
    // the controlled system with u = 0, bit for bit
    return rhs_controlled(p, x, ControlVector{});
}

State rhs_treatment_free(const Params& p, const State& x) {
    State y = x;
    y.t = 0; // treatment compartment absent in this reduction
    const double n = (p.mixing == Mixing::ConstantN) ? p.n_total : y.total();
    if (p.mixing == Mixing::DynamicN && n == 0) {
        throw DomainError("force of infection undefined: dynamic population total is zero");
    }
    const double lam = (y.i == 0) ? 0.0 : p.beta * y.i / n;
    State d;
    d.s = p.pi - lam * y.s - p.mu * y.s;
    d.e = lam * y.s - (p.sigma + p.mu) * y.e;
    d.i = p.sigma * y.e - (p.eps1 + p.delta + p.mu) * y.i;
    d.t = 0;
    d.r = p.eps1 * y.i - p.mu * y.r;
    return d;
}

State rhs_controlled(const Params& p, const State& x, const ControlVector& u) {
    const double lam = force_of_infection(p, x, u.u1);
    State d;
    d.s = p.pi - lam * x.s - p.mu * x.s;
    d.e = lam * x.s - p.sigma * x.e - p.mu * x.e;
    d.i = p.sigma * x.e + p.nu * x.t - (p.eps1 + p.delta + p.mu) * x.i - (p.gamma + u.u2) * x.i;
    d.t = (p.gamma + u.u2) * x.i - (p.nu + p.theta * p.delta + p.eps2 + p.mu) * x.t -
          (p.alpha + u.u3) * x.t;
    d.r = (p.alpha + u.u3) * x.t + p.eps1 * x.i + p.eps2 * x.t - p.mu * x.r;
    return d;
}

State rhs_variant(const Params& p, const State& x, Variant v) {
    return v == Variant::TreatmentFree ? rhs_treatment_free(p, x) : rhs_full(p, x);
}

} // namespace nipah
