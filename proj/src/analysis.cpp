#include "nipah/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace nipah {

namespace {

void require_constant_n(const Params& p, const char* op) {
    if (p.mixing != Mixing::ConstantN) {
        throw DomainError(std::string(op) + ": requires the constant-N mixing convention");
    }
}

double relative_gap(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

} // namespace

DerivedRates DerivedRates::from(const Params& p, Variant v) {
    DerivedRates d;
    d.p1 = p.sigma + p.mu;
    d.p2 = (v == Variant::TreatmentFree) ? p.eps1 + p.delta + p.mu
                                         : p.gamma + p.eps1 + p.delta + p.mu;
    d.p3 = p.alpha + p.nu + p.theta * p.delta + p.eps2 + p.mu;
    d.p4 = p.alpha + p.eps2;
    return d;
}

State dfe(const Params& p, Variant v) {
    require_constant_n(p, "dfe");
    (void)v;
    return {p.pi / p.mu, 0, 0, 0, 0};
}

NextGenMatrices next_generation_matrices(const Params& p, Variant v) {
    require_constant_n(p, "next_generation_matrices");
    const DerivedRates d = DerivedRates::from(p, v);
    const double new_infection = p.beta * p.pi / (p.n_total * p.mu);
    NextGenMatrices m;
    if (v == Variant::TreatmentFree) {
        m.f = Eigen::MatrixXd::Zero(2, 2);
        m.f(0, 1) = new_infection;
        m.v = Eigen::MatrixXd::Zero(2, 2);
        m.v(0, 0) = d.p1;
        m.v(1, 0) = -p.sigma;
        m.v(1, 1) = d.p2;
    } else {
        m.f = Eigen::MatrixXd::Zero(3, 3);
        m.f(0, 1) = new_infection;
        m.v = Eigen::MatrixXd::Zero(3, 3);
        m.v(0, 0) = d.p1;
        m.v(1, 0) = -p.sigma;
        m.v(1, 1) = d.p2;
        m.v(1, 2) = -p.nu;
        m.v(2, 1) = -p.gamma;
        m.v(2, 2) = d.p3;
    }
    const double det = m.v.determinant();
    const double scale = std::pow(m.v.cwiseAbs().maxCoeff(), m.v.rows());
    if (std::abs(det) <= 1e-14 * scale) {
        std::ostringstream os;
        os << "next_generation_matrices: V is singular, det(V) = " << det;
        throw DomainError(os.str());
    }
    return m;
}

double r0_spectral(const Params& p, Variant v) {
    const NextGenMatrices m = next_generation_matrices(p, v);
    const Eigen::MatrixXd k = m.f * m.v.inverse();
    const Eigen::VectorXcd eigs = Eigen::EigenSolver<Eigen::MatrixXd>(k, false).eigenvalues();
    double rho = 0;
    for (Eigen::Index i = 0; i < eigs.size(); ++i) {
        rho = std::max(rho, std::abs(eigs[i]));
    }
    return rho;
}

R0Result r0(const Params& p, Variant v) {
    require_constant_n(p, "r0");
    const DerivedRates d = DerivedRates::from(p, v);
    R0Result out;
    out.factors[0] = p.beta * p.pi / (p.n_total * p.mu); // transmission at the DFE
    out.factors[1] = p.sigma / d.p1;                     // survives the exposed class
    if (v == Variant::TreatmentFree) {
        out.factors[2] = 1.0 / d.p2; // mean infectious period
    } else {
        const double denom = d.treatment_denominator(p);
        if (denom <= 0) {
            std::ostringstream os;
            os << "r0: reproduction number formula invalid, p2*p3 - nu*gamma = " << denom;
            throw DomainError(os.str());
        }
        out.factors[2] = d.p3 / denom; // infectious period inflated by re-infection
    }
    out.value = out.factors[0] * out.factors[1] * out.factors[2];

    // cross-check against the numerically computed spectral radius of F V^-1
    const double rho = r0_spectral(p, v);
    if (relative_gap(out.value, rho) > 1e-10) {
        std::ostringstream os;
        os << "r0: closed form " << out.value << " disagrees with spectral radius " << rho;
        throw DomainError(os.str());
    }
    return out;
}

std::optional<EndemicEquilibrium> endemic_equilibrium(const Params& p, Variant v) {
    require_constant_n(p, "endemic_equilibrium");
    const double r = r0(p, v).value;
    if (r <= 1.0) {
        return std::nullopt;
    }
    const DerivedRates d = DerivedRates::from(p, v);
    const double lam = p.mu * (r - 1.0);
    const double denom = lam + p.mu;
    EndemicEquilibrium eq;
    eq.lambda_star = lam;
    State& x = eq.state;
    x.s = p.pi / denom;
    x.e = p.pi * lam / (d.p1 * denom);
    if (v == Variant::TreatmentFree) {
        x.i = p.sigma * p.pi * lam / (d.p1 * d.p2 * denom);
        x.t = 0;
        x.r = p.eps1 * p.sigma * p.pi * lam / (p.mu * d.p1 * d.p2 * denom);
    } else {
        const double dd = d.treatment_denominator(p);
        x.i = d.p3 * p.sigma * p.pi * lam / (d.p1 * denom * dd);
        x.t = p.pi * p.sigma * p.gamma * lam / (d.p1 * denom * dd);
        x.r = p.pi * p.sigma * lam * (p.eps1 * d.p3 + p.gamma * d.p4) / (p.mu * d.p1 * denom * dd);
    }

    const State deriv = rhs_variant(p, x, v);
    double resid = 0;
    for (double c : deriv.to_array()) {
        resid = std::max(resid, std::abs(c));
    }
    if (resid > 1e-6 * p.pi) {
        std::ostringstream os;
        os << "endemic_equilibrium: residual check failed, ||rhs||_inf = " << resid
           << " (components " << deriv.s << ", " << deriv.e << ", " << deriv.i << ", " << deriv.t
           << ", " << deriv.r << ")";
        throw DomainError(os.str());
    }
    return eq;
}

Eigen::MatrixXd fd_jacobian(
    const std::function<std::vector<double>(const std::vector<double>&)>& f,
    const std::vector<double>& x) {
    const auto n = static_cast<Eigen::Index>(x.size());
    double xmax = 0;
    for (double v : x) {
        xmax = std::max(xmax, std::abs(v));
    }
    const double h = std::max(1e-6 * xmax, 1e-6);
    Eigen::MatrixXd jac(n, n);
    std::vector<double> xp = x;
    std::vector<double> xm = x;
    for (Eigen::Index j = 0; j < n; ++j) {
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        const auto fp = f(xp);
        const auto fm = f(xm);
        for (Eigen::Index i = 0; i < n; ++i) {
            jac(i, j) = (fp[i] - fm[i]) / (2.0 * h);
        }
        xp[j] = x[j];
        xm[j] = x[j];
    }
    return jac;
}

namespace {

SpectrumReport spectrum_of(const Eigen::MatrixXd& a) {
    SpectrumReport rep;
    const Eigen::VectorXcd eigs = Eigen::EigenSolver<Eigen::MatrixXd>(a, false).eigenvalues();
    rep.eigenvalues.reserve(static_cast<std::size_t>(eigs.size()));
    for (Eigen::Index i = 0; i < eigs.size(); ++i) {
        rep.eigenvalues.push_back(eigs[i]);
    }
    std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end(),
              [](const std::complex<double>& a_, const std::complex<double>& b_) {
                  if (a_.real() != b_.real()) return a_.real() > b_.real();
                  return a_.imag() < b_.imag();
              });
    rep.max_real_part = rep.eigenvalues.front().real();
    if (rep.max_real_part < -1e-12) {
        rep.verdict = StabilityVerdict::Stable;
    } else if (rep.max_real_part > 1e-12) {
        rep.verdict = StabilityVerdict::Unstable;
    } else {
        rep.verdict = StabilityVerdict::Indeterminate;
    }
    return rep;
}

} // namespace

SpectrumReport jacobian_spectrum_at(const Params& p, const State& x, Variant v) {
    std::vector<double> packed;
    std::function<std::vector<double>(const std::vector<double>&)> f;
    if (v == Variant::TreatmentFree) {
        packed = {x.s, x.e, x.i, x.r};
        f = [&p](const std::vector<double>& y) {
            const State d = rhs_treatment_free(p, {y[0], y[1], y[2], 0, y[3]});
            return std::vector<double>{d.s, d.e, d.i, d.r};
        };
    } else {
        packed = {x.s, x.e, x.i, x.t, x.r};
        f = [&p](const std::vector<double>& y) {
            const State d = rhs_full(p, {y[0], y[1], y[2], y[3], y[4]});
            return std::vector<double>{d.s, d.e, d.i, d.t, d.r};
        };
    }
    return spectrum_of(fd_jacobian(f, packed));
}

double lyapunov_value(const Params& p, const State& x, Variant v) {
    const DerivedRates d = DerivedRates::from(p, v);
    if (v == Variant::TreatmentFree) {
        return p.sigma * x.e + d.p1 * x.i;
    }
    return p.sigma * d.p3 * x.e + d.p1 * d.p3 * x.i + p.nu * d.p1 * x.t;
}

LyapunovReport lyapunov_derivative_check(const Trajectory& traj, const Params& p, Variant v) {
    traj.validate_shape();
    if (traj.states.size() < 3) {
        throw ValidationError("lyapunov_derivative_check: trajectory too short (< 3 samples)");
    }
    const DerivedRates d = DerivedRates::from(p, v);
    LyapunovReport rep;
    rep.r0 = r0(p, v).value;

    const double h = traj.grid.dt();
    const double f0 = lyapunov_value(p, traj.states.front(), v);
    double prev = f0;
    rep.max_dfdt = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < traj.states.size(); ++i) {
        const double cur = lyapunov_value(p, traj.states[i], v);
        rep.max_dfdt = std::max(rep.max_dfdt, (cur - prev) / h);
        prev = cur;
    }
    const double dominant_rate =
        std::max({d.p1, d.p2, v == Variant::Treatment ? d.p3 : 0.0, p.beta, p.mu});
    rep.threshold = 1e-8 * f0 * dominant_rate;
    rep.violation = (rep.r0 <= 1.0) && (rep.max_dfdt > rep.threshold);
    return rep;
}

AnalysisReport build_analysis_report(const Params& p, Variant v) {
    AnalysisReport rep;
    rep.variant = v;
    rep.r0 = r0(p, v);
    rep.rates = DerivedRates::from(p, v);
    rep.dfe = dfe(p, v);
    rep.dfe_spectrum = jacobian_spectrum_at(p, rep.dfe, v);
    rep.dfe_locally_stable = rep.dfe_spectrum.verdict == StabilityVerdict::Stable;
    rep.endemic = endemic_equilibrium(p, v);
    rep.endemic_exists = rep.endemic.has_value();
    return rep;
}

} // namespace nipah
