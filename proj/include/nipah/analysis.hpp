#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "nipah/integrator.hpp"
#include "nipah/model.hpp"

namespace nipah {

/// Composite rates P1..P4. Which p2 is in force depends on the variant:
/// treatment-free p2 = eps1+delta+mu, treatment p2 = gamma+eps1+delta+mu.
struct DerivedRates {
    double p1 = 0; // sigma + mu
    double p2 = 0;
    double p3 = 0; // alpha + nu + theta*delta + eps2 + mu
    double p4 = 0; // alpha + eps2

    static DerivedRates from(const Params& p, Variant v);

    /// p2*p3 - nu*gamma, the denominator that must stay positive for the
    /// treatment-model reproduction number and endemic state to exist.
    double treatment_denominator(const Params& p) const { return p2 * p3 - p.nu * p.gamma; }
};

/// Disease-free equilibrium (pi/mu, 0, ..., 0). Requires the constant-N
/// convention, as do all analysis operations below.
State dfe(const Params& p, Variant v);

/// New-infection matrix F and transfer matrix V linearized at the DFE
/// (2x2 for the treatment-free variant, 3x3 for the treatment variant).
struct NextGenMatrices {
    Eigen::MatrixXd f;
    Eigen::MatrixXd v;
};

NextGenMatrices next_generation_matrices(const Params& p, Variant v);

/// Spectral radius of F V^-1 computed by a numerical eigensolve.
double r0_spectral(const Params& p, Variant v);

struct R0Result {
    double value = 0;                    // closed-form reproduction number
    std::array<double, 3> factors{};     // transmission, progression, duration factors
};

/// Closed-form reproduction number plus its three-factor decomposition. The
/// closed form is cross-checked against the FV^-1 spectral radius to 1e-10
/// relative; disagreement throws (it would mean a transcription bug).
R0Result r0(const Params& p, Variant v);

struct EndemicEquilibrium {
    State state;
    double lambda_star = 0; // endemic force of infection mu*(R0 - 1)
};

/// Positive steady state; empty when R0 <= 1. The returned state is residual
/// checked: ||rhs||_inf <= 1e-6 * pi, else a DomainError carries the residual.
std::optional<EndemicEquilibrium> endemic_equilibrium(const Params& p, Variant v);

/// Central-difference Jacobian of a generic vector field at x,
/// step h = max(1e-6 * ||x||_inf, 1e-6).
Eigen::MatrixXd fd_jacobian(
    const std::function<std::vector<double>(const std::vector<double>&)>& f,
    const std::vector<double>& x);

enum class StabilityVerdict { Stable, Unstable, Indeterminate };

struct SpectrumReport {
    std::vector<std::complex<double>> eigenvalues; // sorted by real part, descending
    double max_real_part = 0;
    StabilityVerdict verdict = StabilityVerdict::Indeterminate;
};

/// Eigenvalues of the finite-difference Jacobian of the variant's rhs at x,
/// honoring the parameter's mixing convention. Coordinates are (S,E,I,R) for
/// the treatment-free variant and (S,E,I,T,R) for the treatment variant.
/// Verdict margin: stable if max Re < -1e-12, unstable if > 1e-12.
SpectrumReport jacobian_spectrum_at(const Params& p, const State& x, Variant v);

/// Linear disease-severity functional: sigma*E + P1*I for the treatment-free
/// variant, sigma*P3*E + P1*P3*I + nu*P1*T for the treatment variant.
double lyapunov_value(const Params& p, const State& x, Variant v);

struct LyapunovReport {
    double r0 = 0;
    double max_dfdt = 0;    // largest finite-difference slope of F along the trajectory
    double threshold = 0;   // 1e-8 * F(0) * dominant rate
    bool violation = false; // r0 <= 1 but max_dfdt exceeded the threshold
};

/// Differentiates the severity functional along a trajectory (which must have
/// been produced under constant-N with the matching variant). Trajectories
/// with fewer than 3 samples are rejected.
LyapunovReport lyapunov_derivative_check(const Trajectory& traj, const Params& p,
                                         Variant v);

/// Everything the analyze command reports for one variant.
struct AnalysisReport {
    Variant variant = Variant::Treatment;
    R0Result r0;
    DerivedRates rates;
    State dfe;
    SpectrumReport dfe_spectrum;
    bool dfe_locally_stable = false;
    bool endemic_exists = false;
    std::optional<EndemicEquilibrium> endemic;
};

AnalysisReport build_analysis_report(const Params& p, Variant v);

} // namespace nipah
