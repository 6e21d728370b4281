// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// fails. Usage: acceptance <scenarios-dir>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "nipah/analysis.hpp"
#include "nipah/optimal_control.hpp"
#include "nipah/scenario.hpp"
#include "test_support.hpp"

using namespace nipah;
using namespace nipah::testing;

namespace {

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& msg) {
        if (!cond && ok) {
            ok = false;
            detail = msg;
        }
    }
};

std::string g_scenarios;

// --- criterion 1: closed-form r0 vs spectral radius of F V^-1 ---------------

void criterion_1(Check& c) {
    const Params base = table1_params();
    for (Variant v : {Variant::TreatmentFree, Variant::Treatment}) {
        c.require(rel_gap(r0(base, v).value, r0_spectral(base, v)) <= 1e-10,
                  "baseline closed form vs spectral radius");
    }
    std::mt19937_64 rng(1001);
    for (int k = 0; k < 1000; ++k) {
        const Params p = draw_params(rng);
        const Variant v = (k % 2 == 0) ? Variant::TreatmentFree : Variant::Treatment;
        const double gap = rel_gap(r0(p, v).value, r0_spectral(p, v));
        c.require(gap <= 1e-10, "draw " + std::to_string(k) + " gap " + std::to_string(gap));
        if (!c.ok) return;
    }
}

// --- criterion 2: frozen baseline reproduction numbers ----------------------

void criterion_2(Check& c) {
    const Params p = table1_params();
    // frozen from an independent high-precision evaluation of the closed forms
    const double r_tf = 0.93938131850356727;
    const double r_t = 0.64953371396089354;
    const double got_tf = r0(p, Variant::TreatmentFree).value;
    const double got_t = r0(p, Variant::Treatment).value;
    c.require(std::abs(got_tf - r_tf) <= 1e-6,
              "treatment-free: got " + std::to_string(got_tf));
    c.require(std::abs(got_t - r_t) <= 1e-6, "treatment: got " + std::to_string(got_t));
}

// --- criterion 3: endemic formulas satisfy the steady-state equations -------

void criterion_3(Check& c) {
    std::mt19937_64 rng(3003);
    int done = 0;
    while (done < 200) {
        Params p = draw_params(rng);
        const double r_now = r0(p, Variant::Treatment).value;
        p.beta *= uniform(rng, 1.05, 5.0) / r_now; // r0 is linear in beta
        const double r = r0(p, Variant::Treatment).value;
        if (r <= 1.0) continue;

        const auto eq = endemic_equilibrium(p, Variant::Treatment); // residual-checked inside
        c.require(eq.has_value(), "no endemic state despite r0 > 1");
        if (!c.ok) return;

        const State d = rhs_full(p, eq->state);
        double resid = 0;
        for (double v : d.to_array()) resid = std::max(resid, std::abs(v));
        c.require(resid <= 1e-6 * p.pi,
                  "draw " + std::to_string(done) + " residual " + std::to_string(resid));
        c.require(rel_gap(eq->lambda_star, p.mu * (r - 1.0)) <= 1e-10,
                  "lambda** mismatch at draw " + std::to_string(done));
        if (!c.ok) return;
        ++done;
    }
}

// --- criterion 4: DFE stability verdict matches sign(r0 - 1) ----------------

void criterion_4(Check& c) {
    std::mt19937_64 rng(4004);
    int done = 0;
    while (done < 200) {
        const Params p = draw_params(rng);
        const Variant v = (done % 2 == 0) ? Variant::TreatmentFree : Variant::Treatment;
        const double r = r0(p, v).value;
        if (std::abs(r - 1.0) < 1e-3) continue;
        const SpectrumReport rep = jacobian_spectrum_at(p, dfe(p, v), v);
        const bool want_stable = r < 1.0;
        const bool is_stable = rep.verdict == StabilityVerdict::Stable;
        const bool is_unstable = rep.verdict == StabilityVerdict::Unstable;
        c.require(want_stable ? is_stable : is_unstable,
                  "draw " + std::to_string(done) + ": r0 = " + std::to_string(r) +
                      ", max Re = " + std::to_string(rep.max_real_part));
        if (!c.ok) return;
        ++done;
    }
}

// --- criterion 5: Lyapunov functional nonincreasing when r0 <= 1 ------------

void criterion_5(Check& c) {
    std::mt19937_64 rng(5005);
    const TimeGrid grid{0, 30, 3000};
    int done = 0;
    while (done < 50) {
        Params p = draw_params(rng);
        const double r_now = r0(p, Variant::Treatment).value;
        p.beta *= uniform(rng, 0.3, 0.98) / r_now;
        if (r0(p, Variant::Treatment).value > 1.0) continue;

        const State x0 = draw_state_in_region(rng, p.dfe_population());
        const Trajectory traj = simulate_uncontrolled(p, x0, grid, Variant::Treatment);

        const LyapunovReport rep = lyapunov_derivative_check(traj, p, Variant::Treatment);
        c.require(!rep.violation, "derivative check flagged draw " + std::to_string(done));

        const double f0 = lyapunov_value(p, traj.states.front(), Variant::Treatment);
        double prev = f0;
        for (std::size_t i = 1; i < traj.states.size(); ++i) {
            const double cur = lyapunov_value(p, traj.states[i], Variant::Treatment);
            if (cur > prev + 1e-8 * f0) {
                c.require(false, "increase at draw " + std::to_string(done) + " node " +
                                     std::to_string(i));
                return;
            }
            prev = cur;
        }
        if (!c.ok) return;
        ++done;
    }
}

// --- criterion 6: positivity and invariant region ----------------------------

void criterion_6(Check& c) {
    std::mt19937_64 rng(6006);
    const TimeGrid grid{0, 30, 3000};
    for (int k = 0; k < 100; ++k) {
        const Params p = draw_params(rng);
        State x0 = draw_state_in_region(rng, p.dfe_population());
        if (k % 4 == 0) x0.e = 0;
        if (k % 5 == 0) x0.r = 0;
        const Trajectory traj = simulate_uncontrolled(p, x0, grid, Variant::Treatment);
        const TrajectoryChecks chk = check_trajectory(traj, p);
        c.require(chk.region_applicable, "draw started outside the region");
        c.require(chk.positivity_ok, "positivity violated at draw " + std::to_string(k) +
                                         ", min = " + std::to_string(chk.min_component));
        c.require(chk.region_ok, "region bound violated at draw " + std::to_string(k));
        if (!c.ok) return;
    }
}

// --- criterion 7: empirical RK4 order ----------------------------------------

void criterion_7(Check& c) {
    const VectorField f = [](double, const std::vector<double>& y) {
        return std::vector<double>{-y[0]};
    };
    auto err_at = [&](std::size_t n) {
        return std::abs(rk4_forward(f, {1.0}, {0, 1, n}).back()[0] - std::exp(-1.0));
    };
    const double order = std::log2(err_at(100) / err_at(200));
    c.require(order >= 3.8 && order <= 4.2, "observed order " + std::to_string(order));
}

// --- criterion 8: adjoint system equals -grad_x H ----------------------------

void criterion_8(Check& c) {
    std::mt19937_64 rng(8008);
    for (int k = 0; k < 1000; ++k) {
        Params p = draw_params(rng);
        p.mixing = (k % 2 == 0) ? Mixing::ConstantN : Mixing::DynamicN;
        const State x = draw_state_in_region(rng, p.dfe_population());
        const ControlVector u{uniform(rng, 0, 0.99), uniform(rng, 0, 0.99),
                              uniform(rng, 0, 0.99)};
        const AdjointState l{uniform(rng, -50, 50), uniform(rng, -50, 50),
                             uniform(rng, -50, 50), uniform(rng, -50, 50),
                             uniform(rng, -50, 50)};
        ObjectiveWeights w;
        w.b1 = uniform(rng, 0, 10);
        w.b2 = uniform(rng, 0, 10);
        w.w1 = log_uniform(rng, 0.1, 100);
        w.w2 = log_uniform(rng, 0.1, 100);
        w.w3 = log_uniform(rng, 0.1, 100);

        const AdjointState got = adjoint_rhs(p, w, x, u, l);

        const auto base = x.to_array();
        double xmax = 1.0;
        for (double v : base) xmax = std::max(xmax, std::abs(v));
        const double h = 1e-6 * xmax;
        std::array<double, 5> fd{};
        for (int j = 0; j < 5; ++j) {
            auto xp = base;
            auto xm = base;
            xp[j] += h;
            xm[j] -= h;
            fd[j] = -(hamiltonian(p, w, State::from_array(xp), u, l) -
                      hamiltonian(p, w, State::from_array(xm), u, l)) /
                    (2 * h);
        }
        double scale = 1e-8;
        for (double v : fd) scale = std::max(scale, std::abs(v));
        for (int j = 0; j < 5; ++j) {
            const double diff = std::abs(got.to_array()[j] - fd[j]);
            c.require(diff <= 1e-6 * scale, "draw " + std::to_string(k) + " component " +
                                                std::to_string(j) + " diff " +
                                                std::to_string(diff));
            if (!c.ok) return;
        }
    }
}

// --- criterion 9: characterization minimizes H over a 100^3 control grid ----

void criterion_9(Check& c) {
    std::mt19937_64 rng(9009);
    ControlBounds bounds;
    const int n = 100;
    const double spacing = (bounds.upper - bounds.lower) / (n - 1);
    for (int k = 0; k < 100; ++k) {
        Params p = table1_params();
        p.mixing = (k % 2 == 0) ? Mixing::ConstantN : Mixing::DynamicN;
        const State x = draw_state_in_region(rng, p.dfe_population());
        ObjectiveWeights w;
        w.b1 = uniform(rng, 0, 10);
        w.b2 = uniform(rng, 0, 10);
        w.w1 = log_uniform(rng, 1, 100);
        w.w2 = log_uniform(rng, 1, 100);
        w.w3 = log_uniform(rng, 1, 100);
        const double n_eff = (p.mixing == Mixing::ConstantN) ? p.n_total : x.total();

        AdjointState l{};
        l.l1 = uniform(rng, -1, 1);
        l.l2 = l.l1 + uniform(rng, -0.5, 1.5) * w.w1 * n_eff / (p.beta * x.i * x.s);
        l.l4 = uniform(rng, -1, 1);
        l.l3 = l.l4 + uniform(rng, -0.5, 1.5) * w.w2 / x.i;
        l.l5 = l.l4 - uniform(rng, -0.5, 1.5) * w.w3 / x.t;

        const ControlVector best = characterize_controls(p, w, bounds, x, l);

        double h_min = std::numeric_limits<double>::infinity();
        ControlVector arg{};
        for (int a = 0; a < n; ++a) {
            const double u1 = bounds.lower + a * spacing;
            for (int b = 0; b < n; ++b) {
                const double u2 = bounds.lower + b * spacing;
                for (int d = 0; d < n; ++d) {
                    const ControlVector u{u1, u2, bounds.lower + d * spacing};
                    const double h = hamiltonian(p, w, x, u, l);
                    if (h < h_min) {
                        h_min = h;
                        arg = u;
                    }
                }
            }
        }
        c.require(std::abs(best.u1 - arg.u1) <= spacing + 1e-12,
                  "u1 off-grid at draw " + std::to_string(k));
        c.require(std::abs(best.u2 - arg.u2) <= spacing + 1e-12,
                  "u2 off-grid at draw " + std::to_string(k));
        c.require(std::abs(best.u3 - arg.u3) <= spacing + 1e-12,
                  "u3 off-grid at draw " + std::to_string(k));
        if (!c.ok) return;
    }
}

// --- criterion 10: solver efficacy on the shipped controlled scenario -------

void criterion_10(Check& c) {
    const Scenario sc = load_scenario_file(g_scenarios + "/baseline_controlled.json");
    const FbsResult res = solve_fbs(sc.params, sc.x0, sc.fbs);
    c.require(res.converged, "solver did not converge");

    const Trajectory baseline = simulate_controlled(sc.params, sc.x0, sc.grid, ControlVector{});
    const double j_opt = res.objective_history.back();
    const double j_base = objective(baseline, sc.fbs.weights);
    c.require(j_opt < j_base, "objective not improved: " + std::to_string(j_opt) + " vs " +
                                  std::to_string(j_base));

    const std::size_t nodes = baseline.states.size();
    std::vector<double> i_opt(nodes);
    std::vector<double> i_base(nodes);
    std::size_t e_below = 0;
    for (std::size_t i = 0; i < nodes; ++i) {
        i_opt[i] = res.trajectory.states[i].i;
        i_base[i] = baseline.states[i].i;
        if (res.trajectory.states[i].e < baseline.states[i].e) ++e_below;
    }
    c.require(quadrature(i_opt, sc.grid) < quadrature(i_base, sc.grid),
              "cumulative infections not reduced");
    c.require(res.trajectory.states.back().r > baseline.states.back().r,
              "final recovered pool not increased");
    c.require(e_below * 10 >= nodes * 9, "exposed curve below baseline at only " +
                                             std::to_string(e_below) + "/" +
                                             std::to_string(nodes) + " nodes");
}

// --- criterion 11: scenario monotonicity across the transmission settings ---

void criterion_11(Check& c) {
    const Scenario sc = load_scenario_file(g_scenarios + "/baseline.json");
    Params lo = sc.params;
    lo.beta = 0.45;
    lo.nu = 0.35;
    Params hi = sc.params;
    hi.beta = 2.0;
    hi.nu = 1.5;
    const Trajectory tl = simulate_uncontrolled(lo, sc.x0, sc.grid, Variant::Treatment);
    const Trajectory th = simulate_uncontrolled(hi, sc.x0, sc.grid, Variant::Treatment);
    double peak_lo = 0, peak_hi = 0;
    std::vector<double> il(tl.states.size()), ih(th.states.size());
    for (std::size_t i = 0; i < tl.states.size(); ++i) {
        il[i] = tl.states[i].i;
        ih[i] = th.states[i].i;
        peak_lo = std::max(peak_lo, il[i]);
        peak_hi = std::max(peak_hi, ih[i]);
    }
    c.require(peak_lo < peak_hi, "peak ordering violated");
    c.require(quadrature(il, tl.grid) < quadrature(ih, th.grid),
              "cumulative ordering violated");
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: acceptance <scenarios-dir>\n";
        return 2;
    }
    g_scenarios = argv[1];

    struct Entry {
        int id;
        const char* label;
        std::function<void(Check&)> run;
    };
    const std::vector<Entry> entries = {
        {1, "closed-form r0 equals FV^-1 spectral radius (baseline + 1000 draws, 1e-10)",
         criterion_1},
        {2, "baseline r0 values match the frozen independent evaluation (1e-6)", criterion_2},
        {3, "endemic formulas: ||rhs|| <= 1e-6*pi and lambda** = mu*(r0-1) (200 draws)",
         criterion_3},
        {4, "DFE stability verdict matches sign(r0 - 1) (200 draws)", criterion_4},
        {5, "Lyapunov functional nonincreasing for r0 <= 1 (50 draws)", criterion_5},
        {6, "positivity and invariant region along 100 random simulations", criterion_6},
        {7, "RK4 empirical order in [3.8, 4.2]", criterion_7},
        {8, "adjoint rhs equals -grad H by central differences (1000 points)", criterion_8},
        {9, "control characterization minimizes H over a 100^3 grid (100 points)", criterion_9},
        {10, "forward-backward sweep beats the uncontrolled baseline on the shipped scenario",
         criterion_10},
        {11, "peak and cumulative infections ordered across transmission settings",
         criterion_11},
    };

    int failures = 0;
    for (const Entry& e : entries) {
        Check c;
        const auto start = std::chrono::steady_clock::now();
        try {
            e.run(c);
        } catch (const std::exception& ex) {
            c.ok = false;
            c.detail = std::string("exception: ") + ex.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%s] criterion %2d (%5.1fs): %s%s%s\n", c.ok ? "PASS" : "FAIL", e.id, secs,
                    e.label, c.ok ? "" : " -- ", c.ok ? "" : c.detail.c_str());
        std::fflush(stdout);
        if (!c.ok) ++failures;
    }
    if (failures > 0) {
        std::printf("%d criterion(s) FAILED\n", failures);
        return 1;
    }
    std::printf("all %zu criteria passed\n", entries.size());
    return 0;
}
