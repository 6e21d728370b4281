#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nipah/integrator.hpp"
#include "test_support.hpp"

using namespace nipah;
using namespace nipah::testing;

TEST_CASE("time grid validation") {
    CHECK_THROWS_AS((TimeGrid{0, 0, 10}.validate()), ValidationError);
    CHECK_THROWS_AS((TimeGrid{1, 0, 10}.validate()), ValidationError);
    CHECK_THROWS_AS((TimeGrid{0, 1, 1}.validate()), ValidationError);
    CHECK_NOTHROW((TimeGrid{0, 1, 2}.validate()));
}

TEST_CASE("rk4 forward: constant field stays put") {
    const VectorField f = [](double, const std::vector<double>&) {
        return std::vector<double>{0.0};
    };
    const auto out = rk4_forward(f, {3.5}, {0, 2, 10});
    REQUIRE(out.size() == 11);
    for (const auto& s : out) {
        CHECK(s[0] == 3.5);
    }
}

TEST_CASE("rk4 forward: exponential decay converges at fourth order") {
    const VectorField f = [](double, const std::vector<double>& y) {
        return std::vector<double>{-y[0]};
    };
    auto err_at = [&](std::size_t n) {
        const auto out = rk4_forward(f, {1.0}, {0, 1, n});
        return std::abs(out.back()[0] - std::exp(-1.0));
    };
    const double e1 = err_at(100);
    const double e2 = err_at(200);
    CHECK(e1 < 1e-8);
    const double order = std::log2(e1 / e2);
    CHECK(order > 3.8);
    CHECK(order < 4.2);
}

TEST_CASE("rk4 forward: 2x2 linear system against the matrix-exponential solution") {
    // y' = A y with A = [[0,1],[-2,-3]], eigenvalues -1 and -2;
    // y0 = (1,0) gives y(t) = (2e^-t - e^-2t, -2e^-t + 2e^-2t).
    const VectorField f = [](double, const std::vector<double>& y) {
        return std::vector<double>{y[1], -2.0 * y[0] - 3.0 * y[1]};
    };
    const TimeGrid grid{0, 2, 2000};
    const auto out = rk4_forward(f, {1.0, 0.0}, grid);
    for (std::size_t i = 0; i < out.size(); i += 100) {
        const double t = grid.time_at(i);
        const double y0 = 2 * std::exp(-t) - std::exp(-2 * t);
        const double y1 = -2 * std::exp(-t) + 2 * std::exp(-2 * t);
        CHECK(std::abs(out[i][0] - y0) < 1e-11);
        CHECK(std::abs(out[i][1] - y1) < 1e-11);
    }
}

TEST_CASE("rk4 forward: non-finite derivative reports the step") {
    const VectorField f = [](double t, const std::vector<double>& y) {
        return std::vector<double>{t < 0.5 ? -y[0] : std::numeric_limits<double>::quiet_NaN()};
    };
    try {
        rk4_forward(f, {1.0}, {0, 1, 10});
        FAIL("expected NonFiniteError");
    } catch (const NonFiniteError& ex) {
        CHECK(ex.step() == 5); // the step from t=0.4 is the first whose stages touch t >= 0.5
    }
}

TEST_CASE("rk4 backward") {
    SUBCASE("dl/dt = l with l(tf) = 1 lands on e^{t0 - tf}") {
        const VectorField f = [](double, const std::vector<double>& y) {
            return std::vector<double>{y[0]};
        };
        const auto out = rk4_backward(f, {1.0}, {0, 1, 400});
        CHECK(std::abs(out.front()[0] - std::exp(-1.0)) < 1e-12);
        CHECK(out.back()[0] == 1.0); // terminal data stored untouched
    }

    SUBCASE("zero terminal data with a linear homogeneous field stays zero") {
        const VectorField f = [](double, const std::vector<double>& y) {
            return std::vector<double>{3.0 * y[0] - y[1], 0.5 * y[1]};
        };
        const auto out = rk4_backward(f, {0.0, 0.0}, {0, 5, 100});
        for (const auto& s : out) {
            CHECK(s[0] == 0.0);
            CHECK(s[1] == 0.0);
        }
    }

    SUBCASE("matches forward integration of the time-reversed equation") {
        // dl/dt = -l backward from l(tf)=1 equals m' = +m forward from m(0)=1,
        // read in reverse.
        const TimeGrid grid{0, 1, 250};
        const VectorField fb = [](double, const std::vector<double>& y) {
            return std::vector<double>{-y[0]};
        };
        const VectorField ff = [](double, const std::vector<double>& y) {
            return std::vector<double>{y[0]};
        };
        const auto bwd = rk4_backward(fb, {1.0}, grid);
        const auto fwd = rk4_forward(ff, {1.0}, grid);
        for (std::size_t i = 0; i <= grid.n_steps; ++i) {
            CHECK(rel_gap(bwd[i][0], fwd[grid.n_steps - i][0]) < 1e-10);
        }
    }
}

TEST_CASE("quadrature") {
    const TimeGrid grid{0, 2, 100};
    SUBCASE("constant integrand") {
        std::vector<double> one(grid.n_nodes(), 1.0);
        CHECK(rel_gap(quadrature(one, grid), 2.0) < 1e-14);
    }
    SUBCASE("trapezoid is exact on linear integrands") {
        const TimeGrid g{0, 1, 100};
        std::vector<double> v(g.n_nodes());
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] = g.time_at(i);
        }
        CHECK(rel_gap(quadrature(v, g), 0.5) < 1e-14);
    }
    SUBCASE("quadratic integrand within 1e-4") {
        const TimeGrid g{0, 1, 100};
        std::vector<double> v(g.n_nodes());
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double t = g.time_at(i);
            v[i] = t * t;
        }
        CHECK(std::abs(quadrature(v, g) - 1.0 / 3.0) < 1e-4);
    }
    SUBCASE("length mismatch is rejected") {
        std::vector<double> v(grid.n_nodes() - 1, 1.0);
        CHECK_THROWS_AS(quadrature(v, grid), ValidationError);
    }
}

TEST_CASE("trajectory interpolation hits nodes exactly") {
    const Params p = table1_params();
    const TimeGrid grid{0, 10, 50};
    const Trajectory traj =
        simulate_uncontrolled(p, {1e6, 1000, 500, 100, 0}, grid, Variant::Treatment);
    for (std::size_t i = 0; i <= grid.n_steps; i += 7) {
        const State a = traj.state_at(grid.time_at(i));
        const State b = traj.states[i];
        for (int c = 0; c < 5; ++c) {
            CHECK(rel_gap(a.to_array()[c], b.to_array()[c]) < 1e-12);
        }
    }
    // midpoint is the average of the neighbours
    const State mid = traj.state_at(grid.time_at(3) + grid.dt() / 2);
    CHECK(rel_gap(mid.s, 0.5 * (traj.states[3].s + traj.states[4].s)) < 1e-12);
}

TEST_CASE("positivity and invariant region hold along simulated trajectories") {
    std::mt19937_64 rng(47);
    const TimeGrid grid{0, 30, 3000};
    for (int k = 0; k < 100; ++k) {
        const Params p = draw_params(rng);
        State x0 = draw_state_in_region(rng, p.dfe_population());
        if (k % 3 == 0) {
            x0.t = 0; // exercise empty compartments too
            x0.r = 0;
        }
        const Trajectory traj = simulate_uncontrolled(p, x0, grid, Variant::Treatment);
        const TrajectoryChecks c = check_trajectory(traj, p);
        CAPTURE(k);
        CHECK(c.region_applicable);
        CHECK(c.positivity_ok);
        CHECK(c.region_ok);
    }
}

TEST_CASE("controlled simulation with admissible controls stays in the region") {
    std::mt19937_64 rng(53);
    const Params p = table1_params();
    const TimeGrid grid{0, 30, 3000};
    std::vector<ControlVector> schedule(grid.n_nodes());
    for (auto& u : schedule) {
        u = {uniform(rng, 0, 0.99), uniform(rng, 0, 0.99), uniform(rng, 0, 0.99)};
    }
    const State x0{1.5e8, 1e4, 5e3, 1e3, 0};
    const Trajectory traj = simulate_controlled(p, x0, grid, schedule);
    const TrajectoryChecks c = check_trajectory(traj, p);
    CHECK(c.region_applicable);
    CHECK(c.positivity_ok);
    CHECK(c.region_ok);
}
