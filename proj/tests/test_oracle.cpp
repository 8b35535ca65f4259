#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "concl/oracle.hpp"
#include "test_helpers.hpp"

using namespace concl;
using namespace concl::testing;

TEST_CASE("reference integrator holds a stationary state") {
    const BaseMeasure mu = line_measure(3);
    const Model model{mu, FluxInterpolation::upwind(),
                      VelocitySpec::from_alpha(AlphaProfile::identity_on_box(0.0, 2.0)),
                      OmegaSpec::constant(1.0)};
    const CoupledState init{VertexDensity(3, 1.0), constant_eta(3, 1.0), 0.0};
    const Trajectory traj = oracle::reference_integrate(init, model, 1e-4, 0.1, 1.0);
    for (const auto& s : traj.states) {
        CHECK(s.r.sup_norm() == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(s.eta.sup_norm() == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("rk4 and the reference integrator agree on the two-vertex run") {
    const Model model = two_vertex_model();
    const CoupledState init = two_vertex_init();
    IntegrateOptions opt;
    opt.dt = 1e-3;
    opt.t_end = 1.0;
    opt.record_stride = 1 << 20;
    const Trajectory rk = integrate(init, model, opt);
    const auto ref = oracle::reference_states(init, model, 1e-5, {1.0});
    for (std::size_t i = 0; i < 2; ++i)
        CHECK(std::abs(rk.back().r[i] - ref[0].r[i]) < 1e-8);
}

TEST_CASE("reference integrator conserves mass to rounding") {
    const Model model = two_vertex_model();
    const CoupledState init = two_vertex_init();
    const Trajectory traj =
        oracle::reference_integrate(init, model, 1e-4, 0.1, 1.0);
    for (const auto& d : traj.diagnostics)
        CHECK(std::abs(d.mass - 1.0) < 1e-12);
}

TEST_CASE("reference integrator rejects off-grid samples") {
    const Model model = two_vertex_model();
    CHECK_THROWS_AS(
        oracle::euler_states(two_vertex_init(), model, 1e-3, {0.00052}),
        invalid_input);
}

TEST_CASE("bruteforce_w2 basics") {
    CHECK(oracle::bruteforce_w2(AtomSet1D::dirac(2.0), AtomSet1D::dirac(-1.0)) ==
          doctest::Approx(3.0));
    const AtomSet1D a({0.0, 1.0}, {0.5, 0.5});
    const AtomSet1D b({0.0, 2.0}, {0.5, 0.5});
    CHECK(oracle::bruteforce_w2(a, b) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(oracle::bruteforce_w2(a, a) == doctest::Approx(0.0));
}

TEST_CASE("bruteforce_w2 enforces the size cap") {
    const AtomSet1D big({0.0, 1.0, 2.0, 3.0, 4.0},
                        {0.2, 0.2, 0.2, 0.2, 0.2});
    CHECK_THROWS_AS(oracle::bruteforce_w2(big, AtomSet1D::dirac(0.0)), size_error);
}

TEST_CASE("bernoulli closed form") {
    const std::vector<double> times = {0.0, 0.5, 1.0, 3.0, 500.0};
    SUBCASE("equilibrium start stays put") {
        const auto y =
            oracle::bernoulli_closed_form({2.0, 4.0, 0.5}, times);
        for (double v : y) CHECK(v == doctest::Approx(0.5));
    }
    SUBCASE("unit coefficients from y0 = 2") {
        const auto y = oracle::bernoulli_closed_form({1.0, 1.0, 2.0}, times);
        for (std::size_t k = 0; k < times.size(); ++k) {
            const double e = std::exp(times[k]);
            const double expect = 2.0 * e / (2.0 * e - 1.0);
            CHECK(y[k] == doctest::Approx(expect).epsilon(1e-12));
        }
    }
    SUBCASE("zero initial value is absorbing") {
        const auto y = oracle::bernoulli_closed_form({1.0, 1.0, 0.0}, times);
        for (double v : y) CHECK(v == 0.0);
    }
    SUBCASE("invariants are validated") {
        CHECK_THROWS_AS(oracle::bernoulli_closed_form({0.0, 1.0, 1.0}, times),
                        invalid_input);
        CHECK_THROWS_AS(oracle::bernoulli_closed_form({1.0, 1.0, -1.0}, times),
                        invalid_input);
    }
}

TEST_CASE("bernoulli closed form satisfies its ODE") {
    const oracle::BernoulliParams p{1.3, 0.8, 2.5};
    const double h = 1e-5;
    for (double t : {0.1, 0.7, 2.0, 5.0}) {
        const auto y = oracle::bernoulli_closed_form(p, {t - h, t, t + h});
        const double dy = (y[2] - y[0]) / (2.0 * h);
        const double expect = p.a * y[1] - p.b * y[1] * y[1];
        CHECK(std::abs(dy - expect) < 1e-8);
    }
}

TEST_CASE("comparison lemma check") {
    const std::vector<double> times = {0.0, 1.0, 2.0};
    SUBCASE("equality passes both directions") {
        const std::vector<double> f = {1.0, 2.0, 3.0};
        CHECK(oracle::comparison_lemma_check(times, f, f, +1).ok);
        CHECK(oracle::comparison_lemma_check(times, f, f, -1).ok);
    }
    SUBCASE("violations report the first offending time") {
        const std::vector<double> f = {1.0, 2.0, 3.0};
        const std::vector<double> g = {1.0, 1.5, 3.5};
        const auto rep = oracle::comparison_lemma_check(times, f, g, +1);
        CHECK(!rep.ok);
        CHECK(rep.first_time == 1.0);
        CHECK(rep.max_violation == doctest::Approx(0.5));
    }
    SUBCASE("input validation") {
        CHECK_THROWS_AS(
            oracle::comparison_lemma_check(times, {1.0}, {1.0, 2.0, 3.0}, 1),
            invalid_input);
        CHECK_THROWS_AS(
            oracle::comparison_lemma_check(times, {1, 2, 3}, {1, 2, 3}, 0),
            invalid_input);
    }
}

TEST_CASE("comparison lemma certifies the Bernoulli envelopes of a run") {
    // sup-norm of a pointwise monotone run against the closed-form upper
    // envelope, and the minimum against the lower one
    const Model model = two_vertex_model();
    const CoupledState init = two_vertex_init();
    const BoundsLedger lg = constants_of(model.flux, model.velocity, model.omega,
                                         init.eta, init.r, model.mu);
    IntegrateOptions opt;
    opt.dt = 1e-3;
    opt.t_end = 5.0;
    const Trajectory traj = integrate(init, model, opt);

    std::vector<double> times, sup_run, inf_run;
    for (const auto& d : traj.diagnostics) {
        times.push_back(d.t);
        sup_run.push_back(d.r_max);
        inf_run.push_back(d.r_min);
    }
    const double a = lg.alpha_prime_star * lg.eta_star * lg.M;
    const double b = lg.alpha_prime_star * lg.eta_star * lg.mu_K;
    const auto sup_env =
        oracle::bernoulli_closed_form({a, b, lg.norm_r0_inf}, times);
    CHECK(oracle::comparison_lemma_check(times, sup_run, sup_env, +1).ok);

    // the canonical run starts at min zero, so perturb to a positive floor
    CoupledState init2 = init;
    init2.r = VertexDensity({1.5, 0.5});
    const Trajectory traj2 = integrate(init2, model, opt);
    std::vector<double> t2, inf2;
    for (const auto& d : traj2.diagnostics) {
        t2.push_back(d.t);
        inf2.push_back(d.r_min);
    }
    const auto inf_env = oracle::bernoulli_closed_form({a, b, 0.5}, t2);
    CHECK(oracle::comparison_lemma_check(t2, inf2, inf_env, -1).ok);
}

TEST_CASE("quantile and brute-force transport agree on random instances") {
    std::mt19937_64 rng(777);
    std::uniform_int_distribution<int> count(1, 4);
    std::uniform_real_distribution<double> pos(-4.0, 4.0);
    std::uniform_real_distribution<double> mass(0.05, 1.0);
    auto make = [&]() {
        const int k = count(rng);
        std::vector<double> p(k), w(k);
        double sum = 0.0;
        for (int i = 0; i < k; ++i) {
            p[i] = pos(rng);
            w[i] = mass(rng);
            sum += w[i];
        }
        for (int i = 0; i < k; ++i) w[i] /= sum;
        return AtomSet1D(p, w);
    };
    for (int rep = 0; rep < 200; ++rep) {
        const AtomSet1D a = make();
        const AtomSet1D b = make();
        const double fast = wasserstein_1d(2, a, b);
        const double slow = oracle::bruteforce_w2(a, b);
        CHECK(std::abs(fast - slow) < 1e-10);
    }
}
