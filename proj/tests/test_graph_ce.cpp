#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "concl/graph_ce.hpp"
#include "test_helpers.hpp"

using namespace concl;
using namespace concl::testing;

TEST_CASE("field_X reduces to the Euler rhs on monokinetic data") {
    const Model model = two_vertex_model();
    const CoupledState s = two_vertex_init();
    const auto sigma = AtomicDisintegration::monokinetic(s.r);
    const RhsResult k = rhs(s, model);
    for (std::size_t i = 0; i < 2; ++i) {
        const double x = field_X(sigma, s.r, s.eta, model.flux, model.velocity,
                                 model.mu, s.r[i], i);
        CHECK(x == doctest::Approx(k.dr[i]).epsilon(1e-14));
    }
}

TEST_CASE("field_X vanishes with the edge weights") {
    const Model model = two_vertex_model();
    const CoupledState s = two_vertex_init();
    const auto sigma = AtomicDisintegration::monokinetic(s.r);
    const EdgeField zero_eta(2, Symmetry::Symmetric);
    CHECK(field_X(sigma, s.r, zero_eta, model.flux, model.velocity, model.mu,
                  1.0, 0) == 0.0);
}

TEST_CASE("field_X two-atom hand example") {
    // vertex 1 has atoms (0, 2) with weights (1/2, 1/2); V(0,1) = 1, eta = 1
    const BaseMeasure mu = line_measure(2);
    Model model{mu, FluxInterpolation::upwind(), VelocitySpec{},
                OmegaSpec::constant(1.0)};
    model.velocity.kind = VelocitySpec::Kind::Static;
    EdgeField v(2, Symmetry::Antisymmetric);
    v.set(0, 1, 1.0);
    v.set(1, 0, -1.0);
    model.velocity.static_field = v;

    AtomicDisintegration sigma(
        {AtomSet1D::dirac(0.0), AtomSet1D({0.0, 2.0}, {0.5, 0.5})});
    const double x = field_X(sigma, VertexDensity(2, 0.0), constant_eta(2, 1.0),
                             model.flux, model.velocity, model.mu, 1.0, 0);
    CHECK(x == doctest::Approx(-0.5));
}

TEST_CASE("trajectory sampler reproduces nodes and interpolates smoothly") {
    const Model model = two_vertex_model();
    IntegrateOptions opt;
    opt.dt = 1e-2;
    opt.t_end = 1.0;
    const Trajectory traj = integrate(two_vertex_init(), model, opt);
    const TrajectorySampler sampler(traj);

    VertexDensity r;
    EdgeField eta;
    sampler.sample(traj.times[7], r, eta);
    CHECK(r[0] == traj.states[7].r[0]);
    CHECK(eta(0, 1) == traj.states[7].eta(0, 1));

    // midpoint values stay between the neighbouring nodes for this monotone run
    sampler.sample(traj.times[7] + 0.5 * opt.dt, r, eta);
    const double lo = std::min(traj.states[7].r[0], traj.states[8].r[0]);
    const double hi = std::max(traj.states[7].r[0], traj.states[8].r[0]);
    CHECK(r[0] >= lo - 1e-9);
    CHECK(r[0] <= hi + 1e-9);

    CHECK_THROWS_AS(sampler.sample(1.5, r, eta), invalid_input);
}

TEST_CASE("advect: monokinetic atoms track the vertex densities") {
    const Model model = two_vertex_model();
    IntegrateOptions opt;
    opt.dt = 5e-4; // euler grid at dt/2 of the advection step
    opt.t_end = 2.0;
    const Trajectory traj = integrate(two_vertex_init(), model, opt);

    AdvectOptions aopt;
    aopt.dt = 1e-3;
    const auto run =
        advect(AtomicDisintegration::monokinetic(two_vertex_init().r), traj,
               model, aopt);

    const TrajectorySampler sampler(traj);
    VertexDensity r;
    EdgeField eta;
    double worst = 0.0;
    for (std::size_t k = 0; k < run.sigma.size(); ++k) {
        sampler.sample(run.sigma.times[k], r, eta);
        for (std::size_t i = 0; i < 2; ++i)
            worst = std::max(worst,
                             std::abs(run.sigma.states[k].per_vertex[i].positions[0] -
                                      r[i]));
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("advect leaves atoms frozen when the edge weights vanish") {
    const BaseMeasure mu = line_measure(3);
    const Model model{mu, FluxInterpolation::upwind(),
                      VelocitySpec::from_alpha(AlphaProfile::identity_on_box(0.0, 2.0)),
                      OmegaSpec::constant(0.0)};
    const CoupledState init{VertexDensity({2.0, 1.0, 0.0}),
                            EdgeField(3, Symmetry::Symmetric), 0.0};
    IntegrateOptions opt;
    opt.dt = 1e-2;
    opt.t_end = 1.0;
    const Trajectory traj = integrate(init, model, opt);
    CHECK(traj.back().eta.sup_norm() == 0.0); // omega = 0 keeps eta at zero

    AdvectOptions aopt;
    aopt.dt = 1e-2;
    aopt.probe_offsets = {0.75}; // probes obey the same frozen flow f(t,u) = u
    AtomicDisintegration sigma0(
        {AtomSet1D({0.5, 1.5}, {0.25, 0.75}), AtomSet1D::dirac(1.0),
         AtomSet1D::dirac(0.25)});
    const auto run = advect(sigma0, traj, model, aopt);
    const auto& last = run.sigma.states.back();
    CHECK(last.per_vertex[0].positions[0] == 0.5);
    CHECK(last.per_vertex[0].positions[1] == 1.5);
    CHECK(last.per_vertex[1].positions[0] == 1.0);
    CHECK(last.per_vertex[2].positions[0] == 0.25);
    for (std::size_t i = 0; i < 3; ++i)
        for (double f : run.probe_paths[i][0]) CHECK(f == 0.75);
}

TEST_CASE("advect conserves atom weights and the first moment") {
    const BaseMeasure mu = line_measure(3);
    const Model model{mu, FluxInterpolation::upwind(),
                      VelocitySpec::from_alpha(AlphaProfile::identity_on_box(-0.5, 2.5)),
                      OmegaSpec::constant(1.0)};
    const CoupledState init{VertexDensity({2.0, 1.0, 0.5}), constant_eta(3, 1.0),
                            0.0};
    IntegrateOptions opt;
    opt.dt = 5e-3;
    opt.t_end = 2.0;
    const Trajectory traj = integrate(init, model, opt);

    AtomicDisintegration sigma0({AtomSet1D({1.8, 2.2}, {0.5, 0.5}),
                                 AtomSet1D({0.9, 1.1}, {0.25, 0.75}),
                                 AtomSet1D::dirac(0.5)});
    AdvectOptions aopt;
    aopt.dt = 1e-2;
    const auto run = advect(sigma0, traj, model, aopt);

    const double m0 = sigma0.first_moment(mu);
    for (const auto& st : run.sigma.states) {
        CHECK(std::abs(st.first_moment(mu) - m0) < 1e-10);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t k = 0; k < st.per_vertex[i].weights.size(); ++k)
                CHECK(st.per_vertex[i].weights[k] ==
                      sigma0.per_vertex[i].weights[k]);
    }
}

TEST_CASE("advect validates the grid") {
    const Model model = two_vertex_model();
    IntegrateOptions opt;
    opt.dt = 1e-2;
    opt.t_end = 0.5;
    const Trajectory traj = integrate(two_vertex_init(), model, opt);
    AdvectOptions aopt;
    aopt.dt = 1e-3; // finer than the recorded grid: not allowed
    CHECK_THROWS_AS(
        advect(AtomicDisintegration::monokinetic(two_vertex_init().r), traj,
               model, aopt),
        invalid_input);
}

TEST_CASE("flow property suite holds with the ledger constants") {
    const Model model = two_vertex_model();
    const CoupledState init = two_vertex_init();
    const BoundsLedger lg =
        constants_of(model.flux, model.velocity, model.omega, init.eta, init.r,
                     model.mu);
    IntegrateOptions opt;
    opt.dt = 1e-3;
    opt.t_end = 1.0;
    const Trajectory traj = integrate(init, model, opt);

    AdvectOptions aopt;
    aopt.dt = 1e-3;
    aopt.probe_offsets = {0.0, lg.norm_r0_inf, 2.0 * lg.norm_r0_inf};
    const auto sigma0 = AtomicDisintegration::monokinetic(init.r);
    const auto run = advect(sigma0, traj, model, aopt);
    const FlowPropertyReport rep = flow_property_suite(run, lg, model.mu);
    CHECK(rep.growth_ok);
    CHECK(rep.lipschitz_ok);
    CHECK(rep.continuity_ok);
    CHECK(rep.m2_gamma_star > 0.0);
    CHECK(rep.growth_worst_ratio <= 1.0);
    CHECK(rep.lipschitz_worst_ratio <= 1.0);
}

TEST_CASE("equal probes coincide for all time") {
    const Model model = two_vertex_model();
    IntegrateOptions opt;
    opt.dt = 1e-3;
    opt.t_end = 0.5;
    const Trajectory traj = integrate(two_vertex_init(), model, opt);
    AdvectOptions aopt;
    aopt.dt = 1e-3;
    aopt.probe_offsets = {1.0, 1.0};
    const auto run = advect(AtomicDisintegration::monokinetic(two_vertex_init().r),
                            traj, model, aopt);
    for (std::size_t k = 0; k < run.probe_times.size(); ++k)
        CHECK(run.probe_paths[0][0][k] == run.probe_paths[0][1][k]);
}

TEST_CASE("stability experiment") {
    const Model model = two_vertex_model();
    const CoupledState init = two_vertex_init();
    const BoundsLedger lg =
        constants_of(model.flux, model.velocity, model.omega, init.eta, init.r,
                     model.mu);
    IntegrateOptions opt;
    opt.dt = 5e-4;
    opt.t_end = 1.0;
    const Trajectory traj = integrate(init, model, opt);

    const auto sa = AtomicDisintegration::monokinetic(init.r);
    AdvectOptions aopt;
    aopt.dt = 1e-3;

    SUBCASE("identical inits are flagged and skip the ratio") {
        const StabilityReport rep =
            stability_experiment(sa, sa, traj, model, aopt, lg);
        CHECK(rep.identical);
        CHECK(rep.observed_ratio == 0.0);
        CHECK(rep.sup_distance == 0.0);
    }
    SUBCASE("perturbed init stays under the envelope") {
        AtomicDisintegration sb = sa;
        sb.per_vertex[0].positions[0] += 1e-3;
        const StabilityReport rep =
            stability_experiment(sa, sb, traj, model, aopt, lg);
        CHECK(!rep.identical);
        CHECK(rep.initial_distance > 0.0);
        CHECK(rep.within_envelope());
        CHECK(rep.envelope_log > 0.0);
    }
}

TEST_CASE("frozen field keeps the stability ratio at one") {
    const BaseMeasure mu = line_measure(2);
    const Model model{mu, FluxInterpolation::upwind(),
                      VelocitySpec::from_alpha(AlphaProfile::identity_on_box(0.0, 3.0)),
                      OmegaSpec::constant(0.0)};
    const CoupledState init{VertexDensity({2.0, 1.0}),
                            EdgeField(2, Symmetry::Symmetric), 0.0};
    IntegrateOptions opt;
    opt.dt = 1e-3;
    opt.t_end = 1.0;
    const Trajectory traj = integrate(init, model, opt);
    const BoundsLedger lg =
        constants_of(model.flux, model.velocity, model.omega, init.eta, init.r,
                     model.mu);

    const auto sa = AtomicDisintegration::monokinetic(init.r);
    AtomicDisintegration sb = sa;
    sb.per_vertex[0].positions[0] += 0.125;
    AdvectOptions aopt;
    aopt.dt = 1e-3;
    const StabilityReport rep = stability_experiment(sa, sb, traj, model, aopt, lg);
    CHECK(rep.observed_ratio == doctest::Approx(1.0).epsilon(1e-12));
}
