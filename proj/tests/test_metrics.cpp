#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "concl/metrics.hpp"
#include "concl/oracle.hpp"
#include "test_helpers.hpp"

using namespace concl;
using namespace concl::testing;

namespace {

AtomSet1D random_atoms(std::mt19937_64& rng, int max_atoms = 4) {
    std::uniform_int_distribution<int> count(1, max_atoms);
    std::uniform_real_distribution<double> pos(-5.0, 5.0);
    std::uniform_real_distribution<double> mass(0.1, 1.0);
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
}

} // namespace

TEST_CASE("wasserstein_1d on diracs and equal sets") {
    const AtomSet1D du = AtomSet1D::dirac(1.5);
    const AtomSet1D dv = AtomSet1D::dirac(-2.0);
    CHECK(wasserstein_1d(1, du, dv) == doctest::Approx(3.5));
    CHECK(wasserstein_1d(2, du, dv) == doctest::Approx(3.5));

    const AtomSet1D a({0.0, 1.0, 2.5}, {0.2, 0.5, 0.3});
    CHECK(wasserstein_1d(2, a, a) == 0.0);
    CHECK(wasserstein_1d(1, a, a) == 0.0);
}

TEST_CASE("wasserstein_1d halved-mass example equals 1/sqrt(2)") {
    const AtomSet1D a({0.0, 1.0}, {0.5, 0.5});
    const AtomSet1D b({0.0, 2.0}, {0.5, 0.5});
    CHECK(wasserstein_1d(2, a, b) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(wasserstein_1d(2, a, b) ==
          doctest::Approx(oracle::bruteforce_w2(a, b)));
}

TEST_CASE("wasserstein_1d rejects bad inputs") {
    CHECK_THROWS_AS(AtomSet1D({0.0}, {0.5}), contract_violation);
    CHECK_THROWS_AS(AtomSet1D({0.0, 1.0}, {0.5, -0.5}), contract_violation);
    CHECK_THROWS_AS(wasserstein_1d(3, AtomSet1D::dirac(0), AtomSet1D::dirac(1)),
                    invalid_input);
}

TEST_CASE("wasserstein_1d metric axioms on random instances") {
    std::mt19937_64 rng(2718);
    for (int rep = 0; rep < 400; ++rep) {
        const AtomSet1D a = random_atoms(rng);
        const AtomSet1D b = random_atoms(rng);
        const AtomSet1D c = random_atoms(rng);
        for (int p : {1, 2}) {
            const double ab = wasserstein_1d(p, a, b);
            const double ba = wasserstein_1d(p, b, a);
            CHECK(ab == ba); // symmetry, exact
            const double ac = wasserstein_1d(p, a, c);
            const double cb = wasserstein_1d(p, c, b);
            CHECK(ab <= ac + cb + 1e-12);
            CHECK(wasserstein_1d(p, a, a) == 0.0);
        }
    }
}

TEST_CASE("wasserstein_1d ties are broken consistently") {
    // splitting an atom in two must not change the cost
    const AtomSet1D a({1.0, 1.0, 0.0}, {0.25, 0.25, 0.5});
    const AtomSet1D a2({1.0, 0.0}, {0.5, 0.5});
    const AtomSet1D b({3.0, -1.0}, {0.5, 0.5});
    CHECK(wasserstein_1d(2, a, b) == doctest::Approx(wasserstein_1d(2, a2, b)));
}

TEST_CASE("l2mu_d2 composes per-vertex distances") {
    const BaseMeasure mu = line_measure(2);
    // vertex 0 carries the 1/sqrt(2) pair, vertex 1 identical atoms
    AtomicDisintegration s1(
        {AtomSet1D({0.0, 1.0}, {0.5, 0.5}), AtomSet1D::dirac(3.0)});
    AtomicDisintegration s2(
        {AtomSet1D({0.0, 2.0}, {0.5, 0.5}), AtomSet1D::dirac(3.0)});
    CHECK(l2mu_d2(s1, s2, mu) == doctest::Approx(0.5));
    CHECK(l2mu_d2(s1, s1, mu) == 0.0);
}

TEST_CASE("l2mu_d2 on monokinetic pairs is the weighted l2 distance") {
    const BaseMeasure mu({0.0, 1.0, 2.0}, 1, {0.5, 0.25, 0.25});
    const VertexDensity r1({1.0, 2.0, -1.0});
    const VertexDensity r2({0.0, 2.0, 3.0});
    const auto s1 = AtomicDisintegration::monokinetic(r1);
    const auto s2 = AtomicDisintegration::monokinetic(r2);
    double expect = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double d = r1[i] - r2[i];
        expect += mu.weight(i) * d * d;
    }
    CHECK(l2mu_d2(s1, s2, mu) == doctest::Approx(std::sqrt(expect)));
}

TEST_CASE("l2mu_d2 rejects marginal mismatches") {
    const BaseMeasure mu = line_measure(2);
    const auto s2 = AtomicDisintegration::monokinetic(VertexDensity(2, 0.0));
    const auto s3 = AtomicDisintegration::monokinetic(VertexDensity(3, 0.0));
    CHECK_THROWS_AS(l2mu_d2(s2, s3, mu), invalid_input);
}

TEST_CASE("dmu_sup over aligned trajectories") {
    const BaseMeasure mu = line_measure(2);
    SigmaTrajectory ta, tb;
    for (int k = 0; k < 3; ++k) {
        ta.times.push_back(0.5 * k);
        tb.times.push_back(0.5 * k);
        ta.states.push_back(
            AtomicDisintegration::monokinetic(VertexDensity(2, 1.0 + k)));
        tb.states.push_back(
            AtomicDisintegration::monokinetic(VertexDensity(2, 1.0)));
    }
    CHECK(dmu_sup(ta, ta, mu) == 0.0);
    CHECK(dmu_sup(ta, tb, mu) == doctest::Approx(2.0)); // last snapshot
    tb.times.back() += 0.1;
    CHECK_THROWS_AS(dmu_sup(ta, tb, mu), invalid_input);
}

TEST_CASE("dmu_sup of a decaying pair equals the initial distance") {
    const BaseMeasure mu = line_measure(2);
    SigmaTrajectory ta, tb;
    for (int k = 0; k < 5; ++k) {
        ta.times.push_back(0.25 * k);
        tb.times.push_back(0.25 * k);
        const double gap = std::pow(0.5, k); // strictly decreasing
        ta.states.push_back(
            AtomicDisintegration::monokinetic(VertexDensity(2, 1.0 + gap)));
        tb.states.push_back(
            AtomicDisintegration::monokinetic(VertexDensity(2, 1.0)));
    }
    CHECK(dmu_sup(ta, tb, mu) ==
          doctest::Approx(l2mu_d2(ta.states[0], tb.states[0], mu)));
}

TEST_CASE("contraction dissipation terms") {
    const BaseMeasure mu = line_measure(4);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    EdgeField v(4, Symmetry::Antisymmetric);
    EdgeField eta(4, Symmetry::Symmetric);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j < 4; ++j) {
            const double x = unif(rng);
            v.set(i, j, x);
            v.set(j, i, -x);
            const double e = 1.0 + 0.5 * unif(rng);
            eta.set(i, j, e);
            eta.set(j, i, e);
        }

    SUBCASE("equal densities vanish") {
        const VertexDensity r(4, 0.7);
        const DissipationTerms t = contraction_dissipation(r, r, v, eta, mu);
        CHECK(t.derivative_identity == 0.0);
        CHECK(t.lambda_bound_term == 0.0);
    }
    SUBCASE("constant offset kills the bound term by antisymmetry") {
        const VertexDensity r1({1.0, 2.0, 0.5, 1.5});
        VertexDensity r2 = r1;
        for (std::size_t i = 0; i < 4; ++i) r2[i] += 0.3;
        const DissipationTerms t = contraction_dissipation(r1, r2, v, eta, mu);
        CHECK(std::abs(t.lambda_bound_term) < 1e-14);
    }
    SUBCASE("identity is bounded by the lambda term") {
        for (int rep = 0; rep < 200; ++rep) {
            VertexDensity r1(4, 0.0), r2(4, 0.0);
            for (std::size_t i = 0; i < 4; ++i) {
                r1[i] = unif(rng);
                r2[i] = unif(rng);
            }
            const DissipationTerms t = contraction_dissipation(r1, r2, v, eta, mu);
            const double scale =
                std::max({1.0, std::abs(t.derivative_identity),
                          std::abs(t.lambda_bound_term)});
            CHECK(t.derivative_identity <= t.lambda_bound_term + 1e-12 * scale);
        }
    }
    SUBCASE("identity equals the analytic derivative of the squared distance") {
        // d/dt D^2 = 2 sum_i m_i (r1_i - r2_i)(dr1_i - dr2_i) with the shared
        // static velocity and edge weights
        Model model{mu, FluxInterpolation::upwind(), VelocitySpec{},
                    OmegaSpec::constant(1.0)};
        model.velocity.kind = VelocitySpec::Kind::Static;
        model.velocity.static_field = v;
        const VertexDensity r1({0.4, -0.2, 0.9, 0.1});
        const VertexDensity r2({-0.3, 0.5, 0.2, 0.6});
        const VertexDensity d1 = rhs_r(r1, eta, model);
        const VertexDensity d2 = rhs_r(r2, eta, model);
        double expect = 0.0;
        for (std::size_t i = 0; i < 4; ++i)
            expect += 2.0 * mu.weight(i) * (r1[i] - r2[i]) * (d1[i] - d2[i]);
        const DissipationTerms t = contraction_dissipation(r1, r2, v, eta, mu);
        CHECK(t.derivative_identity == doctest::Approx(expect).epsilon(1e-12));
    }
    SUBCASE("hypothesis flags are enforced") {
        const VertexDensity r(4, 0.0);
        CHECK_THROWS_AS(contraction_dissipation(r, r, eta, eta, mu),
                        contract_violation); // eta passed where V expected
    }
    SUBCASE("identity matches the finite-difference derivative of a pair run") {
        Model model{mu, FluxInterpolation::upwind(), VelocitySpec{},
                    OmegaSpec::constant(1.0)};
        model.velocity.kind = VelocitySpec::Kind::Static;
        model.velocity.static_field = v;
        const VertexDensity r1({1.2, 0.4, 0.9, 0.1});
        VertexDensity r2 = r1;
        r2[0] += 0.05;
        r2[2] -= 0.03;
        IntegrateOptions opt;
        opt.dt = 1e-4;
        opt.t_end = 10 * opt.dt;
        EdgeField eta1 = eta;
        const Trajectory ta = integrate({r1, eta1, 0.0}, model, opt);
        const Trajectory tb = integrate({r2, eta1, 0.0}, model, opt);
        auto dist2 = [&](std::size_t k) {
            double s = 0.0;
            for (std::size_t i = 0; i < 4; ++i) {
                const double d = ta.states[k].r[i] - tb.states[k].r[i];
                s += mu.weight(i) * d * d;
            }
            return s;
        };
        const std::size_t mid = 5;
        const double fd =
            (dist2(mid + 1) - dist2(mid - 1)) / (2.0 * opt.dt);
        const DissipationTerms t = contraction_dissipation(
            ta.states[mid].r, tb.states[mid].r, v, ta.states[mid].eta, mu);
        CHECK(std::abs(fd - t.derivative_identity) < 1e-6);
    }
}

TEST_CASE("sup bound curve") {
    BoundsLedger lg;
    lg.norm_r0_inf = 2.0;
    lg.alpha_prime_star = 1.0;
    lg.eta_star = 1.0;
    lg.M = 1.0;
    lg.mu_K = 1.0;
    const std::vector<double> times = {0.0, 1.0, 2.0, 700.0};
    const auto b = sup_bound_curve(lg, times);
    CHECK(b[0] == doctest::Approx(2.0));
    CHECK(b[1] ==
          doctest::Approx(2.0 * std::exp(1.0) / (2.0 * std::exp(1.0) - 1.0)));
    CHECK(b[3] == doctest::Approx(1.0)); // M / mu(K), overflow-safe

    SUBCASE("already uniform stays flat") {
        lg.norm_r0_inf = 1.0; // = M / mu(K)
        const auto flat = sup_bound_curve(lg, times);
        for (double x : flat) CHECK(x == doctest::Approx(1.0));
    }
    SUBCASE("long-time limit is M / mu(K) for random valid ledgers") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> unif(0.1, 3.0);
        for (int rep = 0; rep < 50; ++rep) {
            BoundsLedger r;
            r.norm_r0_inf = unif(rng) + 1.0;
            r.alpha_prime_star = unif(rng);
            r.eta_star = unif(rng);
            r.M = unif(rng);
            r.mu_K = 1.0;
            const auto c = sup_bound_curve(r, {1e4});
            CHECK(c[0] == doctest::Approx(r.M / r.mu_K).epsilon(1e-9));
        }
    }
    SUBCASE("nonpositive entries are rejected") {
        lg.eta_star = 0.0;
        CHECK_THROWS_AS(sup_bound_curve(lg, times), invalid_input);
    }
}

TEST_CASE("inf bound curve") {
    BoundsLedger lg;
    lg.norm_r0_inf = 2.0;
    lg.alpha_prime_star = 1.0;
    lg.eta_star = 1.0;
    lg.M = 1.0;
    lg.mu_K = 1.0;
    const std::vector<double> times = {0.0, 1.0, 800.0};
    SUBCASE("uniform start stays flat") {
        const auto c = inf_bound_curve(lg, 1.0, times);
        for (double x : c) CHECK(x == doctest::Approx(1.0));
    }
    SUBCASE("zero minimum gives the vacuous zero curve") {
        const auto c = inf_bound_curve(lg, 0.0, times);
        for (double x : c) CHECK(x == 0.0);
    }
    SUBCASE("half start climbs to the consensus value") {
        const auto c = inf_bound_curve(lg, 0.5, times);
        CHECK(c[0] == doctest::Approx(0.5));
        const double e = std::exp(1.0);
        CHECK(c[1] == doctest::Approx(0.5 * e / (1.0 + 0.5 * (e - 1.0))));
        CHECK(c[2] == doctest::Approx(1.0));
    }
    CHECK_THROWS_AS(inf_bound_curve(lg, -0.1, times), invalid_input);
}

TEST_CASE("diameter") {
    CHECK(diameter(VertexDensity(5, 1.23)) == 0.0);
    CHECK(diameter(VertexDensity({2.0, 0.0})) == 2.0);
}

TEST_CASE("atomic disintegration moments") {
    const BaseMeasure mu = line_measure(2);
    const auto s = AtomicDisintegration::monokinetic(VertexDensity({2.0, 0.0}));
    CHECK(s.first_moment(mu) == doctest::Approx(1.0));
    CHECK(s.second_moment(mu) == doctest::Approx(2.0));
    CHECK(s.sup_position() == 2.0);
}
