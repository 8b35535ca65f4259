#include "concl/interpolation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace concl {

FluxInterpolation FluxInterpolation::upwind() {
    return FluxInterpolation(FluxKind::Upwind, 1.0, true);
}

FluxInterpolation FluxInterpolation::product_mean() {
    return FluxInterpolation(FluxKind::ProductMean, 1.0, true);
}

FluxInterpolation FluxInterpolation::product_max() {
    return FluxInterpolation(FluxKind::ProductMax, 1.0, true);
}

FluxInterpolation FluxInterpolation::custom(
    std::function<double(double, double, double)> fn, double lipschitz,
    bool jointly_antisymmetric) {
    if (!fn) throw invalid_input("FluxInterpolation::custom: empty function");
    if (!(lipschitz > 0.0))
        throw invalid_input("FluxInterpolation::custom: L_Phi must be > 0");
    FluxInterpolation phi(FluxKind::Custom, lipschitz, jointly_antisymmetric);
    phi.fn_ = std::move(fn);
    return phi;
}

const char* FluxInterpolation::name() const {
    switch (kind_) {
        case FluxKind::Upwind: return "upwind";
        case FluxKind::ProductMean: return "product-mean";
        case FluxKind::ProductMax: return "product-max";
        case FluxKind::Custom: return "custom";
    }
    return "?";
}

double FluxInterpolation::eval_unchecked(double a, double b, double v) const {
    switch (kind_) {
        case FluxKind::Upwind:
            // a*v_plus - b*v_minus with v_plus = max(v,0), v_minus = max(-v,0);
            // a tie at v = 0 contributes zero flux.
            return a * std::max(v, 0.0) - b * std::max(-v, 0.0);
        case FluxKind::ProductMean:
            return 0.5 * (a + b) * v;
        case FluxKind::ProductMax:
            return std::max(a, b) * v;
        case FluxKind::Custom:
            return fn_(a, b, v);
    }
    return 0.0;
}

double FluxInterpolation::eval(double a, double b, double v) const {
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(v))
        throw invalid_input("FluxInterpolation::eval: non-finite input");
    return eval_unchecked(a, b, v);
}

bool AdmissibilityReport::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

AdmissibilityReport admissibility_suite(const FluxInterpolation& phi,
                                        int samples, std::uint64_t seed) {
    if (samples < 1)
        throw invalid_input("admissibility_suite: samples must be >= 1");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-10.0, 10.0);
    std::uniform_real_distribution<double> pos(1e-3, 10.0);

    PropertyCheck degen_zero{"degeneracy Phi(0,0;v)=0"};
    PropertyCheck degen_still{"degeneracy Phi(a,b;0)=0"};
    PropertyCheck lip_v{"Lipschitz in v with declared L_Phi"};
    PropertyCheck lip_ab{"Lipschitz in (a,b) with declared L_Phi"};
    PropertyCheck homog{"positive one-homogeneity in (a,b)"};
    PropertyCheck antisym{"joint antisymmetry Phi(a,b;-v)=-Phi(b,a;v)"};

    const double L = phi.lipschitz();
    auto record = [](PropertyCheck& c, double violation, double a, double b,
                     double v, double aux) {
        if (violation > c.worst) {
            c.worst = violation;
            c.witness[0] = a;
            c.witness[1] = b;
            c.witness[2] = v;
            c.witness_aux = aux;
        }
        if (violation > 0.0) c.pass = false;
    };

    for (int s = 0; s < samples; ++s) {
        const double a = unif(rng), b = unif(rng);
        const double v = unif(rng), w = unif(rng);
        const double alpha = pos(rng);

        // (i) degeneracy, both halves reported separately
        record(degen_zero, std::abs(phi.eval(0.0, 0.0, v)), 0.0, 0.0, v, 0.0);
        record(degen_still, std::abs(phi.eval(a, b, 0.0)), a, b, 0.0, 0.0);
        // (ii) Lipschitz in the velocity slot
        {
            const double lhs = std::abs(phi.eval(a, b, w) - phi.eval(a, b, v));
            const double rhs = L * (std::abs(a) + std::abs(b)) * std::abs(w - v);
            const double scale = std::max(1.0, rhs);
            record(lip_v, (lhs - rhs) / scale - 1e-12, a, b, v, w);
        }
        // (ii') Lipschitz in the density slots
        {
            const double c = unif(rng), d = unif(rng);
            const double lhs = std::abs(phi.eval(a, b, v) - phi.eval(c, d, v));
            const double rhs =
                L * (std::abs(a - c) + std::abs(b - d)) * std::abs(v);
            const double scale = std::max(1.0, rhs);
            record(lip_ab, (lhs - rhs) / scale - 1e-12, a, b, v, c);
        }
        // (iii) one-homogeneity
        {
            const double lhs = phi.eval(alpha * a, alpha * b, v);
            const double rhs = alpha * phi.eval(a, b, v);
            const double scale =
                std::max(1.0, std::max(std::abs(lhs), std::abs(rhs)));
            record(homog, std::abs(lhs - rhs) / scale - 1e-12, a, b, v, alpha);
        }
        // (iv) joint antisymmetry
        {
            const double lhs = phi.eval(a, b, -v);
            const double rhs = -phi.eval(b, a, v);
            const double scale =
                std::max(1.0, std::max(std::abs(lhs), std::abs(rhs)));
            record(antisym, std::abs(lhs - rhs) / scale - 1e-12, a, b, v, 0.0);
        }
    }

    // clamp bookkeeping: negative "worst" means no violation was seen
    for (PropertyCheck* c :
         {&degen_zero, &degen_still, &lip_v, &lip_ab, &homog, &antisym})
        if (c->pass) c->worst = 0.0;

    AdmissibilityReport rep;
    rep.checks = {degen_zero, degen_still, lip_v, lip_ab, homog, antisym};
    return rep;
}

} // namespace concl
