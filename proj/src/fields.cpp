#include "concl/fields.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace concl {

// --- InteractionKernelSpec ---------------------------------------------------

InteractionKernelSpec InteractionKernelSpec::gaussian(const BaseMeasure& mu,
                                                      double length) {
    if (!(length > 0.0))
        throw invalid_input("gaussian kernel: length scale must be > 0");
    const std::size_t n = mu.size();
    std::vector<double> t(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            t[i * n + j] = std::exp(-mu.dist2(i, j) / (2.0 * length * length));
    return from_table(n, std::move(t));
}

InteractionKernelSpec InteractionKernelSpec::quadratic(const BaseMeasure& mu) {
    const std::size_t n = mu.size();
    std::vector<double> t(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) t[i * n + j] = 0.5 * mu.dist2(i, j);
    return from_table(n, std::move(t));
}

InteractionKernelSpec InteractionKernelSpec::from_table(
    std::size_t n, std::vector<double> table) {
    if (table.size() != n * n)
        throw invalid_input("InteractionKernelSpec: table size mismatch");
    for (double x : table)
        if (!std::isfinite(x))
            throw invalid_input("InteractionKernelSpec: non-finite entry");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (table[i * n + j] != table[j * n + i])
                throw invalid_input("InteractionKernelSpec: K must be symmetric");
    InteractionKernelSpec s;
    s.n = n;
    s.table = std::move(table);
    return s;
}

double InteractionKernelSpec::sup() const {
    double s = 0.0;
    for (double x : table) s = std::max(s, std::abs(x));
    return s;
}

// --- AlphaProfile ------------------------------------------------------------

namespace {
void check_box(double lo, double hi) {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
        throw invalid_input("AlphaProfile: working box must satisfy lo < hi");
}
} // namespace

AlphaProfile AlphaProfile::sigmoid(double gain, double lo, double hi) {
    check_box(lo, hi);
    if (!(gain > 0.0)) throw invalid_input("AlphaProfile::sigmoid: gain must be > 0");
    AlphaProfile a(AlphaKind::Sigmoid, lo, hi);
    a.gain_ = gain;
    return a;
}

AlphaProfile AlphaProfile::tanh_scaled(double amplitude, double scale,
                                       double lo, double hi) {
    check_box(lo, hi);
    if (!(amplitude > 0.0) || !(scale > 0.0))
        throw invalid_input("AlphaProfile::tanh_scaled: parameters must be > 0");
    AlphaProfile a(AlphaKind::TanhScaled, lo, hi);
    a.amp_ = amplitude;
    a.scale_ = scale;
    return a;
}

AlphaProfile AlphaProfile::identity_on_box(double lo, double hi) {
    check_box(lo, hi);
    return AlphaProfile(AlphaKind::IdentityOnBox, lo, hi);
}

AlphaProfile AlphaProfile::custom(std::function<double(double)> value,
                                  std::function<double(double)> derivative,
                                  double alpha_prime_star, double lo, double hi) {
    check_box(lo, hi);
    if (!value || !derivative)
        throw invalid_input("AlphaProfile::custom: missing function");
    AlphaProfile a(AlphaKind::Custom, lo, hi);
    a.fn_ = std::move(value);
    a.dfn_ = std::move(derivative);
    a.custom_aps_ = alpha_prime_star;
    return a;
}

double AlphaProfile::value(double y) const {
    switch (kind_) {
        case AlphaKind::Sigmoid: return 1.0 / (1.0 + std::exp(-gain_ * y));
        case AlphaKind::TanhScaled: return amp_ * std::tanh(y / scale_);
        case AlphaKind::IdentityOnBox: return y;
        case AlphaKind::Custom: return fn_(y);
    }
    return 0.0;
}

double AlphaProfile::derivative(double y) const {
    switch (kind_) {
        case AlphaKind::Sigmoid: {
            const double s = 1.0 / (1.0 + std::exp(-gain_ * y));
            return gain_ * s * (1.0 - s);
        }
        case AlphaKind::TanhScaled: {
            const double t = std::tanh(y / scale_);
            return amp_ / scale_ * (1.0 - t * t);
        }
        case AlphaKind::IdentityOnBox: return 1.0;
        case AlphaKind::Custom: return dfn_(y);
    }
    return 0.0;
}

double AlphaProfile::alpha_prime_star() const {
    switch (kind_) {
        case AlphaKind::Sigmoid:
        case AlphaKind::TanhScaled:
            // alpha' peaks at 0 and decays in |y|: the infimum over the box
            // sits at the endpoint farther from the origin.
            return std::min(derivative(lo_), derivative(hi_));
        case AlphaKind::IdentityOnBox: return 1.0;
        case AlphaKind::Custom: return custom_aps_;
    }
    return 0.0;
}

double AlphaProfile::alpha_prime_sup() const {
    switch (kind_) {
        case AlphaKind::Sigmoid:
        case AlphaKind::TanhScaled:
            if (lo_ <= 0.0 && 0.0 <= hi_) return derivative(0.0);
            return std::max(derivative(lo_), derivative(hi_));
        case AlphaKind::IdentityOnBox: return 1.0;
        case AlphaKind::Custom: {
            // sampled estimate; custom profiles are test hooks only
            double s = 0.0;
            for (int k = 0; k <= 256; ++k)
                s = std::max(s, dfn_(lo_ + (hi_ - lo_) * k / 256.0));
            return s;
        }
    }
    return 0.0;
}

double AlphaProfile::oscillation() const {
    // every supported profile is nondecreasing on the box
    return value(hi_) - value(lo_);
}

// --- OmegaSpec ---------------------------------------------------------------

OmegaSpec OmegaSpec::constant(double c) {
    if (!std::isfinite(c)) throw invalid_input("OmegaSpec::constant: non-finite");
    OmegaSpec s;
    s.kind_ = OmegaKind::Constant;
    s.c_ = c;
    s.omega_star_ = c;
    return s;
}

OmegaSpec OmegaSpec::kernel(std::size_t n, std::vector<double> w_table,
                            double omega_star) {
    if (w_table.size() != n * n * n)
        throw invalid_input("OmegaSpec::kernel: W table size mismatch");
    for (double x : w_table)
        if (!std::isfinite(x)) throw invalid_input("OmegaSpec::kernel: non-finite W");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k)
                if (w_table[(i * n + j) * n + k] != w_table[(j * n + i) * n + k])
                    throw invalid_input(
                        "OmegaSpec::kernel: W must be symmetric in (x,y)");
    OmegaSpec s;
    s.kind_ = OmegaKind::Kernel;
    s.n_ = n;
    s.w_ = std::move(w_table);
    s.omega_star_ = omega_star;
    return s;
}

double OmegaSpec::c_omega(double mass) const {
    if (kind_ == OmegaKind::Constant) return std::abs(c_);
    double wmax = 0.0;
    for (double x : w_) wmax = std::max(wmax, std::abs(x));
    return wmax * std::abs(mass);
}

double OmegaSpec::l_omega(const BaseMeasure& mu) const {
    if (kind_ == OmegaKind::Constant) return 0.0;
    double worst = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j) {
            if (i == j) continue;
            double s = 0.0;
            for (std::size_t k = 0; k < n_; ++k)
                s += std::abs(w(i, j, k)) * mu.weight(k);
            worst = std::max(worst, s);
        }
    return worst;
}

// --- field constructors --------------------------------------------------------

EdgeField velocity_from_kernel(const InteractionKernelSpec& spec,
                               const VertexDensity& r, const BaseMeasure& mu) {
    const std::size_t n = mu.size();
    if (spec.size() != n || r.size() != n)
        throw invalid_input("velocity_from_kernel: size mismatch");
    EdgeField v(n, Symmetry::Antisymmetric);
    // V(i,j) = -sum_k (K(j,k) - K(i,k)) r_k m_k; fill the upper triangle and
    // mirror so antisymmetry is exact in floating point.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                s += (spec(j, k) - spec(i, k)) * r[k] * mu.weight(k);
            v.set(i, j, -s);
            v.set(j, i, s);
        }
    return v;
}

EdgeField velocity_from_alpha(const AlphaProfile& alpha, const VertexDensity& r) {
    const std::size_t n = r.size();
    for (std::size_t i = 0; i < n; ++i)
        if (!alpha.in_box(r[i]))
            throw contract_violation(
                "velocity_from_alpha: r[" + std::to_string(i) + "] = " +
                std::to_string(r[i]) + " outside the working box [" +
                std::to_string(alpha.box_lo()) + ", " +
                std::to_string(alpha.box_hi()) + "]");
    std::vector<double> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = alpha.value(r[i]);
    EdgeField v(n, Symmetry::Antisymmetric);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) v.set(i, j, a[i] - a[j]);
    return v;
}

EdgeField omega_eval(const OmegaSpec& spec, const VertexDensity& r,
                     const BaseMeasure& mu) {
    const std::size_t n = mu.size();
    if (r.size() != n) throw invalid_input("omega_eval: size mismatch");
    EdgeField w(n, Symmetry::Symmetric);
    if (spec.kind() == OmegaKind::Constant) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) w.set(i, j, spec.constant_value());
        return w;
    }
    if (spec.table_size() != n)
        throw invalid_input("omega_eval: kernel table size mismatch");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                s += spec.w(i, j, k) * r[k] * mu.weight(k);
            w.set(i, j, s);
            w.set(j, i, s);
        }
    // the declared floor is part of the contract whenever the density is in
    // the nonnegative regime it was stated for
    if (spec.omega_star() > 0.0 && r.min() >= 0.0 && n >= 2) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j && w(i, j) < spec.omega_star() - 1e-12)
                    throw contract_violation(
                        "omega_eval: omega(" + std::to_string(i) + "," +
                        std::to_string(j) + ") = " + std::to_string(w(i, j)) +
                        " violates declared omega_star = " +
                        std::to_string(spec.omega_star()));
    }
    return w;
}

// --- monotonicity suite --------------------------------------------------------

bool MonotonicityReport::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

MonotonicityReport monotonicity_suite(const AlphaProfile& alpha, int samples,
                                      std::uint64_t seed) {
    if (samples < 1)
        throw invalid_input("monotonicity_suite: samples must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> box(alpha.box_lo(), alpha.box_hi());

    auto V = [&](double a, double b) { return alpha.value(a) - alpha.value(b); };
    auto Vp = [&](double a, double b) { return std::max(V(a, b), 0.0); };
    auto Vm = [&](double a, double b) { return std::max(-V(a, b), 0.0); };

    PropertyCheck outflow{"higher mass sends more: V+ monotone, V+(a,a')>0 for a>a'"};
    PropertyCheck inflow{"lower mass receives more: V- monotone, V-(a,a')>0 for a<a'"};
    PropertyCheck equal_values{"equal masses give equal velocities"};
    PropertyCheck diagonal{"V(a,a) = 0"};

    auto record = [](PropertyCheck& c, double violation, double a, double b,
                     double v) {
        if (violation > c.worst || (!c.pass && c.worst == 0.0)) {
            c.worst = violation;
            c.witness[0] = a;
            c.witness[1] = b;
            c.witness[2] = v;
        }
        if (violation > 0.0) c.pass = false;
    };

    for (int s = 0; s < samples; ++s) {
        double a = box(rng), ap = box(rng);
        const double c = box(rng);
        if (a == ap) continue;
        if (a < ap) std::swap(a, ap); // a > ap
        // weak monotonicity in the moving slot
        record(outflow, Vp(ap, c) - Vp(a, c), a, ap, c);
        record(inflow, Vm(a, c) - Vm(ap, c), a, ap, c);
        // strictness probe at c = a' (resp. c = a): strictly more mass must
        // produce strictly positive outflow toward the smaller vertex
        if (!(Vp(a, ap) > 0.0)) record(outflow, 1.0, a, ap, ap);
        if (!(Vm(ap, a) > 0.0)) record(inflow, 1.0, a, ap, a);
        // equality bullets, exact
        record(equal_values, std::abs(V(a, c) - V(a, c)), a, a, c);
        record(diagonal, std::abs(V(c, c)), c, c, 0.0);
    }

    for (PropertyCheck* c : {&outflow, &inflow, &equal_values, &diagonal})
        if (c->pass) c->worst = 0.0;

    MonotonicityReport rep;
    rep.checks = {outflow, inflow, equal_values, diagonal};
    return rep;
}

// --- VelocitySpec ----------------------------------------------------------------

VelocitySpec VelocitySpec::from_kernel(InteractionKernelSpec k) {
    VelocitySpec v;
    v.kind = Kind::Kernel;
    v.kernel = std::move(k);
    return v;
}

VelocitySpec VelocitySpec::from_alpha(AlphaProfile a) {
    VelocitySpec v;
    v.kind = Kind::Alpha;
    v.alpha = std::move(a);
    return v;
}

VelocitySpec VelocitySpec::static_kernel(const InteractionKernelSpec& k,
                                         const VertexDensity& reference,
                                         const BaseMeasure& mu) {
    VelocitySpec v;
    v.kind = Kind::Static;
    v.static_field = velocity_from_kernel(k, reference, mu);
    return v;
}

EdgeField VelocitySpec::eval(const VertexDensity& r, const BaseMeasure& mu) const {
    switch (kind) {
        case Kind::Kernel: return velocity_from_kernel(kernel, r, mu);
        case Kind::Alpha:
            if (r.size() != mu.size())
                throw invalid_input("VelocitySpec: size mismatch");
            return velocity_from_alpha(alpha, r);
        case Kind::Static:
            if (static_field.size() != mu.size())
                throw invalid_input("VelocitySpec: static field size mismatch");
            return static_field;
    }
    throw invalid_input("VelocitySpec: unknown kind");
}

// --- constants -------------------------------------------------------------------

BoundsLedger constants_of(const FluxInterpolation& flux,
                          const VelocitySpec& velocity, const OmegaSpec& omega,
                          const EdgeField& eta0, const VertexDensity& r0,
                          const BaseMeasure& mu) {
    const std::size_t n = mu.size();
    if (r0.size() != n || eta0.size() != n)
        throw invalid_input("constants_of: size mismatch");

    BoundsLedger lg;
    lg.L_Phi = flux.lipschitz();
    lg.mu_K = mu.total();
    lg.norm_r0_inf = r0.sup_norm();
    lg.norm_eta0_inf = eta0.sup_norm();
    double m = 0.0, l2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        m += mu.weight(i) * r0[i];
        l2 += mu.weight(i) * r0[i] * r0[i];
    }
    lg.M = m;
    lg.norm_r0_l2 = std::sqrt(l2);

    switch (velocity.kind) {
        case VelocitySpec::Kind::Alpha: {
            const AlphaProfile& a = velocity.alpha;
            lg.C_V = a.oscillation();
            lg.L_V = 2.0 * a.alpha_prime_sup();
            lg.alpha_prime_star = a.alpha_prime_star();
            break;
        }
        case VelocitySpec::Kind::Kernel: {
            // sampled supremum over the corners of the box {0, ||r0||_inf e_i}
            // plus r0 itself; an estimate, not a certificate
            double cv = velocity_from_kernel(velocity.kernel, r0, mu).sup_norm();
            VertexDensity corner(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                corner[i] = lg.norm_r0_inf;
                cv = std::max(
                    cv, velocity_from_kernel(velocity.kernel, corner, mu).sup_norm());
                corner[i] = 0.0;
            }
            lg.C_V = cv;
            lg.c_v_is_estimate = true;
            lg.L_V = 2.0 * velocity.kernel.sup();
            break;
        }
        case VelocitySpec::Kind::Static: {
            lg.C_V = velocity.static_field.sup_norm();
            lg.L_V = 0.0;
            break;
        }
    }

    lg.C_omega = omega.c_omega(lg.M);
    lg.L_omega = omega.l_omega(mu);
    lg.omega_star = omega.omega_star();
    lg.eta_star = n >= 2 ? std::min(eta0.min_offdiag(), lg.omega_star)
                         : lg.omega_star;
    return lg;
}

} // namespace concl
