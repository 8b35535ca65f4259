#ifndef CONCL_FIELDS_HPP
#define CONCL_FIELDS_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "concl/graph_core.hpp"
#include "concl/interpolation.hpp"

namespace concl {

/// Sampled symmetric interaction kernel K(x_i, x_j) driving the velocity
/// V[r](x,y) = -INT (K(y,z) - K(x,z)) r(z) dmu(z).
struct InteractionKernelSpec {
    std::size_t n = 0;
    std::vector<double> table; // n*n, symmetric

    static InteractionKernelSpec gaussian(const BaseMeasure& mu, double length);
    static InteractionKernelSpec quadratic(const BaseMeasure& mu);
    static InteractionKernelSpec from_table(std::size_t n,
                                            std::vector<double> table);

    std::size_t size() const { return n; }
    double operator()(std::size_t i, std::size_t j) const {
        return table[i * n + j];
    }
    double sup() const;
};

enum class AlphaKind { Sigmoid, TanhScaled, IdentityOnBox, Custom };

/// Monotone profile alpha for pointwise velocities
/// V(r(x), r(x')) = alpha(r(x)) - alpha(r(x')), together with the working box
/// on which alpha' is bounded below by alpha'_* > 0.
class AlphaProfile {
  public:
    /// alpha(y) = 1 / (1 + exp(-gain*y))
    static AlphaProfile sigmoid(double gain, double box_lo, double box_hi);
    /// alpha(y) = amplitude * tanh(y / scale)
    static AlphaProfile tanh_scaled(double amplitude, double scale,
                                    double box_lo, double box_hi);
    /// alpha(y) = y on the box
    static AlphaProfile identity_on_box(double box_lo, double box_hi);
    /// Test hook: arbitrary profile with a declared derivative lower bound.
    static AlphaProfile custom(std::function<double(double)> value,
                               std::function<double(double)> derivative,
                               double alpha_prime_star, double box_lo,
                               double box_hi);

    AlphaKind kind() const { return kind_; }
    double box_lo() const { return lo_; }
    double box_hi() const { return hi_; }
    bool in_box(double y) const { return y >= lo_ - 1e-12 && y <= hi_ + 1e-12; }

    double value(double y) const;
    double derivative(double y) const;

    /// inf of alpha' over the box, analytic per kind.
    double alpha_prime_star() const;
    /// sup of alpha' over the box (Lipschitz constant of alpha).
    double alpha_prime_sup() const;
    /// Oscillation sup alpha - inf alpha over the box; the uniform velocity
    /// bound C_V for pointwise fields.
    double oscillation() const;

  private:
    AlphaProfile(AlphaKind kind, double lo, double hi)
        : kind_(kind), lo_(lo), hi_(hi) {}

    AlphaKind kind_;
    double lo_, hi_;
    double gain_ = 1.0;       // sigmoid
    double amp_ = 1.0;        // tanh
    double scale_ = 1.0;      // tanh
    std::function<double(double)> fn_, dfn_;
    double custom_aps_ = 0.0;
};

enum class OmegaKind { Constant, Kernel };

/// Coupling omega driving the edge-weight relaxation d/dt eta = omega - eta.
/// Constant kind: all off-diagonal entries equal c. Kernel kind:
/// omega[r](x,y) = INT W(x,y,z) r(z) dmu(z) with W symmetric in (x,y).
class OmegaSpec {
  public:
    static OmegaSpec constant(double c);
    /// W flattened as W[(i*n + j)*n + k]; must satisfy W[i][j][.] == W[j][i][.].
    static OmegaSpec kernel(std::size_t n, std::vector<double> w_table,
                            double omega_star);

    OmegaKind kind() const { return kind_; }
    double constant_value() const { return c_; }
    double omega_star() const { return omega_star_; }
    /// Uniform bound C_omega on |omega| over the invariant set of densities
    /// (nonnegative, mass M).
    double c_omega(double mass) const;
    /// Lipschitz constant of r -> omega[r] in the sup norm.
    double l_omega(const BaseMeasure& mu) const;

    std::size_t table_size() const { return n_; }
    double w(std::size_t i, std::size_t j, std::size_t k) const {
        return w_[(i * n_ + j) * n_ + k];
    }

  private:
    OmegaKind kind_ = OmegaKind::Constant;
    double c_ = 0.0;
    double omega_star_ = 0.0;
    std::size_t n_ = 0;
    std::vector<double> w_;
};

// --- field constructors ------------------------------------------------------

/// V(i,j) = -sum_k (K(j,k) - K(i,k)) r_k m_k; exactly antisymmetric.
EdgeField velocity_from_kernel(const InteractionKernelSpec& spec,
                               const VertexDensity& r, const BaseMeasure& mu);

/// V(i,j) = alpha(r_i) - alpha(r_j); errors if any r_i leaves the working box.
EdgeField velocity_from_alpha(const AlphaProfile& alpha, const VertexDensity& r);

/// omega[r] as a symmetric edge field; validates the declared omega_star on
/// nonnegative densities.
EdgeField omega_eval(const OmegaSpec& spec, const VertexDensity& r,
                     const BaseMeasure& mu);

// --- monotonicity -------------------------------------------------------------

struct MonotonicityReport {
    std::vector<PropertyCheck> checks;
    bool all_pass() const;
};

/// Randomized check of the pointwise-monotonic-velocity bullets for the
/// alpha-form velocity on its working box: weak monotonicity of V+ (and V-)
/// in the moving argument with a strictness probe at c = a', plus the two
/// exact equality bullets.
MonotonicityReport monotonicity_suite(const AlphaProfile& alpha, int samples,
                                      std::uint64_t seed);

// --- constants ---------------------------------------------------------------

/// Scalar constants of the a-priori estimates; assembled once per scenario
/// and consumed by the envelope and flow-property checks.
struct BoundsLedger {
    double L_Phi = 1.0;
    double C_V = 0.0;       // uniform sup bound on |V|
    double L_V = 0.0;       // Lipschitz of r -> V in sup norms
    double C_omega = 0.0;
    double L_omega = 0.0;
    double omega_star = 0.0;
    double eta_star = 0.0;  // min(inf eta0, omega_star)
    double alpha_prime_star = 0.0;
    double M = 0.0;             // conserved mass
    double norm_r0_inf = 0.0;
    double norm_r0_l2 = 0.0;
    double norm_eta0_inf = 0.0;
    double mu_K = 0.0;
    bool c_v_is_estimate = false; // kernel velocities: sampled, not certified
};

/// How the velocity field is built; one of the three supported shapes.
struct VelocitySpec {
    enum class Kind { Kernel, Alpha, Static } kind = Kind::Alpha;
    InteractionKernelSpec kernel;  // Kernel
    AlphaProfile alpha = AlphaProfile::identity_on_box(0.0, 1.0);
    EdgeField static_field;        // Static: precomputed antisymmetric field

    static VelocitySpec from_kernel(InteractionKernelSpec k);
    static VelocitySpec from_alpha(AlphaProfile a);
    /// Kernel velocity frozen at a reference density; independent of r.
    static VelocitySpec static_kernel(const InteractionKernelSpec& k,
                                      const VertexDensity& reference,
                                      const BaseMeasure& mu);

    /// Evaluate at the current density.
    EdgeField eval(const VertexDensity& r, const BaseMeasure& mu) const;
    bool pointwise() const { return kind == Kind::Alpha; }
};

BoundsLedger constants_of(const FluxInterpolation& flux,
                          const VelocitySpec& velocity, const OmegaSpec& omega,
                          const EdgeField& eta0, const VertexDensity& r0,
                          const BaseMeasure& mu);

} // namespace concl

#endif
