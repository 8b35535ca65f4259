#ifndef CONCL_INTERPOLATION_HPP
#define CONCL_INTERPOLATION_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "concl/errors.hpp"

namespace concl {

enum class FluxKind { Upwind, ProductMean, ProductMax, Custom };

/// Admissible flux interpolation Phi(a, b; v) mapping two vertex densities
/// and an edge velocity to an edge flux. The three built-ins are degenerate
/// at v = 0, argument-wise Lipschitz with L_Phi = 1, positively
/// one-homogeneous in (a, b) and jointly antisymmetric. Custom interpolations
/// declare their own Lipschitz constant and antisymmetry claim.
class FluxInterpolation {
  public:
    static FluxInterpolation upwind();
    static FluxInterpolation product_mean();
    static FluxInterpolation product_max();
    static FluxInterpolation custom(std::function<double(double, double, double)> fn,
                                    double lipschitz,
                                    bool jointly_antisymmetric);

    FluxKind kind() const { return kind_; }
    double lipschitz() const { return l_phi_; }
    bool jointly_antisymmetric() const { return antisym_; }
    const char* name() const;

    /// Evaluate Phi(a, b; v). Non-finite inputs are rejected.
    double eval(double a, double b, double v) const;

    /// Unchecked fast path for inner loops; inputs assumed finite.
    double eval_unchecked(double a, double b, double v) const;

  private:
    FluxInterpolation(FluxKind kind, double l_phi, bool antisym)
        : kind_(kind), l_phi_(l_phi), antisym_(antisym) {}

    FluxKind kind_;
    double l_phi_;
    bool antisym_;
    std::function<double(double, double, double)> fn_;
};

/// Outcome of one randomized admissibility property.
struct PropertyCheck {
    std::string property;
    bool pass = true;
    double worst = 0.0;            // worst observed violation (0 when pass)
    double witness[3] = {0, 0, 0}; // (a, b, v) of the worst sample
    double witness_aux = 0.0;      // second velocity / homogeneity factor
};

struct AdmissibilityReport {
    std::vector<PropertyCheck> checks;
    bool all_pass() const;
};

/// Randomized check of Def-2.2 style admissibility: (i) degeneracy at zero,
/// (ii) both Lipschitz inequalities with the declared constant, (iii)
/// positive one-homogeneity, (iv) joint antisymmetry. Returns one record per
/// property with the worst-case witness.
AdmissibilityReport admissibility_suite(const FluxInterpolation& phi,
                                        int samples, std::uint64_t seed);

} // namespace concl

#endif
