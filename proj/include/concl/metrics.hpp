#ifndef CONCL_METRICS_HPP
#define CONCL_METRICS_HPP

#include <cstddef>
#include <vector>

#include "concl/fields.hpp"
#include "concl/graph_core.hpp"

namespace concl {

/// Weighted atoms on the real line; one per-vertex slice of a disintegration.
struct AtomSet1D {
    std::vector<double> positions;
    std::vector<double> weights; // positive, summing to 1

    AtomSet1D() = default;
    AtomSet1D(std::vector<double> pos, std::vector<double> w);
    static AtomSet1D dirac(double x) { return AtomSet1D({x}, {1.0}); }
    std::size_t size() const { return positions.size(); }
};

/// Per-vertex weighted atoms representing sigma in P_2^mu(R x R^d): the
/// R^d-marginal is the base measure, each vertex carries a probability on R.
struct AtomicDisintegration {
    std::vector<AtomSet1D> per_vertex;

    AtomicDisintegration() = default;
    explicit AtomicDisintegration(std::vector<AtomSet1D> atoms);
    /// sigma = delta_r (x) mu: one atom per vertex at the density value.
    static AtomicDisintegration monokinetic(const VertexDensity& r);

    std::size_t vertices() const { return per_vertex.size(); }
    /// First moment against mu: sum_i m_i sum_k p_ik xi_ik.
    double first_moment(const BaseMeasure& mu) const;
    /// Second moment of the xi-marginal: sum_i m_i sum_k p_ik xi_ik^2.
    double second_moment(const BaseMeasure& mu) const;
    double sup_position() const;
};

/// W_p on the line by the monotone (quantile) coupling, p in {1, 2}. Exact
/// for 1D; ties in positions are broken by stable ordering (the cost is
/// tie-invariant).
double wasserstein_1d(int p, const AtomSet1D& a, const AtomSet1D& b);

/// ( sum_i m_i d_2(sigma1_i, sigma2_i)^2 )^{1/2}.
double l2mu_d2(const AtomicDisintegration& s1, const AtomicDisintegration& s2,
               const BaseMeasure& mu);

/// Trajectories of disintegrations on a shared time grid.
struct SigmaTrajectory {
    std::vector<double> times;
    std::vector<AtomicDisintegration> states;
    std::size_t size() const { return states.size(); }
};

/// sup over recorded times of l2mu_d2.
double dmu_sup(const SigmaTrajectory& a, const SigmaTrajectory& b,
               const BaseMeasure& mu);

struct DissipationTerms {
    double derivative_identity = 0.0; // exact d/dt of the squared distance
    double lambda_bound_term = 0.0;   // -sum_i m_i D_i^2 sum_j V_ij eta_ij m_j
};

/// Exact dissipation identity of the upwind contraction argument for two
/// monokinetic states sharing a static antisymmetric velocity and a
/// symmetric edge weight. The identity satisfies
/// derivative_identity <= lambda_bound_term up to rounding.
DissipationTerms contraction_dissipation(const VertexDensity& r1,
                                         const VertexDensity& r2,
                                         const EdgeField& v,
                                         const EdgeField& eta,
                                         const BaseMeasure& mu);

/// Upper Bernoulli envelope for the running sup norm (evaluated in the
/// overflow-safe form R M / (R mu_K + (M - R mu_K) e^{-a t}), a =
/// alpha'_* eta_* M).
std::vector<double> sup_bound_curve(const BoundsLedger& ledger,
                                    const std::vector<double>& times);

/// Lower Bernoulli envelope for the running minimum; identically zero when
/// r0_min = 0.
std::vector<double> inf_bound_curve(const BoundsLedger& ledger, double r0_min,
                                    const std::vector<double>& times);

/// max_i r_i - min_i r_i.
double diameter(const VertexDensity& r);

} // namespace concl

#endif
