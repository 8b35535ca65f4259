#ifndef CONCL_GRAPH_CE_HPP
#define CONCL_GRAPH_CE_HPP

#include <cstddef>
#include <vector>

#include "concl/dynamics.hpp"
#include "concl/metrics.hpp"

namespace concl {

/// Mean-field velocity of the graph continuity equation at (xi, vertex i):
///   X = -sum_{j != i} m_j eta(i,j) sum_k p_jk Phi(xi, xi_jk; V(i,j)),
/// where V is built from the density r of the driving solution.
double field_X(const AtomicDisintegration& sigma, const VertexDensity& r,
               const EdgeField& eta, const FluxInterpolation& flux,
               const VelocitySpec& velocity, const BaseMeasure& mu, double xi,
               std::size_t vertex);

/// Time sampler over a uniformly recorded trajectory. Node hits are returned
/// exactly; off-node times use 4-point cubic Lagrange interpolation, keeping
/// the advection inside the RK4 error budget.
class TrajectorySampler {
  public:
    explicit TrajectorySampler(const Trajectory& traj);

    double t_begin() const { return traj_->times.front(); }
    double t_end() const { return traj_->times.back(); }
    double grid_dt() const { return h_; }

    /// Density and edge weights at time t.
    void sample(double t, VertexDensity& r_out, EdgeField& eta_out) const;

  private:
    const Trajectory* traj_;
    double h_;
};

struct AdvectOptions {
    double dt = 1e-3;
    std::size_t record_stride = 1;
    /// probe positions advected passively at every vertex (flow-map probes)
    std::vector<double> probe_offsets;
    double blowup_factor = 1e3;
};

struct AdvectResult {
    SigmaTrajectory sigma;
    /// probe_paths[v][p][k]: probe p at vertex v, recorded time k
    std::vector<std::vector<std::vector<double>>> probe_paths;
    std::vector<double> probe_times;
};

/// Push-forward solution of the graph continuity equation: atoms move by RK4
/// under the self-consistent field X, atom weights never change. The whole
/// ensemble is one coupled state; every stage reads a consistent snapshot.
/// euler_traj must be recorded on a uniform grid at least as fine as dt.
AdvectResult advect(const AtomicDisintegration& sigma0,
                    const Trajectory& euler_traj, const Model& model,
                    const AdvectOptions& opt);

struct FlowPropertyReport {
    bool growth_ok = true;
    double growth_worst_ratio = 0.0; // max |f|/(e^{C~T}(1+|u|))
    bool lipschitz_ok = true;
    double lipschitz_worst_ratio = 0.0; // max |f(u)-f(l)| / (e^{CbarT}|u-l|)
    bool continuity_ok = true;
    double continuity_worst_ratio = 0.0; // max step increment / (C dt)
    double m2_gamma_star = 0.0;          // measured sup second moment
    double growth_constant = 0.0;        // C~
    double lipschitz_constant = 0.0;     // Cbar
};

/// Checks the linear-growth, Lipschitz-in-u and time-continuity bounds of the
/// flow map against the ledger constants, using the probe trajectories of a
/// completed advect run.
FlowPropertyReport flow_property_suite(const AdvectResult& run,
                                       const BoundsLedger& ledger,
                                       const BaseMeasure& mu);

struct StabilityReport {
    bool identical = false;    // initial distance was zero; ratio skipped
    double initial_distance = 0.0;
    double sup_distance = 0.0; // D_{mu,d} over the run
    double observed_ratio = 0.0;
    /// log of sqrt(2) exp(Cbar T + sqrt(C(T)) T); the envelope is doubly
    /// exponential in the ledger constants and routinely overflows a double,
    /// so the comparison is carried out in log space.
    double envelope_log = 0.0;
    double envelope = 0.0; // exp(envelope_log), saturating at infinity
    bool within_envelope() const;
};

/// Advects both initial disintegrations along the same driving solution and
/// compares the observed amplification of their distance with the
/// theoretical stability envelope.
StabilityReport stability_experiment(const AtomicDisintegration& init_a,
                                     const AtomicDisintegration& init_b,
                                     const Trajectory& euler_traj,
                                     const Model& model,
                                     const AdvectOptions& opt,
                                     const BoundsLedger& ledger);

} // namespace concl

#endif
