#ifndef CONCL_DYNAMICS_HPP
#define CONCL_DYNAMICS_HPP

#include <cstddef>
#include <vector>

#include "concl/fields.hpp"
#include "concl/graph_core.hpp"
#include "concl/interpolation.hpp"

namespace concl {

/// Everything needed to evaluate the coupled right-hand side.
struct Model {
    BaseMeasure mu;
    FluxInterpolation flux;
    VelocitySpec velocity;
    OmegaSpec omega;
};

/// The unknowns of the coupled system at one instant.
struct CoupledState {
    VertexDensity r;
    EdgeField eta; // symmetric, zero diagonal
    double t = 0.0;
};

struct DiagnosticsRow {
    double t = 0.0;
    double mass = 0.0;
    double r_min = 0.0;
    double r_max = 0.0;
    double eta_min = 0.0; // off-diagonal minimum
    double eta_max = 0.0; // off-diagonal sup norm
    std::size_t r_argmin = 0;
};

struct Trajectory {
    std::vector<double> times;                 // recorded state times
    std::vector<CoupledState> states;          // one per recorded time
    std::vector<DiagnosticsRow> diagnostics;   // every step, including t=0
    bool blew_up = false;                      // only with partial_on_blowup
    std::string blowup_note;

    std::size_t size() const { return states.size(); }
    const CoupledState& front() const { return states.front(); }
    const CoupledState& back() const { return states.back(); }
    /// Spacing of the recorded grid; recorded times are uniform.
    double grid_dt() const;
};

struct RhsResult {
    VertexDensity dr;
    EdgeField deta; // symmetric
};

/// dr_i = -sum_j Phi(r_i, r_j; V(i,j)) eta(i,j) m_j,
/// deta = omega[r] - eta.
RhsResult rhs(const CoupledState& state, const Model& model);

/// Density part of the right-hand side against a frozen edge weight; the
/// velocity is evaluated at the given density.
VertexDensity rhs_r(const VertexDensity& r, const EdgeField& eta,
                    const Model& model);

/// One classical RK4 step on the concatenated (r, eta) system; eta symmetry
/// re-asserted by averaging.
CoupledState step_rk4(const CoupledState& state, double dt, const Model& model);

/// Exponential step for the edge weights with omega frozen at the current
/// density: eta(t+dt) = e^{-dt} eta(t) + (1 - e^{-dt}) omega[r(t)].
/// Exact when omega is constant in time.
EdgeField step_eta_exact(const CoupledState& state, double dt,
                         const OmegaSpec& omega, const BaseMeasure& mu);

enum class Scheme { Rk4Coupled, Rk4ExactEta, Euler };

struct IntegrateOptions {
    Scheme scheme = Scheme::Rk4ExactEta;
    double dt = 1e-3;
    double t_end = 1.0;
    std::size_t record_stride = 1; // full states every this many steps
    double blowup_factor = 1e3;    // abort when ||r||_inf exceeds this times ||r0||_inf
    bool partial_on_blowup = false; // return the rows so far instead of throwing
};

/// Integrate the coupled system. Diagnostics are recorded at every step;
/// full states at the configured stride (always including start and end).
Trajectory integrate(const CoupledState& init, const Model& model,
                     const IntegrateOptions& opt);

// --- Picard fixed point ------------------------------------------------------

struct PicardOptions {
    double horizon = 0.1;
    double grid_dt = 1e-3;
    int max_iters = 60;
    double tol = 1e-10;
};

struct PicardResult {
    Trajectory trajectory;
    std::vector<double> ratios; // empirical contraction ratio per iteration
    int iterations = 0;
    bool converged = false;
};

/// Iterates the integral solution map on a fixed time grid with composite
/// trapezoid quadrature, starting from the constant-in-time curve at the
/// initial datum. Stops when the sup-in-time distance
/// ||r||_{L^2_mu} + sup-norm on edges between consecutive iterates drops
/// below tol. Throws horizon_error when the ratio stays >= 1 for three
/// consecutive iterations.
PicardResult picard_solve(const CoupledState& init, const Model& model,
                          const PicardOptions& opt);

/// Sup-in-time of ||r1-r2||_{L^2_mu} + sup-in-time edge sup norm between two
/// trajectories on the same grid.
double trajectory_distance(const Trajectory& a, const Trajectory& b,
                           const BaseMeasure& mu);

// --- diagnostics ---------------------------------------------------------------

struct PositivityReport {
    bool ok = true;
    bool applicable = true; // false when the scenario is out of hypothesis
    double threshold = 0.0;
    double min_value = 0.0;
    double first_time = 0.0;
    std::size_t first_vertex = 0;
};

/// Asserts min_i r_i(t) >= -1e-10 * ||r0||_inf at every recorded step.
/// Callers are responsible for only asserting it on upwind scenarios with
/// positive symmetric eta and nonnegative initial density.
PositivityReport positivity_check(const Trajectory& traj);

/// b(t) = eta0_min e^{-t} + omega_star (1 - e^{-t}).
std::vector<double> eta_lower_bound_curve(double eta0_min, double omega_star,
                                          const std::vector<double>& times);

} // namespace concl

#endif
