#ifndef CONCL_ORACLE_HPP
#define CONCL_ORACLE_HPP

#include <vector>

#include "concl/dynamics.hpp"
#include "concl/metrics.hpp"

namespace concl::oracle {

/// Explicit-Euler reference integrator. Deliberately naive: one derivative
/// evaluation per step, no stage machinery shared with the production RK4.
/// Returns the states at the requested sample times (each must sit on the
/// fine grid within 1e-9).
std::vector<CoupledState> euler_states(const CoupledState& init,
                                       const Model& model, double dt_fine,
                                       const std::vector<double>& sample_times);

/// Richardson-extrapolated Euler reference: two runs at h and h/2 combined as
/// 2*y_{h/2} - y_h, giving an O(h^2) reference error while staying in the
/// Euler method family.
std::vector<CoupledState> reference_states(const CoupledState& init,
                                           const Model& model, double dt_fine,
                                           const std::vector<double>& sample_times);

/// Convenience wrapper producing a Trajectory sampled at multiples of
/// sample_dt up to t_end.
Trajectory reference_integrate(const CoupledState& init, const Model& model,
                               double dt_fine, double sample_dt, double t_end);

/// Brute-force 1D W_2 for at most 4 atoms per side: minimizes the transport
/// cost over greedy saturation orders (north-west-corner variants), which
/// cover the monotone plan and a wide family of basic feasible couplings.
double bruteforce_w2(const AtomSet1D& a, const AtomSet1D& b);

/// Parameters of y' = a y - b y^2.
struct BernoulliParams {
    double a = 1.0;
    double b = 1.0;
    double y0 = 0.0;
};

/// Closed form y(t) = y0 a e^{at} / (a + b y0 (e^{at} - 1)), evaluated in the
/// overflow-safe form y0 a / (b y0 + (a - b y0) e^{-at}).
std::vector<double> bernoulli_closed_form(const BernoulliParams& p,
                                          const std::vector<double>& times);

struct ComparisonReport {
    bool ok = true;
    double max_violation = 0.0;
    double first_time = 0.0;
    std::size_t first_index = 0;
};

/// Pointwise comparison f <= g (direction = +1) or f >= g (direction = -1)
/// within tol * scale at every sample; reports the first offending time.
ComparisonReport comparison_lemma_check(const std::vector<double>& times,
                                        const std::vector<double>& f_samples,
                                        const std::vector<double>& g_samples,
                                        int direction, double tol = 1e-6);

} // namespace concl::oracle

#endif
