#include "concl/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace concl {

double Trajectory::grid_dt() const {
    if (times.size() < 2) return 0.0;
    return times[1] - times[0];
}

VertexDensity rhs_r(const VertexDensity& r, const EdgeField& eta,
                    const Model& model) {
    const std::size_t n = model.mu.size();
    if (r.size() != n || eta.size() != n)
        throw invalid_input("rhs_r: size mismatch");
    const EdgeField v = model.velocity.eval(r, model.mu);
    VertexDensity out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            s += model.flux.eval_unchecked(r[i], r[j], v(i, j)) * eta(i, j) *
                 model.mu.weight(j);
        }
        out[i] = -s;
    }
    return out;
}

RhsResult rhs(const CoupledState& state, const Model& model) {
    RhsResult res;
    res.dr = rhs_r(state.r, state.eta, model);
    const EdgeField w = omega_eval(model.omega, state.r, model.mu);
    const std::size_t n = model.mu.size();
    EdgeField deta(n, Symmetry::Symmetric);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) deta.set(i, j, w(i, j) - state.eta(i, j));
    res.deta = std::move(deta);
    return res;
}

namespace {

VertexDensity axpy(const VertexDensity& x, double a, const VertexDensity& y) {
    VertexDensity out(x.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + a * y[i];
    return out;
}

EdgeField axpy_edge(const EdgeField& x, double a, const EdgeField& y) {
    EdgeField out(x.size(), x.symmetry());
    auto& v = out.mutable_values();
    const auto& xv = x.values();
    const auto& yv = y.values();
    for (std::size_t k = 0; k < xv.size(); ++k) v[k] = xv[k] + a * yv[k];
    return out;
}

void check_stage_finite(const VertexDensity& dr, const char* stage) {
    for (double x : dr.values)
        if (!std::isfinite(x))
            throw blowup_error(std::string("step_rk4: non-finite value in stage ") +
                               stage);
}

} // namespace

CoupledState step_rk4(const CoupledState& state, double dt, const Model& model) {
    if (!(dt > 0.0)) throw invalid_input("step_rk4: dt must be > 0");
    const RhsResult k1 = rhs(state, model);
    check_stage_finite(k1.dr, "k1");

    CoupledState s2{axpy(state.r, dt / 2, k1.dr),
                    axpy_edge(state.eta, dt / 2, k1.deta), state.t + dt / 2};
    const RhsResult k2 = rhs(s2, model);
    check_stage_finite(k2.dr, "k2");

    CoupledState s3{axpy(state.r, dt / 2, k2.dr),
                    axpy_edge(state.eta, dt / 2, k2.deta), state.t + dt / 2};
    const RhsResult k3 = rhs(s3, model);
    check_stage_finite(k3.dr, "k3");

    CoupledState s4{axpy(state.r, dt, k3.dr), axpy_edge(state.eta, dt, k3.deta),
                    state.t + dt};
    const RhsResult k4 = rhs(s4, model);
    check_stage_finite(k4.dr, "k4");

    CoupledState out;
    out.t = state.t + dt;
    const std::size_t n = state.r.size();
    out.r = VertexDensity(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        out.r[i] = state.r[i] +
                   dt / 6.0 * (k1.dr[i] + 2 * k2.dr[i] + 2 * k3.dr[i] + k4.dr[i]);
    EdgeField eta(n, Symmetry::None);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j)
                eta.set(i, j, state.eta(i, j) +
                                  dt / 6.0 *
                                      (k1.deta(i, j) + 2 * k2.deta(i, j) +
                                       2 * k3.deta(i, j) + k4.deta(i, j)));
    eta.symmetrize(); // kill rounding drift
    out.eta = std::move(eta);
    return out;
}

EdgeField step_eta_exact(const CoupledState& state, double dt,
                         const OmegaSpec& omega, const BaseMeasure& mu) {
    if (!(dt > 0.0)) throw invalid_input("step_eta_exact: dt must be > 0");
    const EdgeField w = omega_eval(omega, state.r, mu);
    const double decay = std::exp(-dt);
    const double gain = -std::expm1(-dt); // 1 - e^{-dt}
    const std::size_t n = mu.size();
    EdgeField out(n, Symmetry::Symmetric);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) out.set(i, j, decay * state.eta(i, j) + gain * w(i, j));
    return out;
}

namespace {

DiagnosticsRow make_diag(const CoupledState& s) {
    DiagnosticsRow d;
    d.t = s.t;
    const std::size_t n = s.r.size();
    d.r_min = s.r[0];
    d.r_max = s.r[0];
    d.r_argmin = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (s.r[i] < d.r_min) {
            d.r_min = s.r[i];
            d.r_argmin = i;
        }
        d.r_max = std::max(d.r_max, s.r[i]);
    }
    d.eta_min = n >= 2 ? s.eta.min_offdiag() : 0.0;
    d.eta_max = s.eta.sup_norm();
    d.mass = 0.0;
    return d;
}

double mass_of(const CoupledState& s, const BaseMeasure& mu) {
    double m = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) m += mu.weight(i) * s.r[i];
    return m;
}

/// One step of the default scheme: RK4 on r with the edge weights sampled at
/// the stage times from the exponential formula (omega frozen at r(t)),
/// then eta advanced by the same formula.
CoupledState step_rk4_exact_eta(const CoupledState& state, double dt,
                                const Model& model) {
    const EdgeField w = omega_eval(model.omega, state.r, model.mu);
    const std::size_t n = model.mu.size();

    auto eta_at = [&](double tau) {
        const double decay = std::exp(-tau);
        const double gain = -std::expm1(-tau);
        EdgeField out(n, Symmetry::Symmetric);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j)
                    out.set(i, j, decay * state.eta(i, j) + gain * w(i, j));
        return out;
    };
    const EdgeField eta_half = eta_at(dt / 2);
    const EdgeField eta_full = eta_at(dt);

    const VertexDensity k1 = rhs_r(state.r, state.eta, model);
    check_stage_finite(k1, "k1");
    const VertexDensity k2 = rhs_r(axpy(state.r, dt / 2, k1), eta_half, model);
    check_stage_finite(k2, "k2");
    const VertexDensity k3 = rhs_r(axpy(state.r, dt / 2, k2), eta_half, model);
    check_stage_finite(k3, "k3");
    const VertexDensity k4 = rhs_r(axpy(state.r, dt, k3), eta_full, model);
    check_stage_finite(k4, "k4");

    CoupledState out;
    out.t = state.t + dt;
    out.r = VertexDensity(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        out.r[i] = state.r[i] + dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    out.eta = eta_full;
    return out;
}

CoupledState step_euler(const CoupledState& state, double dt, const Model& model) {
    const RhsResult k = rhs(state, model);
    check_stage_finite(k.dr, "euler");
    CoupledState out;
    out.t = state.t + dt;
    out.r = axpy(state.r, dt, k.dr);
    EdgeField eta = axpy_edge(state.eta, dt, k.deta);
    eta.symmetrize();
    out.eta = std::move(eta);
    return out;
}

} // namespace

Trajectory integrate(const CoupledState& init, const Model& model,
                     const IntegrateOptions& opt) {
    if (!(opt.dt > 0.0)) throw invalid_input("integrate: dt must be > 0");
    if (!(opt.t_end > 0.0)) throw invalid_input("integrate: t_end must be > 0");
    if (init.r.size() != model.mu.size() || init.eta.size() != model.mu.size())
        throw invalid_input("integrate: state/measure size mismatch");
    init.eta.require(Symmetry::Symmetric, "integrate");

    const std::size_t steps =
        static_cast<std::size_t>(std::llround(opt.t_end / opt.dt));
    const double r0_scale = std::max(init.r.sup_norm(), 1e-30);
    const std::size_t stride = std::max<std::size_t>(1, opt.record_stride);

    Trajectory traj;
    traj.times.reserve(steps / stride + 2);
    traj.states.reserve(steps / stride + 2);
    traj.diagnostics.reserve(steps + 1);

    CoupledState cur = init;
    auto record_state = [&](const CoupledState& s) {
        traj.times.push_back(s.t);
        traj.states.push_back(s);
    };
    auto record_diag = [&](const CoupledState& s) {
        DiagnosticsRow d = make_diag(s);
        d.mass = mass_of(s, model.mu);
        traj.diagnostics.push_back(d);
    };
    record_state(cur);
    record_diag(cur);

    for (std::size_t k = 1; k <= steps; ++k) {
        try {
            switch (opt.scheme) {
                case Scheme::Rk4Coupled: cur = step_rk4(cur, opt.dt, model); break;
                case Scheme::Rk4ExactEta:
                    cur = step_rk4_exact_eta(cur, opt.dt, model);
                    break;
                case Scheme::Euler: cur = step_euler(cur, opt.dt, model); break;
            }
            cur.t = static_cast<double>(k) * opt.dt; // avoid additive drift
            if (!cur.eta.all_finite())
                throw blowup_error("integrate: non-finite eta at t = " +
                                   std::to_string(cur.t));
            if (cur.r.sup_norm() > opt.blowup_factor * r0_scale)
                throw blowup_error(
                    "integrate: ||r||_inf exceeded " +
                    std::to_string(opt.blowup_factor) +
                    " x ||r0||_inf at t = " + std::to_string(cur.t));
        } catch (const blowup_error& e) {
            if (!opt.partial_on_blowup) throw;
            traj.blew_up = true;
            traj.blowup_note = e.what();
            return traj;
        }
        record_diag(cur);
        if (k % stride == 0 || k == steps) record_state(cur);
    }
    return traj;
}

double trajectory_distance(const Trajectory& a, const Trajectory& b,
                           const BaseMeasure& mu) {
    if (a.size() != b.size())
        throw invalid_input("trajectory_distance: grid mismatch");
    double dr = 0.0, deta = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (std::abs(a.times[k] - b.times[k]) > 1e-12)
            throw invalid_input("trajectory_distance: time grids differ");
        double s = 0.0;
        for (std::size_t i = 0; i < mu.size(); ++i) {
            const double d = a.states[k].r[i] - b.states[k].r[i];
            s += mu.weight(i) * d * d;
        }
        dr = std::max(dr, std::sqrt(s));
        const auto& ea = a.states[k].eta.values();
        const auto& eb = b.states[k].eta.values();
        for (std::size_t m = 0; m < ea.size(); ++m)
            deta = std::max(deta, std::abs(ea[m] - eb[m]));
    }
    return dr + deta;
}

PicardResult picard_solve(const CoupledState& init, const Model& model,
                          const PicardOptions& opt) {
    if (!(opt.horizon > 0.0) || !(opt.grid_dt > 0.0))
        throw invalid_input("picard_solve: horizon and grid_dt must be > 0");
    const std::size_t n = model.mu.size();
    const std::size_t N =
        static_cast<std::size_t>(std::llround(opt.horizon / opt.grid_dt)) + 1;
    if (N < 2) throw invalid_input("picard_solve: grid too coarse");
    const double h = opt.horizon / static_cast<double>(N - 1);

    std::vector<VertexDensity> R(N, init.r);
    std::vector<EdgeField> E(N, init.eta);

    auto curve_distance = [&](const std::vector<VertexDensity>& r1,
                              const std::vector<EdgeField>& e1,
                              const std::vector<VertexDensity>& r2,
                              const std::vector<EdgeField>& e2) {
        double dr = 0.0, de = 0.0;
        for (std::size_t k = 0; k < N; ++k) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = r1[k][i] - r2[k][i];
                s += model.mu.weight(i) * d * d;
            }
            dr = std::max(dr, std::sqrt(s));
            for (std::size_t m = 0; m < e1[k].values().size(); ++m)
                de = std::max(de, std::abs(e1[k].values()[m] - e2[k].values()[m]));
        }
        return dr + de;
    };

    PicardResult res;
    double prev_dist = -1.0;
    int stagnant = 0;
    for (int it = 1; it <= opt.max_iters; ++it) {
        // derivatives of the current curve at every grid node
        std::vector<VertexDensity> F(N);
        std::vector<EdgeField> G(N);
        for (std::size_t k = 0; k < N; ++k) {
            F[k] = rhs_r(R[k], E[k], model);
            const EdgeField w = omega_eval(model.omega, R[k], model.mu);
            EdgeField g(n, Symmetry::Symmetric);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    if (i != j) g.set(i, j, w(i, j) - E[k](i, j));
            G[k] = std::move(g);
        }
        // evaluate the solution map by composite trapezoid prefix sums
        std::vector<VertexDensity> Rn(N, init.r);
        std::vector<EdgeField> En(N, init.eta);
        VertexDensity accR(n, 0.0);
        EdgeField accE(n, Symmetry::Symmetric);
        for (std::size_t k = 1; k < N; ++k) {
            for (std::size_t i = 0; i < n; ++i)
                accR[i] += h * 0.5 * (F[k - 1][i] + F[k][i]);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    if (i != j)
                        accE.set(i, j, accE(i, j) +
                                           h * 0.5 * (G[k - 1](i, j) + G[k](i, j)));
            for (std::size_t i = 0; i < n; ++i) Rn[k][i] = init.r[i] + accR[i];
            EdgeField e(n, Symmetry::Symmetric);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    if (i != j) e.set(i, j, init.eta(i, j) + accE(i, j));
            En[k] = std::move(e);
        }

        const double dist = curve_distance(Rn, En, R, E);
        if (prev_dist > 0.0) {
            const double ratio = dist / prev_dist;
            res.ratios.push_back(ratio);
            stagnant = (!std::isfinite(ratio) || ratio >= 1.0) ? stagnant + 1 : 0;
            if (stagnant >= 3)
                throw horizon_error(
                    "picard_solve: no contraction over three consecutive "
                    "iterations; shorten the horizon (T = " +
                    std::to_string(opt.horizon) + ") or iterate on sub-intervals");
        }
        prev_dist = dist;
        R = std::move(Rn);
        E = std::move(En);
        res.iterations = it;
        if (dist < opt.tol) {
            res.converged = true;
            break;
        }
    }

    Trajectory traj;
    traj.times.resize(N);
    traj.states.resize(N);
    traj.diagnostics.reserve(N);
    for (std::size_t k = 0; k < N; ++k) {
        traj.times[k] = static_cast<double>(k) * h;
        traj.states[k] = CoupledState{R[k], E[k], traj.times[k]};
        DiagnosticsRow d = make_diag(traj.states[k]);
        d.mass = mass_of(traj.states[k], model.mu);
        traj.diagnostics.push_back(d);
    }
    res.trajectory = std::move(traj);
    return res;
}

PositivityReport positivity_check(const Trajectory& traj) {
    PositivityReport rep;
    if (traj.states.empty())
        throw invalid_input("positivity_check: empty trajectory");
    const double scale = traj.front().r.sup_norm();
    rep.threshold = -1e-10 * scale;
    rep.min_value = 0.0;
    for (const auto& d : traj.diagnostics) {
        rep.min_value = std::min(rep.min_value, d.r_min);
        if (d.r_min < rep.threshold && rep.ok) {
            rep.ok = false;
            rep.first_time = d.t;
            rep.first_vertex = d.r_argmin;
        }
    }
    return rep;
}

std::vector<double> eta_lower_bound_curve(double eta0_min, double omega_star,
                                          const std::vector<double>& times) {
    if (omega_star < 0.0)
        throw invalid_input("eta_lower_bound_curve: omega_star must be >= 0");
    std::vector<double> out(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double e = std::exp(-times[k]);
        out[k] = eta0_min * e + omega_star * (1.0 - e);
    }
    return out;
}

} // namespace concl
