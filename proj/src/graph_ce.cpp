#include "concl/graph_ce.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace concl {

double field_X(const AtomicDisintegration& sigma, const VertexDensity& r,
               const EdgeField& eta, const FluxInterpolation& flux,
               const VelocitySpec& velocity, const BaseMeasure& mu, double xi,
               std::size_t vertex) {
    const std::size_t n = mu.size();
    if (sigma.vertices() != n || r.size() != n || eta.size() != n)
        throw invalid_input("field_X: size mismatch");
    if (vertex >= n) throw invalid_input("field_X: vertex out of range");
    const EdgeField v = velocity.eval(r, mu);
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == vertex) continue;
        const AtomSet1D& atoms = sigma.per_vertex[j];
        double inner = 0.0;
        for (std::size_t k = 0; k < atoms.size(); ++k)
            inner += atoms.weights[k] *
                     flux.eval_unchecked(xi, atoms.positions[k], v(vertex, j));
        acc += mu.weight(j) * eta(vertex, j) * inner;
    }
    return -acc;
}

TrajectorySampler::TrajectorySampler(const Trajectory& traj) : traj_(&traj) {
    if (traj.size() < 2)
        throw invalid_input("TrajectorySampler: need at least two states");
    h_ = traj.times[1] - traj.times[0];
    for (std::size_t k = 1; k < traj.times.size(); ++k)
        if (std::abs(traj.times[k] - traj.times[k - 1] - h_) > 1e-9 * (1.0 + h_))
            throw invalid_input("TrajectorySampler: recorded grid not uniform");
}

void TrajectorySampler::sample(double t, VertexDensity& r_out,
                               EdgeField& eta_out) const {
    const auto& times = traj_->times;
    const auto& states = traj_->states;
    const std::size_t N = states.size();
    if (t < times.front() - 1e-9 || t > times.back() + 1e-9)
        throw invalid_input("TrajectorySampler: time outside the recorded range");

    const double pos = (t - times.front()) / h_;
    const auto nearest = static_cast<std::size_t>(
        std::min(std::llround(pos), static_cast<long long>(N - 1)));
    if (std::abs(times[nearest] - t) < 1e-12 * (1.0 + std::abs(t))) {
        r_out = states[nearest].r;
        eta_out = states[nearest].eta;
        return;
    }

    // cubic 4-point stencil around t, clamped at the ends; short trajectories
    // fall back to the linear stencil
    const std::size_t width = N >= 4 ? 4 : 2;
    std::size_t base = static_cast<std::size_t>(std::max(0.0, std::floor(pos)));
    base = width == 4 ? (base > 0 ? base - 1 : 0) : base;
    base = std::min(base, N - width);
    double w[4] = {0, 0, 0, 0};
    for (std::size_t q = 0; q < width; ++q) {
        w[q] = 1.0;
        for (std::size_t s = 0; s < width; ++s) {
            if (s == q) continue;
            w[q] *= (t - times[base + s]) / (times[base + q] - times[base + s]);
        }
    }

    const std::size_t n = states[0].r.size();
    r_out = VertexDensity(n, 0.0);
    EdgeField eta(n, Symmetry::None);
    auto& ev = eta.mutable_values();
    for (std::size_t q = 0; q < width; ++q) {
        const CoupledState& s = states[base + q];
        for (std::size_t i = 0; i < n; ++i) r_out[i] += w[q] * s.r[i];
        const auto& sv = s.eta.values();
        for (std::size_t m = 0; m < ev.size(); ++m) ev[m] += w[q] * sv[m];
    }
    eta.symmetrize();
    eta_out = std::move(eta);
}

namespace {

using Ensemble = std::vector<std::vector<double>>; // positions per vertex

Ensemble positions_of(const AtomicDisintegration& sigma) {
    Ensemble e(sigma.vertices());
    for (std::size_t i = 0; i < sigma.vertices(); ++i)
        e[i] = sigma.per_vertex[i].positions;
    return e;
}

/// Stage derivative for every atom (and probe) against a consistent snapshot
/// of the ensemble and the frozen (V, eta) samples at the stage time.
void ensemble_rhs(const Ensemble& xi, const Ensemble& probes,
                  const std::vector<std::vector<double>>& weights,
                  const EdgeField& v, const EdgeField& eta,
                  const FluxInterpolation& flux, const BaseMeasure& mu,
                  Ensemble& dxi, Ensemble& dprobes) {
    const std::size_t n = mu.size();
    auto X_at = [&](double pos, std::size_t i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const auto& pj = xi[j];
            const auto& wj = weights[j];
            double inner = 0.0;
            for (std::size_t l = 0; l < pj.size(); ++l)
                inner += wj[l] * flux.eval_unchecked(pos, pj[l], v(i, j));
            acc += mu.weight(j) * eta(i, j) * inner;
        }
        return -acc;
    };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < xi[i].size(); ++k)
            dxi[i][k] = X_at(xi[i][k], i);
        for (std::size_t p = 0; p < probes[i].size(); ++p)
            dprobes[i][p] = X_at(probes[i][p], i);
    }
}

void ensemble_axpy(const Ensemble& x, double a, const Ensemble& y, Ensemble& out) {
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t k = 0; k < x[i].size(); ++k)
            out[i][k] = x[i][k] + a * y[i][k];
}

double ensemble_sup(const Ensemble& x) {
    double s = 0.0;
    for (const auto& row : x)
        for (double v : row) s = std::max(s, std::abs(v));
    return s;
}

} // namespace

AdvectResult advect(const AtomicDisintegration& sigma0,
                    const Trajectory& euler_traj, const Model& model,
                    const AdvectOptions& opt) {
    const std::size_t n = model.mu.size();
    if (sigma0.vertices() != n)
        throw invalid_input("advect: disintegration/measure size mismatch");
    if (!(opt.dt > 0.0)) throw invalid_input("advect: dt must be > 0");

    TrajectorySampler sampler(euler_traj);
    if (sampler.grid_dt() > opt.dt * (1.0 + 1e-9))
        throw invalid_input(
            "advect: euler trajectory grid must be at least as fine as dt");
    const double T = sampler.t_end() - sampler.t_begin();
    const std::size_t steps =
        static_cast<std::size_t>(std::llround(T / opt.dt));
    const std::size_t stride = std::max<std::size_t>(1, opt.record_stride);

    std::vector<std::vector<double>> weights(n);
    for (std::size_t i = 0; i < n; ++i)
        weights[i] = sigma0.per_vertex[i].weights;

    Ensemble xi = positions_of(sigma0);
    Ensemble probes(n);
    for (std::size_t i = 0; i < n; ++i) probes[i] = opt.probe_offsets;

    const double guard =
        opt.blowup_factor * std::max({ensemble_sup(xi), ensemble_sup(probes), 1e-30});

    // scratch ensembles for the four stages
    Ensemble k1 = xi, k2 = xi, k3 = xi, k4 = xi, tmp = xi;
    Ensemble pk1 = probes, pk2 = probes, pk3 = probes, pk4 = probes,
             ptmp = probes;

    VertexDensity r_s;
    EdgeField eta_s;

    AdvectResult res;
    auto snapshot = [&](double t) {
        std::vector<AtomSet1D> atoms(n);
        for (std::size_t i = 0; i < n; ++i)
            atoms[i] = AtomSet1D(xi[i], weights[i]);
        res.sigma.times.push_back(t);
        res.sigma.states.push_back(AtomicDisintegration(std::move(atoms)));
        res.probe_times.push_back(t);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t p = 0; p < probes[i].size(); ++p)
                res.probe_paths[i][p].push_back(probes[i][p]);
    };
    res.probe_paths.assign(n, {});
    for (std::size_t i = 0; i < n; ++i)
        res.probe_paths[i].assign(opt.probe_offsets.size(), {});

    const double t0 = sampler.t_begin();
    snapshot(t0);

    auto stage = [&](double t, const Ensemble& pos, const Ensemble& ppos,
                     Ensemble& out, Ensemble& pout) {
        sampler.sample(t, r_s, eta_s);
        const EdgeField v = model.velocity.eval(r_s, model.mu);
        ensemble_rhs(pos, ppos, weights, v, eta_s, model.flux, model.mu, out,
                     pout);
    };

    for (std::size_t s = 1; s <= steps; ++s) {
        const double t = t0 + static_cast<double>(s - 1) * opt.dt;
        const double half = opt.dt / 2.0;

        stage(t, xi, probes, k1, pk1);
        ensemble_axpy(xi, half, k1, tmp);
        ensemble_axpy(probes, half, pk1, ptmp);
        stage(t + half, tmp, ptmp, k2, pk2);
        ensemble_axpy(xi, half, k2, tmp);
        ensemble_axpy(probes, half, pk2, ptmp);
        stage(t + half, tmp, ptmp, k3, pk3);
        ensemble_axpy(xi, opt.dt, k3, tmp);
        ensemble_axpy(probes, opt.dt, pk3, ptmp);
        stage(t + opt.dt, tmp, ptmp, k4, pk4);

        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < xi[i].size(); ++k)
                xi[i][k] += opt.dt / 6.0 *
                            (k1[i][k] + 2 * k2[i][k] + 2 * k3[i][k] + k4[i][k]);
            for (std::size_t p = 0; p < probes[i].size(); ++p)
                probes[i][p] +=
                    opt.dt / 6.0 *
                    (pk1[i][p] + 2 * pk2[i][p] + 2 * pk3[i][p] + pk4[i][p]);
        }
        if (ensemble_sup(xi) > guard || !std::isfinite(ensemble_sup(xi)))
            throw blowup_error("advect: atom positions blew up at t = " +
                               std::to_string(t + opt.dt));
        if (s % stride == 0 || s == steps)
            snapshot(t0 + static_cast<double>(s) * opt.dt);
    }
    return res;
}

FlowPropertyReport flow_property_suite(const AdvectResult& run,
                                       const BoundsLedger& ledger,
                                       const BaseMeasure& mu) {
    FlowPropertyReport rep;
    if (run.probe_paths.empty() || run.probe_paths[0].empty())
        throw invalid_input("flow_property_suite: run carries no probes");
    const double T =
        run.probe_times.back() - run.probe_times.front();

    // measured sup-in-time second moment of the xi-marginal
    for (const auto& st : run.sigma.states)
        rep.m2_gamma_star = std::max(rep.m2_gamma_star, st.second_moment(mu));

    // the ledger C_V plays the role of the square-rooted second-moment bound
    const double edge_bound =
        ledger.L_Phi * (ledger.norm_eta0_inf + ledger.C_omega) * ledger.C_V;
    rep.growth_constant =
        edge_bound * std::max(1.0, std::sqrt(rep.m2_gamma_star));
    rep.lipschitz_constant = edge_bound;

    const double growth_env = std::exp(rep.growth_constant * T);
    const double lip_env = std::exp(rep.lipschitz_constant * T);

    double max_f = 0.0;
    const std::size_t n = run.probe_paths.size();
    const std::size_t np = run.probe_paths[0].size();
    const std::size_t nt = run.probe_times.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < np; ++p) {
            const double u = run.probe_paths[i][p].front();
            for (std::size_t k = 0; k < nt; ++k) {
                const double f = run.probe_paths[i][p][k];
                max_f = std::max(max_f, std::abs(f));
                const double ratio = std::abs(f) / (growth_env * (1.0 + std::abs(u)));
                rep.growth_worst_ratio = std::max(rep.growth_worst_ratio, ratio);
            }
        }
        // Lipschitz over all probe pairs at this vertex
        for (std::size_t p = 0; p < np; ++p)
            for (std::size_t q = p + 1; q < np; ++q) {
                const double du = std::abs(run.probe_paths[i][p].front() -
                                           run.probe_paths[i][q].front());
                if (du == 0.0) continue;
                for (std::size_t k = 0; k < nt; ++k) {
                    const double diff = std::abs(run.probe_paths[i][p][k] -
                                                 run.probe_paths[i][q][k]);
                    rep.lipschitz_worst_ratio =
                        std::max(rep.lipschitz_worst_ratio, diff / (lip_env * du));
                }
            }
    }
    rep.growth_ok = rep.growth_worst_ratio <= 1.0 + 1e-12;
    rep.lipschitz_ok = rep.lipschitz_worst_ratio <= 1.0 + 1e-12;

    // time continuity: increments are bounded by the field speed times dt
    const double speed = rep.growth_constant * (1.0 + max_f);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = 0; p < np; ++p)
            for (std::size_t k = 1; k < nt; ++k) {
                const double dt = run.probe_times[k] - run.probe_times[k - 1];
                const double inc = std::abs(run.probe_paths[i][p][k] -
                                            run.probe_paths[i][p][k - 1]);
                rep.continuity_worst_ratio = std::max(
                    rep.continuity_worst_ratio, inc / (speed * dt + 1e-300));
            }
    rep.continuity_ok = rep.continuity_worst_ratio <= 1.0 + 1e-12;
    return rep;
}

bool StabilityReport::within_envelope() const {
    if (identical) return true;
    return observed_ratio > 0.0 ? std::log(observed_ratio) <= envelope_log
                                : true;
}

StabilityReport stability_experiment(const AtomicDisintegration& init_a,
                                     const AtomicDisintegration& init_b,
                                     const Trajectory& euler_traj,
                                     const Model& model,
                                     const AdvectOptions& opt,
                                     const BoundsLedger& ledger) {
    StabilityReport rep;
    rep.initial_distance = l2mu_d2(init_a, init_b, model.mu);

    const AdvectResult ra = advect(init_a, euler_traj, model, opt);
    const AdvectResult rb = advect(init_b, euler_traj, model, opt);
    rep.sup_distance = dmu_sup(ra.sigma, rb.sigma, model.mu);

    const double T = euler_traj.times.back() - euler_traj.times.front();
    const double e = ledger.L_Phi * (ledger.norm_eta0_inf + ledger.C_omega);
    const double cv = ledger.C_V; // stands in for the root second-moment bound
    const double cbar = e * cv;
    // sqrt(C(T)) with C(T) = (e cv)^2 exp((e cv)^2 T^2), in log space
    const double log_calc = 2.0 * std::log(std::max(cbar, 1e-300)) +
                            cbar * cbar * T * T;
    rep.envelope_log =
        0.5 * std::log(2.0) + cbar * T + std::exp(0.5 * log_calc) * T;
    rep.envelope = std::exp(std::min(rep.envelope_log, 709.0));
    if (rep.envelope_log > 709.0)
        rep.envelope = std::numeric_limits<double>::infinity();

    if (rep.initial_distance == 0.0) {
        rep.identical = true;
        rep.observed_ratio = 0.0;
    } else {
        rep.observed_ratio = rep.sup_distance / rep.initial_distance;
    }
    return rep;
}

} // namespace concl
