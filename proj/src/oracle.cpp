#include "concl/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

namespace concl::oracle {

std::vector<CoupledState> euler_states(const CoupledState& init,
                                       const Model& model, double dt_fine,
                                       const std::vector<double>& sample_times) {
    if (!(dt_fine > 0.0))
        throw invalid_input("euler_states: dt_fine must be > 0");

    // map each sample time onto a step index of the fine grid
    std::vector<std::pair<std::size_t, std::size_t>> marks; // (step, slot)
    for (std::size_t k = 0; k < sample_times.size(); ++k) {
        const double t = sample_times[k];
        if (t < 0.0) throw invalid_input("euler_states: negative sample time");
        const auto step = static_cast<std::size_t>(std::llround(t / dt_fine));
        if (std::abs(static_cast<double>(step) * dt_fine - t) > 1e-9)
            throw invalid_input(
                "euler_states: sample time off the fine grid: " +
                std::to_string(t));
        marks.emplace_back(step, k);
    }
    std::sort(marks.begin(), marks.end());
    const std::size_t steps = marks.empty() ? 0 : marks.back().first;
    const std::size_t n = model.mu.size();
    const double guard = 1e3 * std::max(init.r.sup_norm(), 1e-30);

    std::vector<CoupledState> out(sample_times.size());
    std::size_t next_mark = 0;
    auto maybe_record = [&](const CoupledState& s, std::size_t step) {
        while (next_mark < marks.size() && marks[next_mark].first == step)
            out[marks[next_mark++].second] = s;
    };

    CoupledState cur = init;
    maybe_record(cur, 0);
    for (std::size_t s = 1; s <= steps; ++s) {
        const RhsResult k = rhs(cur, model);
        for (std::size_t i = 0; i < n; ++i) cur.r[i] += dt_fine * k.dr[i];
        auto& ev = cur.eta.mutable_values();
        const auto& dv = k.deta.values();
        for (std::size_t m = 0; m < ev.size(); ++m) ev[m] += dt_fine * dv[m];
        cur.t = static_cast<double>(s) * dt_fine;
        if (!std::isfinite(cur.r[0]) || cur.r.sup_norm() > guard)
            throw blowup_error("euler_states: blow-up at t = " +
                               std::to_string(cur.t));
        maybe_record(cur, s);
    }
    return out;
}

std::vector<CoupledState> reference_states(const CoupledState& init,
                                           const Model& model, double dt_fine,
                                           const std::vector<double>& sample_times) {
    const auto coarse = euler_states(init, model, dt_fine, sample_times);
    const auto fine = euler_states(init, model, dt_fine / 2.0, sample_times);
    std::vector<CoupledState> out(coarse.size());
    for (std::size_t k = 0; k < coarse.size(); ++k) {
        out[k] = fine[k];
        for (std::size_t i = 0; i < out[k].r.size(); ++i)
            out[k].r[i] = 2.0 * fine[k].r[i] - coarse[k].r[i];
        auto& v = out[k].eta.mutable_values();
        const auto& fv = fine[k].eta.values();
        const auto& cv = coarse[k].eta.values();
        for (std::size_t m = 0; m < v.size(); ++m) v[m] = 2.0 * fv[m] - cv[m];
    }
    return out;
}

Trajectory reference_integrate(const CoupledState& init, const Model& model,
                               double dt_fine, double sample_dt, double t_end) {
    if (!(sample_dt > 0.0) || !(t_end > 0.0))
        throw invalid_input("reference_integrate: bad sampling parameters");
    const std::size_t nsamples =
        static_cast<std::size_t>(std::llround(t_end / sample_dt));
    std::vector<double> times(nsamples + 1);
    for (std::size_t k = 0; k <= nsamples; ++k)
        times[k] = static_cast<double>(k) * sample_dt;
    auto states = reference_states(init, model, dt_fine, times);

    Trajectory traj;
    traj.times = times;
    traj.states = std::move(states);
    traj.diagnostics.reserve(traj.states.size());
    for (const auto& s : traj.states) {
        DiagnosticsRow d;
        d.t = s.t;
        d.r_min = s.r.min();
        d.r_max = s.r.max();
        d.eta_min = s.r.size() >= 2 ? s.eta.min_offdiag() : 0.0;
        d.eta_max = s.eta.sup_norm();
        double mass = 0.0;
        for (std::size_t i = 0; i < model.mu.size(); ++i)
            mass += model.mu.weight(i) * s.r[i];
        d.mass = mass;
        traj.diagnostics.push_back(d);
    }
    return traj;
}

namespace {

/// Cost of the basic solution supported on the given cell set, or infinity
/// when the cells do not form a feasible spanning-tree basis. Flows are
/// recovered by peeling leaf nodes of the bipartite support graph.
double basis_cost(unsigned mask, std::size_t m, std::size_t n,
                  const AtomSet1D& a, const AtomSet1D& b) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> rem(m + n);
    for (std::size_t i = 0; i < m; ++i) rem[i] = a.weights[i];
    for (std::size_t j = 0; j < n; ++j) rem[m + j] = b.weights[j];

    std::vector<unsigned> incident(m + n, 0); // bitmask of incident cells
    std::vector<int> degree(m + n, 0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const unsigned bit = 1u << (i * n + j);
            if (mask & bit) {
                incident[i] |= bit;
                incident[m + j] |= bit;
                ++degree[i];
                ++degree[m + j];
            }
        }
    for (std::size_t v = 0; v < m + n; ++v)
        if (degree[v] == 0) return kInf; // disconnected node

    double cost = 0.0;
    unsigned remaining = mask;
    while (remaining) {
        // a leaf node forces the flow on its single incident edge
        std::size_t leaf = m + n;
        for (std::size_t v = 0; v < m + n; ++v)
            if (degree[v] == 1 && (incident[v] & remaining)) {
                leaf = v;
                break;
            }
        if (leaf == m + n) return kInf; // cycle: not a tree basis
        const unsigned bit = incident[leaf] & remaining;
        const unsigned cell = static_cast<unsigned>(std::countr_zero(bit));
        const std::size_t i = cell / n, j = cell % n;
        const double flow = rem[leaf];
        if (flow < -1e-12) return kInf; // infeasible basis
        const double d = a.positions[i] - b.positions[j];
        cost += std::max(flow, 0.0) * d * d;
        rem[i] -= i == leaf ? 0.0 : flow;
        rem[m + j] -= m + j == leaf ? 0.0 : flow;
        rem[leaf] = 0.0;
        remaining &= ~bit;
        incident[i] &= ~bit;
        incident[m + j] &= ~bit;
        --degree[i];
        --degree[m + j];
    }
    for (std::size_t v = 0; v < m + n; ++v)
        if (std::abs(rem[v]) > 1e-9) return kInf; // forest, not spanning
    return cost;
}

} // namespace

double bruteforce_w2(const AtomSet1D& a, const AtomSet1D& b) {
    const std::size_t m = a.size(), n = b.size();
    if (m > 4 || n > 4)
        throw size_error("bruteforce_w2: at most 4 atoms per side");
    // every vertex of the transportation polytope is supported on a spanning
    // tree with m + n - 1 cells; enumerate all of them
    const unsigned cells = static_cast<unsigned>(m * n);
    const int basis_size = static_cast<int>(m + n - 1);
    double best = std::numeric_limits<double>::infinity();
    for (unsigned mask = 0; mask < (1u << cells); ++mask) {
        if (std::popcount(mask) != basis_size) continue;
        best = std::min(best, basis_cost(mask, m, n, a, b));
    }
    return std::sqrt(best);
}

std::vector<double> bernoulli_closed_form(const BernoulliParams& p,
                                          const std::vector<double>& times) {
    if (!(p.a > 0.0) || !(p.b > 0.0) || p.y0 < 0.0)
        throw invalid_input(
            "bernoulli_closed_form: need a > 0, b > 0, y0 >= 0");
    std::vector<double> out(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double decay = std::exp(-p.a * times[k]);
        out[k] = p.y0 * p.a / (p.b * p.y0 + (p.a - p.b * p.y0) * decay);
    }
    return out;
}

ComparisonReport comparison_lemma_check(const std::vector<double>& times,
                                        const std::vector<double>& f_samples,
                                        const std::vector<double>& g_samples,
                                        int direction, double tol) {
    if (times.size() != f_samples.size() || times.size() != g_samples.size())
        throw invalid_input("comparison_lemma_check: sample size mismatch");
    if (direction != 1 && direction != -1)
        throw invalid_input("comparison_lemma_check: direction must be +-1");
    ComparisonReport rep;
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double scale =
            std::max({1.0, std::abs(f_samples[k]), std::abs(g_samples[k])});
        const double gap = direction == 1 ? f_samples[k] - g_samples[k]
                                          : g_samples[k] - f_samples[k];
        if (gap > tol * scale) {
            if (rep.ok) {
                rep.first_time = times[k];
                rep.first_index = k;
            }
            rep.ok = false;
            rep.max_violation = std::max(rep.max_violation, gap);
        }
    }
    return rep;
}

} // namespace concl::oracle
