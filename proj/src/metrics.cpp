#include "concl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace concl {

AtomSet1D::AtomSet1D(std::vector<double> pos, std::vector<double> w)
    : positions(std::move(pos)), weights(std::move(w)) {
    if (positions.size() != weights.size() || positions.empty())
        throw invalid_input("AtomSet1D: positions/weights mismatch");
    double sum = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        if (!(weights[k] > 0.0) || !std::isfinite(weights[k]))
            throw contract_violation("AtomSet1D: weights must be positive");
        if (!std::isfinite(positions[k]))
            throw invalid_input("AtomSet1D: non-finite position");
        sum += weights[k];
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw contract_violation("AtomSet1D: weights must sum to 1, got " +
                                 std::to_string(sum));
}

AtomicDisintegration::AtomicDisintegration(std::vector<AtomSet1D> atoms)
    : per_vertex(std::move(atoms)) {
    if (per_vertex.empty())
        throw invalid_input("AtomicDisintegration: no vertices");
}

AtomicDisintegration AtomicDisintegration::monokinetic(const VertexDensity& r) {
    std::vector<AtomSet1D> atoms;
    atoms.reserve(r.size());
    for (std::size_t i = 0; i < r.size(); ++i)
        atoms.push_back(AtomSet1D::dirac(r[i]));
    return AtomicDisintegration(std::move(atoms));
}

double AtomicDisintegration::first_moment(const BaseMeasure& mu) const {
    if (mu.size() != vertices())
        throw invalid_input("AtomicDisintegration: marginal mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < vertices(); ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < per_vertex[i].size(); ++k)
            s += per_vertex[i].weights[k] * per_vertex[i].positions[k];
        m += mu.weight(i) * s;
    }
    return m;
}

double AtomicDisintegration::second_moment(const BaseMeasure& mu) const {
    if (mu.size() != vertices())
        throw invalid_input("AtomicDisintegration: marginal mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < vertices(); ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < per_vertex[i].size(); ++k)
            s += per_vertex[i].weights[k] * per_vertex[i].positions[k] *
                 per_vertex[i].positions[k];
        m += mu.weight(i) * s;
    }
    return m;
}

double AtomicDisintegration::sup_position() const {
    double s = 0.0;
    for (const auto& v : per_vertex)
        for (double x : v.positions) s = std::max(s, std::abs(x));
    return s;
}

double wasserstein_1d(int p, const AtomSet1D& a, const AtomSet1D& b) {
    if (p != 1 && p != 2)
        throw invalid_input("wasserstein_1d: p must be 1 or 2");

    // order both sets by position (stable in the original index)
    auto order = [](const AtomSet1D& s) {
        std::vector<std::size_t> idx(s.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
            return s.positions[i] < s.positions[j];
        });
        return idx;
    };
    const auto ia = order(a);
    const auto ib = order(b);

    // walk the common quantile partition
    double cost = 0.0;
    std::size_t ka = 0, kb = 0;
    double wa = a.weights[ia[0]], wb = b.weights[ib[0]];
    while (ka < a.size() && kb < b.size()) {
        const double chunk = std::min(wa, wb);
        const double d = std::abs(a.positions[ia[ka]] - b.positions[ib[kb]]);
        cost += chunk * (p == 1 ? d : d * d);
        wa -= chunk;
        wb -= chunk;
        if (wa <= 0.0 && ++ka < a.size()) wa = a.weights[ia[ka]];
        if (wb <= 0.0 && ++kb < b.size()) wb = b.weights[ib[kb]];
    }
    return p == 1 ? cost : std::sqrt(cost);
}

double l2mu_d2(const AtomicDisintegration& s1, const AtomicDisintegration& s2,
               const BaseMeasure& mu) {
    if (s1.vertices() != mu.size() || s2.vertices() != mu.size())
        throw invalid_input("l2mu_d2: disintegrations do not share the marginal");
    double acc = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double d = wasserstein_1d(2, s1.per_vertex[i], s2.per_vertex[i]);
        acc += mu.weight(i) * d * d;
    }
    return std::sqrt(acc);
}

double dmu_sup(const SigmaTrajectory& a, const SigmaTrajectory& b,
               const BaseMeasure& mu) {
    if (a.size() != b.size())
        throw invalid_input("dmu_sup: trajectories have different lengths");
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (std::abs(a.times[k] - b.times[k]) > 1e-12)
            throw invalid_input("dmu_sup: time grids are not aligned");
        s = std::max(s, l2mu_d2(a.states[k], b.states[k], mu));
    }
    return s;
}

DissipationTerms contraction_dissipation(const VertexDensity& r1,
                                         const VertexDensity& r2,
                                         const EdgeField& v,
                                         const EdgeField& eta,
                                         const BaseMeasure& mu) {
    const std::size_t n = mu.size();
    if (r1.size() != n || r2.size() != n || v.size() != n || eta.size() != n)
        throw invalid_input("contraction_dissipation: size mismatch");
    v.require(Symmetry::Antisymmetric, "contraction_dissipation");
    eta.require(Symmetry::Symmetric, "contraction_dissipation");

    DissipationTerms out;
    double deriv = 0.0, bound = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double di = r1[i] - r2[i];
        double outflow = 0.0; // sum_j V+_ij eta_ij m_j
        double inflow = 0.0;  // sum_j D_j V-_ij eta_ij m_j
        double signed_flow = 0.0; // sum_j V_ij eta_ij m_j
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double vij = v(i, j);
            const double w = eta(i, j) * mu.weight(j);
            outflow += std::max(vij, 0.0) * w;
            inflow += (r1[j] - r2[j]) * std::max(-vij, 0.0) * w;
            signed_flow += vij * w;
        }
        deriv += mu.weight(i) * di * (di * outflow - inflow);
        bound += mu.weight(i) * di * di * signed_flow;
    }
    out.derivative_identity = -2.0 * deriv;
    out.lambda_bound_term = -bound;
    return out;
}

namespace {

void check_ledger_positive(const BoundsLedger& lg, const char* who) {
    if (!(lg.M > 0.0) || !(lg.eta_star > 0.0) || !(lg.alpha_prime_star > 0.0) ||
        !(lg.mu_K > 0.0) || !(lg.norm_r0_inf > 0.0))
        throw invalid_input(std::string(who) +
                            ": ledger entries M, eta_star, alpha_prime_star, "
                            "mu_K, ||r0||_inf must all be positive");
}

} // namespace

std::vector<double> sup_bound_curve(const BoundsLedger& ledger,
                                    const std::vector<double>& times) {
    check_ledger_positive(ledger, "sup_bound_curve");
    const double R = ledger.norm_r0_inf;
    const double a = ledger.alpha_prime_star * ledger.eta_star * ledger.M;
    std::vector<double> out(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double decay = std::exp(-a * times[k]);
        out[k] = R * ledger.M /
                 (R * ledger.mu_K + (ledger.M - R * ledger.mu_K) * decay);
    }
    return out;
}

std::vector<double> inf_bound_curve(const BoundsLedger& ledger, double r0_min,
                                    const std::vector<double>& times) {
    check_ledger_positive(ledger, "inf_bound_curve");
    if (r0_min < 0.0)
        throw invalid_input("inf_bound_curve: r0_min must be >= 0");
    if (r0_min == 0.0) return std::vector<double>(times.size(), 0.0);
    const double a = ledger.alpha_prime_star * ledger.eta_star * ledger.M;
    std::vector<double> out(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double decay = std::exp(-a * times[k]);
        out[k] = r0_min * ledger.M /
                 (r0_min * ledger.mu_K + (ledger.M - r0_min * ledger.mu_K) * decay);
    }
    return out;
}

double diameter(const VertexDensity& r) {
    if (r.size() == 0) throw invalid_input("diameter: empty density");
    return r.max() - r.min();
}

} // namespace concl
