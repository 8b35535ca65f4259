#include "concl/graph_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace concl {

namespace {

void check_finite(const std::vector<double>& v, const char* who) {
    for (double x : v)
        if (!std::isfinite(x))
            throw invalid_input(std::string(who) + ": non-finite entry");
}

} // namespace

BaseMeasure::BaseMeasure(std::vector<double> points, std::size_t dim,
                         std::vector<double> weights)
    : points_(std::move(points)), dim_(dim), weights_(std::move(weights)) {
    const std::size_t n = weights_.size();
    if (n == 0) throw invalid_input("BaseMeasure: empty vertex set");
    if (dim_ == 0) throw invalid_input("BaseMeasure: dimension must be >= 1");
    if (points_.size() != n * dim_)
        throw invalid_input("BaseMeasure: points/weights size mismatch");
    check_finite(points_, "BaseMeasure points");
    double sum = 0.0;
    for (double m : weights_) {
        if (!(m > 0.0) || !std::isfinite(m))
            throw invalid_input("BaseMeasure: weights must be positive");
        sum += m;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw invalid_input("BaseMeasure: weights must sum to 1, got " +
                            std::to_string(sum));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (dist2(i, j) == 0.0)
                throw invalid_input("BaseMeasure: points " + std::to_string(i) +
                                    " and " + std::to_string(j) + " coincide");
}

BaseMeasure BaseMeasure::uniform(std::vector<double> points, std::size_t dim) {
    const std::size_t n = dim == 0 ? 0 : points.size() / dim;
    return BaseMeasure(std::move(points), dim,
                       std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

double BaseMeasure::total() const {
    double s = 0.0;
    for (double m : weights_) s += m;
    return s;
}

double BaseMeasure::dist2(std::size_t i, std::size_t j) const {
    double s = 0.0;
    for (std::size_t c = 0; c < dim_; ++c) {
        const double d = point(i, c) - point(j, c);
        s += d * d;
    }
    return s;
}

VertexDensity::VertexDensity(std::vector<double> v) : values(std::move(v)) {
    check_finite(values, "VertexDensity");
}

double VertexDensity::min() const {
    return *std::min_element(values.begin(), values.end());
}

double VertexDensity::max() const {
    return *std::max_element(values.begin(), values.end());
}

double VertexDensity::sup_norm() const {
    double s = 0.0;
    for (double x : values) s = std::max(s, std::abs(x));
    return s;
}

EdgeField::EdgeField(std::size_t n, Symmetry sym)
    : n_(n), values_(n * n, 0.0), sym_(sym) {}

EdgeField::EdgeField(std::size_t n, std::vector<double> values, Symmetry sym)
    : n_(n), values_(std::move(values)), sym_(sym) {
    if (values_.size() != n_ * n_)
        throw invalid_input("EdgeField: values size mismatch");
    for (std::size_t i = 0; i < n_; ++i)
        if (values_[i * n_ + i] != 0.0)
            throw invalid_input("EdgeField: diagonal must be exactly zero");
    if (sym_ == Symmetry::Symmetric) {
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = i + 1; j < n_; ++j)
                if (values_[i * n_ + j] != values_[j * n_ + i])
                    throw invalid_input("EdgeField: not symmetric at (" +
                                        std::to_string(i) + "," +
                                        std::to_string(j) + ")");
    } else if (sym_ == Symmetry::Antisymmetric) {
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = i + 1; j < n_; ++j)
                if (values_[i * n_ + j] != -values_[j * n_ + i])
                    throw invalid_input("EdgeField: not antisymmetric at (" +
                                        std::to_string(i) + "," +
                                        std::to_string(j) + ")");
    }
}

void EdgeField::set(std::size_t i, std::size_t j, double v) {
    if (i == j) {
        if (v != 0.0)
            throw invalid_input("EdgeField: cannot set diagonal entry");
        return;
    }
    values_[i * n_ + j] = v;
}

double EdgeField::sup_norm() const {
    double s = 0.0;
    for (double x : values_) s = std::max(s, std::abs(x));
    return s;
}

double EdgeField::min_offdiag() const {
    double s = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j)
            if (i != j) s = std::min(s, values_[i * n_ + j]);
    return s;
}

void EdgeField::symmetrize() {
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = i + 1; j < n_; ++j) {
            const double v = 0.5 * (values_[i * n_ + j] + values_[j * n_ + i]);
            values_[i * n_ + j] = v;
            values_[j * n_ + i] = v;
        }
    sym_ = Symmetry::Symmetric;
}

void EdgeField::require(Symmetry sym, const char* who) const {
    if (sym_ != sym)
        throw contract_violation(std::string(who) +
                                 ": edge field has the wrong symmetry tag");
}

bool EdgeField::all_finite() const {
    for (double x : values_)
        if (!std::isfinite(x)) return false;
    return true;
}

EdgeField nonlocal_gradient(const VertexDensity& phi, std::size_t n) {
    if (phi.size() != n)
        throw invalid_input("nonlocal_gradient: density size mismatch");
    EdgeField g(n, Symmetry::Antisymmetric);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) g.set(i, j, phi[j] - phi[i]);
    return g;
}

VertexDensity nonlocal_divergence(const EdgeField& j, const BaseMeasure& mu) {
    if (j.size() != mu.size())
        throw invalid_input("nonlocal_divergence: size mismatch");
    j.require(Symmetry::Antisymmetric, "nonlocal_divergence");
    const std::size_t n = mu.size();
    VertexDensity out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += j(i, k) * mu.weight(k);
        out[i] = s;
    }
    return out;
}

double adjointness_defect(const VertexDensity& phi, const EdgeField& j,
                          const BaseMeasure& mu) {
    if (phi.size() != mu.size() || j.size() != mu.size())
        throw invalid_input("adjointness_defect: size mismatch");
    const std::size_t n = mu.size();
    const VertexDensity div = nonlocal_divergence(j, mu);
    double lhs = 0.0;
    for (std::size_t i = 0; i < n; ++i) lhs += phi[i] * div[i] * mu.weight(i);
    const EdgeField grad = nonlocal_gradient(phi, n);
    double rhs = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k)
            rhs += grad(i, k) * j(i, k) * mu.weight(i) * mu.weight(k);
    return std::abs(lhs + 0.5 * rhs);
}

} // namespace concl
