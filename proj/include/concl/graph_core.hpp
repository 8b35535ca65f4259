#ifndef CONCL_GRAPH_CORE_HPP
#define CONCL_GRAPH_CORE_HPP

#include <cstddef>
#include <vector>

#include "concl/errors.hpp"

namespace concl {

/// Discrete base measure mu: a point cloud in R^d with positive probability
/// weights. The support is the vertex set of the graph; positions only feed
/// kernel evaluations, the dynamics never differentiates in x.
class BaseMeasure {
  public:
    /// points: n*dim coordinates, row-major. weights: n positive reals
    /// summing to 1 (tolerance 1e-12). Points must be pairwise distinct.
    BaseMeasure(std::vector<double> points, std::size_t dim,
                std::vector<double> weights);

    /// Uniform weights 1/n over the given point cloud.
    static BaseMeasure uniform(std::vector<double> points, std::size_t dim);

    std::size_t size() const { return weights_.size(); }
    std::size_t dim() const { return dim_; }

    double weight(std::size_t i) const { return weights_[i]; }
    const std::vector<double>& weights() const { return weights_; }

    /// Coordinate c of point i.
    double point(std::size_t i, std::size_t c) const {
        return points_[i * dim_ + c];
    }
    const std::vector<double>& points() const { return points_; }

    /// Total mass mu(K); 1 up to rounding by construction.
    double total() const;

    /// Squared Euclidean distance between vertices i and j.
    double dist2(std::size_t i, std::size_t j) const;

  private:
    std::vector<double> points_;
    std::size_t dim_;
    std::vector<double> weights_;
};

/// Density values r_i = d(rho)/d(mu) at each vertex.
struct VertexDensity {
    std::vector<double> values;

    VertexDensity() = default;
    explicit VertexDensity(std::vector<double> v);
    VertexDensity(std::initializer_list<double> v)
        : VertexDensity(std::vector<double>(v)) {}
    VertexDensity(std::size_t n, double fill) : values(n, fill) {}

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }

    double min() const;
    double max() const;
    double sup_norm() const;
};

enum class Symmetry { None, Symmetric, Antisymmetric };

/// Dense n x n field on the edge set: eta, velocities, fluxes. The diagonal
/// is identically zero (no self-loops). The symmetry tag is validated against
/// the data at construction and preserved by the named constructors.
class EdgeField {
  public:
    EdgeField() = default;

    /// Zero field of the given size and declared symmetry.
    EdgeField(std::size_t n, Symmetry sym);

    /// Takes ownership of row-major values; validates the diagonal and the
    /// declared symmetry exactly.
    EdgeField(std::size_t n, std::vector<double> values, Symmetry sym);

    std::size_t size() const { return n_; }
    Symmetry symmetry() const { return sym_; }

    double operator()(std::size_t i, std::size_t j) const {
        return values_[i * n_ + j];
    }
    /// Mutation keeps the diagonal zero; the caller is responsible for
    /// maintaining the declared symmetry (see symmetrize()).
    void set(std::size_t i, std::size_t j, double v);

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& mutable_values() { return values_; }

    /// Largest |value| over off-diagonal entries.
    double sup_norm() const;
    /// Smallest off-diagonal value (n >= 2).
    double min_offdiag() const;

    /// Replace with (A + A^T)/2 and tag Symmetric. Used by the integrator to
    /// kill rounding drift.
    void symmetrize();

    void require(Symmetry sym, const char* who) const;

    bool all_finite() const;

  private:
    std::size_t n_ = 0;
    std::vector<double> values_;
    Symmetry sym_ = Symmetry::None;
};

// --- nonlocal calculus -----------------------------------------------------

/// Gradient on edges: result(i,j) = phi_j - phi_i. Exactly antisymmetric.
EdgeField nonlocal_gradient(const VertexDensity& phi, std::size_t n);

/// Divergence of an antisymmetric edge density j with dj = j d(mu x mu):
/// result_i = sum_j j(i,j) m_j.
VertexDensity nonlocal_divergence(const EdgeField& j, const BaseMeasure& mu);

/// Integration-by-parts residual
///   | sum_i phi_i (div j)_i m_i + 1/2 sum_{ij} (grad phi)(i,j) j(i,j) m_i m_j |.
/// Zero up to rounding for every antisymmetric j.
double adjointness_defect(const VertexDensity& phi, const EdgeField& j,
                          const BaseMeasure& mu);

} // namespace concl

#endif
