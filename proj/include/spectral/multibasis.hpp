#pragma once

#include "spectral/polybasis.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace spectral {

/// Per-germ polynomial degrees of one multivariate basis function.
using MultiIndex = std::vector<int>;

/// binom(n_germs + max_degree, max_degree), computed without overflow for the sizes used here.
std::size_t basis_cardinality(std::size_t n_germs, int max_degree);

/// All multi-indices of total degree <= max_degree in graded lexicographic
/// order: the all-zero index first, then by total degree, and inside one
/// degree with larger leading components first, e.g. for two germs and
/// degree two: (0,0) (1,0) (0,1) (2,0) (1,1) (0,2).
std::vector<MultiIndex> build_index_set(std::size_t n_germs, int max_degree);

/// One stored entry M(i, j, k) = <Psi_i Psi_j, Psi_k>.
struct TripleEntry {
    std::uint32_t i;
    std::uint32_t j;
    std::uint32_t k;
    double value;
};

/// Sparse, fully symmetric triple-product tensor. Entries are stored for every
/// permutation and grouped by the first index, so `slice(i)` lists all (j, k)
/// with a non-zero M(i, j, k) in lexicographic order.
class TripleTensor {
public:
    static constexpr double kDropTolerance = 1e-12;

    TripleTensor() = default;
    TripleTensor(std::size_t size, std::vector<TripleEntry> entries);

    std::size_t size() const { return size_; }
    std::size_t nonzeros() const { return entries_.size(); }
    std::span<const TripleEntry> entries() const { return entries_; }
    std::span<const TripleEntry> slice(std::size_t i) const;
    double operator()(std::size_t i, std::size_t j, std::size_t k) const;

private:
    std::size_t size_ = 0;
    std::vector<TripleEntry> entries_;
    std::vector<std::size_t> offsets_;
};

/**
 * Total-degree tensor-product basis over independent germs.
 *
 * The triple-product tensor is assembled from per-germ univariate triple
 * products (the multivariate basis is separable), each computed with a Gauss
 * rule of ceil((3 d + 1) / 2) nodes unless a larger rule is requested.
 */
class MultiIndexBasis {
public:
    MultiIndexBasis(std::vector<PolynomialFamily> families, int max_degree);
    MultiIndexBasis(std::vector<PolynomialFamily> families, int max_degree, int quadrature_nodes);

    std::size_t germ_count() const { return families_.size(); }
    int max_degree() const { return max_degree_; }
    std::size_t size() const { return indices_.size(); }
    const std::vector<MultiIndex>& indices() const { return indices_; }
    const MultiIndex& index(std::size_t k) const { return indices_[k]; }
    const std::vector<PolynomialFamily>& families() const { return families_; }

    std::optional<std::size_t> find(const MultiIndex& alpha) const;
    /// Position of the first-degree index of germ g, if it is retained.
    std::optional<std::size_t> linear_mode(std::size_t germ) const;

    /// Psi_alpha(y) for standardized y.
    double eval(const MultiIndex& alpha, std::span<const double> y) const;
    double eval(std::size_t k, std::span<const double> y) const { return eval(indices_[k], y); }
    /// All basis functions at y, ordered like `indices()`.
    void eval_all(std::span<const double> y, std::span<double> out) const;

    const TripleTensor& triple_tensor() const { return tensor_; }
    int quadrature_nodes() const { return quadrature_nodes_; }

private:
    void check_dimension(std::size_t n) const;

    std::vector<PolynomialFamily> families_;
    int max_degree_;
    int quadrature_nodes_;
    std::vector<MultiIndex> indices_;
    TripleTensor tensor_;
};

/// Minimum Gauss rule size for exact triple products at total degree d.
inline int triple_rule_size(int max_degree) { return required_rule_size(3 * max_degree); }

struct Moments {
    double mean;
    double variance;
};

/// Mean is the constant coefficient; variance is the sum of squares of the rest.
Moments moments(std::span<const double> coefficients);

} // namespace spectral
