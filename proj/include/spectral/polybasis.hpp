#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spectral {

enum class DistributionKind { normal, uniform, gamma, beta };

std::string_view to_string(DistributionKind kind);

/// Parses "normal", "uniform", "gamma" or "beta"; anything else is rejected
/// with an InputError naming the kind.
DistributionKind parse_distribution_kind(std::string_view name);

/**
 * Marginal law of one independent uncertain input, in natural units.
 *
 *  - normal:  mean, standard deviation
 *  - uniform: lower bound, upper bound
 *  - gamma:   shape k, scale theta, location shift (support [loc, inf))
 *  - beta:    shape a, shape b, lower bound, upper bound
 *
 * The Laguerre and Jacobi parameters of the matched polynomial family are
 * taken directly from the gamma/beta shapes: Laguerre alpha = k - 1 and
 * Jacobi (alpha, beta) = (b - 1, a - 1) on [-1, 1].
 */
class Distribution {
public:
    static Distribution normal(double mean, double stddev);
    static Distribution uniform(double lower, double upper);
    static Distribution gamma(double shape, double scale, double location = 0.0);
    static Distribution beta(double a, double b, double lower = 0.0, double upper = 1.0);

    /// Builds from a kind name and its parameter list (file/CLI entry point).
    static Distribution from_parameters(std::string_view kind, std::span<const double> params);

    DistributionKind kind() const { return kind_; }
    const std::vector<double>& parameters() const { return params_; }

    double mean() const;
    double stddev() const;
    double cdf(double x) const;
    double quantile(double p) const;
    bool in_support(double x) const;

    friend bool operator==(const Distribution&, const Distribution&) = default;

private:
    Distribution(DistributionKind kind, std::vector<double> params);

    DistributionKind kind_;
    std::vector<double> params_;
};

enum class FamilyKind { hermite, legendre, laguerre, jacobi };

std::string_view to_string(FamilyKind kind);

/// Abscissae and probability weights of a Gauss rule. Weights sum to one.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
    /// Highest polynomial degree integrated exactly (2n - 1).
    int exactness() const { return 2 * static_cast<int>(nodes.size()) - 1; }
};

/**
 * Orthonormal polynomials for a probability weight, defined by the monic
 * three-term recurrence
 *
 *     p_{n+1}(y) = (y - a_n) p_n(y) - b_n p_{n-1}(y),   b_0 = 1,
 *
 * and normalised so that E[psi_n psi_m] = delta_nm. Families are immutable;
 * the Gauss rules built on demand are cached behind a mutex and shared
 * between copies.
 */
class PolynomialFamily {
public:
    static constexpr int kDefaultMaxDegree = 16;

    static PolynomialFamily hermite(int max_degree = kDefaultMaxDegree);
    static PolynomialFamily legendre(int max_degree = kDefaultMaxDegree);
    static PolynomialFamily laguerre(double alpha, int max_degree = kDefaultMaxDegree);
    static PolynomialFamily jacobi(double alpha, double beta, int max_degree = kDefaultMaxDegree);

    FamilyKind kind() const { return kind_; }
    int max_degree() const { return max_degree_; }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }

    /// Monic recurrence coefficients.
    double recurrence_a(int n) const;
    double recurrence_b(int n) const;

    /// psi_degree(y) by the orthonormal recurrence.
    double eval(int degree, double y) const;
    /// psi_0(y) ... psi_{out.size()-1}(y).
    void eval_all(double y, std::span<double> out) const;

    /// Expansion of the germ itself: y = a_0 psi_0 + sqrt(b_1) psi_1.
    double germ_mean_coefficient() const { return recurrence_a(0); }
    double germ_linear_coefficient() const;

    /// n-point Gauss rule (Golub-Welsch). Cached.
    const QuadratureRule& gauss_rule(int n) const;

    /// <psi_a, psi_b> with the smallest exact rule.
    double inner_product(int deg_a, int deg_b) const;
    /// <psi_a, psi_b> with the given rule; rejects rules that are not exact.
    double inner_product(int deg_a, int deg_b, const QuadratureRule& rule) const;

    /// E[psi_a psi_b psi_c] with the given rule; rejects rules that are not exact.
    double triple_product(int deg_a, int deg_b, int deg_c, const QuadratureRule& rule) const;

    /// Largest rule size supported by the stored recurrence.
    int max_rule_size() const { return static_cast<int>(a_.size()); }

private:
    struct RuleCache;

    PolynomialFamily(FamilyKind kind, double alpha, double beta, int max_degree);
    void check_degree(int degree) const;

    FamilyKind kind_;
    double alpha_ = 0.0;
    double beta_ = 0.0;
    int max_degree_;
    std::vector<double> a_;
    std::vector<double> b_;
    std::shared_ptr<RuleCache> cache_;
};

/// Affine map from the standardized germ to natural units: x = offset + scale * y.
struct AffineMap {
    double offset = 0.0;
    double scale = 1.0;

    double apply(double y) const { return offset + scale * y; }
    double invert(double x) const { return (x - offset) / scale; }
};

struct StandardizedGerm {
    PolynomialFamily family;
    AffineMap transform;
};

/// Askey-matched family plus the map from the standardized germ to natural units.
StandardizedGerm standardize(const Distribution& dist,
                             int max_degree = PolynomialFamily::kDefaultMaxDegree);

/// Distribution of the standardized germ (e.g. N(0,1), U[-1,1]).
Distribution standard_germ_distribution(const Distribution& dist);

/// Number of Gauss nodes needed for an integrand of total degree `degree`.
inline int required_rule_size(int degree) { return (degree + 2) / 2; }

} // namespace spectral
