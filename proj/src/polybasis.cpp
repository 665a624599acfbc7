#include "spectral/polybasis.hpp"

#include "spectral/error.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>

namespace spectral {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) {
        throw InputError(message);
    }
}

std::size_t expected_parameter_count(DistributionKind kind) {
    switch (kind) {
        case DistributionKind::normal: return 2;
        case DistributionKind::uniform: return 2;
        case DistributionKind::gamma: return 3;
        case DistributionKind::beta: return 4;
    }
    return 0;
}

} // namespace

std::string_view to_string(DistributionKind kind) {
    switch (kind) {
        case DistributionKind::normal: return "normal";
        case DistributionKind::uniform: return "uniform";
        case DistributionKind::gamma: return "gamma";
        case DistributionKind::beta: return "beta";
    }
    return "unknown";
}

DistributionKind parse_distribution_kind(std::string_view name) {
    if (name == "normal") return DistributionKind::normal;
    if (name == "uniform") return DistributionKind::uniform;
    if (name == "gamma") return DistributionKind::gamma;
    if (name == "beta") return DistributionKind::beta;
    throw InputError("unsupported distribution kind '" + std::string(name) +
                     "' (supported: normal, uniform, gamma, beta)");
}

Distribution::Distribution(DistributionKind kind, std::vector<double> params)
    : kind_(kind), params_(std::move(params)) {
    for (double p : params_) {
        require(std::isfinite(p), "distribution parameters must be finite");
    }
}

Distribution Distribution::normal(double mean, double stddev) {
    require(stddev > 0.0, "normal distribution needs a strictly positive standard deviation");
    return Distribution(DistributionKind::normal, {mean, stddev});
}

Distribution Distribution::uniform(double lower, double upper) {
    require(lower < upper, "uniform distribution needs lower < upper");
    return Distribution(DistributionKind::uniform, {lower, upper});
}

Distribution Distribution::gamma(double shape, double scale, double location) {
    require(shape > 0.0 && scale > 0.0, "gamma distribution needs positive shape and scale");
    return Distribution(DistributionKind::gamma, {shape, scale, location});
}

Distribution Distribution::beta(double a, double b, double lower, double upper) {
    require(a > 0.0 && b > 0.0, "beta distribution needs positive shape parameters");
    require(lower < upper, "beta distribution needs lower < upper");
    return Distribution(DistributionKind::beta, {a, b, lower, upper});
}

Distribution Distribution::from_parameters(std::string_view kind_name, std::span<const double> p) {
    const DistributionKind kind = parse_distribution_kind(kind_name);
    std::size_t n = expected_parameter_count(kind);
    // gamma location and beta bounds are optional
    const bool optional_tail = (kind == DistributionKind::gamma && p.size() == 2) ||
                               (kind == DistributionKind::beta && p.size() == 2);
    if (p.size() != n && !optional_tail) {
        throw InputError(std::string(kind_name) + " distribution expects " + std::to_string(n) +
                         " parameters, got " + std::to_string(p.size()));
    }
    switch (kind) {
        case DistributionKind::normal: return normal(p[0], p[1]);
        case DistributionKind::uniform: return uniform(p[0], p[1]);
        case DistributionKind::gamma: return gamma(p[0], p[1], p.size() > 2 ? p[2] : 0.0);
        case DistributionKind::beta:
            return p.size() > 2 ? beta(p[0], p[1], p[2], p[3]) : beta(p[0], p[1]);
    }
    throw InputError("unreachable distribution kind");
}

double Distribution::mean() const {
    const auto& p = params_;
    switch (kind_) {
        case DistributionKind::normal: return p[0];
        case DistributionKind::uniform: return 0.5 * (p[0] + p[1]);
        case DistributionKind::gamma: return p[2] + p[0] * p[1];
        case DistributionKind::beta: return p[2] + (p[3] - p[2]) * p[0] / (p[0] + p[1]);
    }
    return 0.0;
}

double Distribution::stddev() const {
    const auto& p = params_;
    switch (kind_) {
        case DistributionKind::normal: return p[1];
        case DistributionKind::uniform: return (p[1] - p[0]) / std::sqrt(12.0);
        case DistributionKind::gamma: return std::sqrt(p[0]) * p[1];
        case DistributionKind::beta: {
            const double s = p[0] + p[1];
            return (p[3] - p[2]) * std::sqrt(p[0] * p[1] / (s * s * (s + 1.0)));
        }
    }
    return 0.0;
}

double Distribution::cdf(double x) const {
    const auto& p = params_;
    switch (kind_) {
        case DistributionKind::normal:
            return boost::math::cdf(boost::math::normal_distribution<>(p[0], p[1]), x);
        case DistributionKind::uniform:
            return std::clamp((x - p[0]) / (p[1] - p[0]), 0.0, 1.0);
        case DistributionKind::gamma:
            if (x <= p[2]) return 0.0;
            return boost::math::cdf(boost::math::gamma_distribution<>(p[0], p[1]), x - p[2]);
        case DistributionKind::beta: {
            const double u = (x - p[2]) / (p[3] - p[2]);
            if (u <= 0.0) return 0.0;
            if (u >= 1.0) return 1.0;
            return boost::math::cdf(boost::math::beta_distribution<>(p[0], p[1]), u);
        }
    }
    return 0.0;
}

double Distribution::quantile(double prob) const {
    require(prob > 0.0 && prob < 1.0, "quantile probability must lie in (0, 1)");
    const auto& p = params_;
    switch (kind_) {
        case DistributionKind::normal:
            return boost::math::quantile(boost::math::normal_distribution<>(p[0], p[1]), prob);
        case DistributionKind::uniform:
            return p[0] + prob * (p[1] - p[0]);
        case DistributionKind::gamma:
            return p[2] + boost::math::quantile(boost::math::gamma_distribution<>(p[0], p[1]), prob);
        case DistributionKind::beta:
            return p[2] + (p[3] - p[2]) *
                              boost::math::quantile(boost::math::beta_distribution<>(p[0], p[1]), prob);
    }
    return 0.0;
}

bool Distribution::in_support(double x) const {
    const auto& p = params_;
    switch (kind_) {
        case DistributionKind::normal: return std::isfinite(x);
        case DistributionKind::uniform: return x >= p[0] && x <= p[1];
        case DistributionKind::gamma: return x >= p[2];
        case DistributionKind::beta: return x >= p[2] && x <= p[3];
    }
    return false;
}

std::string_view to_string(FamilyKind kind) {
    switch (kind) {
        case FamilyKind::hermite: return "hermite";
        case FamilyKind::legendre: return "legendre";
        case FamilyKind::laguerre: return "laguerre";
        case FamilyKind::jacobi: return "jacobi";
    }
    return "unknown";
}

struct PolynomialFamily::RuleCache {
    std::mutex mutex;
    std::map<int, std::unique_ptr<QuadratureRule>> rules;
};

PolynomialFamily::PolynomialFamily(FamilyKind kind, double alpha, double beta, int max_degree)
    : kind_(kind), alpha_(alpha), beta_(beta), max_degree_(max_degree),
      cache_(std::make_shared<RuleCache>()) {
    require(max_degree >= 0, "polynomial family needs a non-negative maximum degree");
    // Enough recurrence terms for triple products of degree-max_degree polynomials.
    const int terms = 2 * max_degree + 4;
    a_.resize(static_cast<std::size_t>(terms));
    b_.resize(static_cast<std::size_t>(terms));
    for (int n = 0; n < terms; ++n) {
        const double dn = n;
        double an = 0.0;
        double bn = 1.0;
        switch (kind) {
            case FamilyKind::hermite:
                an = 0.0;
                bn = n == 0 ? 1.0 : dn;
                break;
            case FamilyKind::legendre:
                an = 0.0;
                bn = n == 0 ? 1.0 : dn * dn / (4.0 * dn * dn - 1.0);
                break;
            case FamilyKind::laguerre:
                an = 2.0 * dn + alpha + 1.0;
                bn = n == 0 ? 1.0 : dn * (dn + alpha);
                break;
            case FamilyKind::jacobi: {
                const double ab = alpha + beta;
                if (n == 0) {
                    an = (beta - alpha) / (ab + 2.0);
                    bn = 1.0;
                } else {
                    const double s = 2.0 * dn + ab;
                    an = (beta * beta - alpha * alpha) / (s * (s + 2.0));
                    if (n == 1) {
                        bn = 4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
                    } else {
                        bn = 4.0 * dn * (dn + alpha) * (dn + beta) * (dn + ab) /
                             (s * s * (s + 1.0) * (s - 1.0));
                    }
                }
                break;
            }
        }
        a_[static_cast<std::size_t>(n)] = an;
        b_[static_cast<std::size_t>(n)] = bn;
    }
}

PolynomialFamily PolynomialFamily::hermite(int max_degree) {
    return PolynomialFamily(FamilyKind::hermite, 0.0, 0.0, max_degree);
}

PolynomialFamily PolynomialFamily::legendre(int max_degree) {
    return PolynomialFamily(FamilyKind::legendre, 0.0, 0.0, max_degree);
}

PolynomialFamily PolynomialFamily::laguerre(double alpha, int max_degree) {
    require(alpha > -1.0, "Laguerre parameter must exceed -1");
    return PolynomialFamily(FamilyKind::laguerre, alpha, 0.0, max_degree);
}

PolynomialFamily PolynomialFamily::jacobi(double alpha, double beta, int max_degree) {
    require(alpha > -1.0 && beta > -1.0, "Jacobi parameters must exceed -1");
    return PolynomialFamily(FamilyKind::jacobi, alpha, beta, max_degree);
}

double PolynomialFamily::recurrence_a(int n) const {
    return a_.at(static_cast<std::size_t>(n));
}

double PolynomialFamily::recurrence_b(int n) const {
    return b_.at(static_cast<std::size_t>(n));
}

double PolynomialFamily::germ_linear_coefficient() const {
    return std::sqrt(b_[1]);
}

void PolynomialFamily::check_degree(int degree) const {
    if (degree < 0 || degree > max_degree_) {
        throw InputError("polynomial degree " + std::to_string(degree) +
                         " outside constructed range [0, " + std::to_string(max_degree_) + "]");
    }
}

double PolynomialFamily::eval(int degree, double y) const {
    check_degree(degree);
    double prev = 0.0;
    double cur = 1.0;
    for (int n = 0; n < degree; ++n) {
        const auto k = static_cast<std::size_t>(n);
        const double next = ((y - a_[k]) * cur - (n == 0 ? 0.0 : std::sqrt(b_[k])) * prev) /
                            std::sqrt(b_[k + 1]);
        prev = cur;
        cur = next;
    }
    return cur;
}

void PolynomialFamily::eval_all(double y, std::span<double> out) const {
    if (out.empty()) return;
    check_degree(static_cast<int>(out.size()) - 1);
    out[0] = 1.0;
    if (out.size() == 1) return;
    out[1] = (y - a_[0]) / std::sqrt(b_[1]);
    for (std::size_t n = 1; n + 1 < out.size(); ++n) {
        out[n + 1] = ((y - a_[n]) * out[n] - std::sqrt(b_[n]) * out[n - 1]) / std::sqrt(b_[n + 1]);
    }
}

const QuadratureRule& PolynomialFamily::gauss_rule(int n) const {
    require(n >= 1, "Gauss rule needs at least one node");
    if (n > max_rule_size()) {
        throw InputError("Gauss rule with " + std::to_string(n) + " nodes exceeds the stored recurrence (" +
                         std::to_string(max_rule_size()) + ")");
    }
    std::lock_guard lock(cache_->mutex);
    auto& slot = cache_->rules[n];
    if (slot) return *slot;

    Eigen::VectorXd diag(n);
    Eigen::VectorXd sub(std::max(n - 1, 0));
    for (int i = 0; i < n; ++i) diag[i] = a_[static_cast<std::size_t>(i)];
    for (int i = 1; i < n; ++i) sub[i - 1] = std::sqrt(b_[static_cast<std::size_t>(i)]);

    QuadratureRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    if (n == 1) {
        rule.nodes[0] = diag[0];
        rule.weights[0] = 1.0;
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
        solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        if (solver.info() != Eigen::Success) {
            throw NumericalError("Golub-Welsch eigen-solve failed for " + std::string(to_string(kind_)) +
                                 " rule with " + std::to_string(n) + " nodes");
        }
        for (int i = 0; i < n; ++i) {
            rule.nodes[static_cast<std::size_t>(i)] = solver.eigenvalues()[i];
            const double v0 = solver.eigenvectors()(0, i);
            rule.weights[static_cast<std::size_t>(i)] = v0 * v0;
        }
        // renormalise the O(eps) drift so weights sum to one
        const double total = std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0);
        for (double& w : rule.weights) w /= total;
    }
    slot = std::make_unique<QuadratureRule>(std::move(rule));
    return *slot;
}

double PolynomialFamily::inner_product(int deg_a, int deg_b) const {
    return inner_product(deg_a, deg_b, gauss_rule(required_rule_size(deg_a + deg_b)));
}

double PolynomialFamily::inner_product(int deg_a, int deg_b, const QuadratureRule& rule) const {
    check_degree(deg_a);
    check_degree(deg_b);
    if (static_cast<int>(rule.size()) < required_rule_size(deg_a + deg_b)) {
        throw InputError("quadrature with " + std::to_string(rule.size()) +
                         " nodes cannot integrate degree " + std::to_string(deg_a + deg_b) + " exactly");
    }
    std::vector<double> psi(static_cast<std::size_t>(std::max(deg_a, deg_b) + 1));
    double sum = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
        eval_all(rule.nodes[q], psi);
        sum += rule.weights[q] * psi[static_cast<std::size_t>(deg_a)] * psi[static_cast<std::size_t>(deg_b)];
    }
    return sum;
}

double PolynomialFamily::triple_product(int deg_a, int deg_b, int deg_c, const QuadratureRule& rule) const {
    check_degree(deg_a);
    check_degree(deg_b);
    check_degree(deg_c);
    if (static_cast<int>(rule.size()) < required_rule_size(deg_a + deg_b + deg_c)) {
        throw InputError("quadrature with " + std::to_string(rule.size()) +
                         " nodes cannot integrate degree " + std::to_string(deg_a + deg_b + deg_c) +
                         " exactly");
    }
    std::vector<double> psi(static_cast<std::size_t>(std::max({deg_a, deg_b, deg_c}) + 1));
    double sum = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
        eval_all(rule.nodes[q], psi);
        sum += rule.weights[q] * psi[static_cast<std::size_t>(deg_a)] * psi[static_cast<std::size_t>(deg_b)] *
               psi[static_cast<std::size_t>(deg_c)];
    }
    return sum;
}

StandardizedGerm standardize(const Distribution& dist, int max_degree) {
    const auto& p = dist.parameters();
    switch (dist.kind()) {
        case DistributionKind::normal:
            return {PolynomialFamily::hermite(max_degree), AffineMap{p[0], p[1]}};
        case DistributionKind::uniform:
            return {PolynomialFamily::legendre(max_degree), AffineMap{0.5 * (p[0] + p[1]), 0.5 * (p[1] - p[0])}};
        case DistributionKind::gamma:
            return {PolynomialFamily::laguerre(p[0] - 1.0, max_degree), AffineMap{p[2], p[1]}};
        case DistributionKind::beta:
            return {PolynomialFamily::jacobi(p[1] - 1.0, p[0] - 1.0, max_degree),
                    AffineMap{0.5 * (p[2] + p[3]), 0.5 * (p[3] - p[2])}};
    }
    throw InputError("unsupported distribution kind");
}

Distribution standard_germ_distribution(const Distribution& dist) {
    const auto& p = dist.parameters();
    switch (dist.kind()) {
        case DistributionKind::normal: return Distribution::normal(0.0, 1.0);
        case DistributionKind::uniform: return Distribution::uniform(-1.0, 1.0);
        case DistributionKind::gamma: return Distribution::gamma(p[0], 1.0, 0.0);
        case DistributionKind::beta: return Distribution::beta(p[0], p[1], -1.0, 1.0);
    }
    throw InputError("unsupported distribution kind");
}

} // namespace spectral
