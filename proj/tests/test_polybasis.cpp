#include "spectral/error.hpp"
#include "spectral/polybasis.hpp"

#include <gtest/gtest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

using namespace spectral;

namespace {

// Probability densities of the standardized germs, written out independently.
double normal_pdf(double y) { return std::exp(-0.5 * y * y) / std::sqrt(2.0 * std::numbers::pi); }
double gamma_pdf(double y, double alpha) { return std::pow(y, alpha) * std::exp(-y) / std::tgamma(alpha + 1.0); }
double jacobi_pdf(double y, double a, double b) {
    const double norm = std::pow(2.0, a + b + 1.0) * std::tgamma(a + 1.0) * std::tgamma(b + 1.0) /
                        std::tgamma(a + b + 2.0);
    return std::pow(1.0 - y, a) * std::pow(1.0 + y, b) / norm;
}

double integrate(const PolynomialFamily& f, const std::function<double(double)>& g) {
    switch (f.kind()) {
    case FamilyKind::hermite: {
        boost::math::quadrature::sinh_sinh<double> q;
        // far tails: the density underflows before the polynomial overflows
        return q.integrate([&](double y) {
            const double w = normal_pdf(y);
            return w == 0.0 ? 0.0 : g(y) * w;
        });
    }
    case FamilyKind::legendre: {
        boost::math::quadrature::tanh_sinh<double> q;
        return q.integrate([&](double y) { return 0.5 * g(y); }, -1.0, 1.0);
    }
    case FamilyKind::laguerre: {
        boost::math::quadrature::exp_sinh<double> q;
        return q.integrate([&](double y) {
            const double w = gamma_pdf(y, f.alpha());
            return w == 0.0 ? 0.0 : g(y) * w;
        }, 0.0,
                           std::numeric_limits<double>::infinity());
    }
    case FamilyKind::jacobi: {
        boost::math::quadrature::tanh_sinh<double> q;
        return q.integrate([&](double y) { return g(y) * jacobi_pdf(y, f.alpha(), f.beta()); }, -1.0, 1.0);
    }
    }
    return 0.0;
}

std::vector<PolynomialFamily> families() {
    return {PolynomialFamily::hermite(), PolynomialFamily::legendre(), PolynomialFamily::laguerre(0.0),
            PolynomialFamily::laguerre(1.5), PolynomialFamily::jacobi(0.0, 0.0), PolynomialFamily::jacobi(1.0, 2.0),
            PolynomialFamily::jacobi(2.5, 0.5)};
}

// E[y^k] under the standardized weight, from closed forms.
double raw_moment(const PolynomialFamily& f, int k) {
    switch (f.kind()) {
    case FamilyKind::hermite: {
        if (k % 2) return 0.0;
        double m = 1.0;
        for (int i = k - 1; i > 0; i -= 2) m *= i;
        return m;
    }
    case FamilyKind::legendre:
        return k % 2 ? 0.0 : 1.0 / (k + 1.0);
    case FamilyKind::laguerre:
        return std::tgamma(f.alpha() + 1.0 + k) / std::tgamma(f.alpha() + 1.0);
    case FamilyKind::jacobi: {
        // y = 2u - 1 with u ~ Beta(b + 1, a + 1)
        const double p = f.beta() + 1.0;
        const double q = f.alpha() + 1.0;
        double total = 0.0;
        for (int j = 0; j <= k; ++j) {
            double uj = 1.0;
            for (int i = 0; i < j; ++i) uj *= (p + i) / (p + q + i);
            total += std::tgamma(k + 1.0) / (std::tgamma(j + 1.0) * std::tgamma(k - j + 1.0)) * std::pow(2.0, j) *
                     std::pow(-1.0, k - j) * uj;
        }
        return total;
    }
    }
    return 0.0;
}

} // namespace

TEST(PolynomialFamily, OrthonormalAgainstIndependentQuadrature) {
    for (const auto& f : families()) {
        for (int n = 0; n <= 8; ++n) {
            for (int m = 0; m <= n; ++m) {
                const double v = integrate(f, [&](double y) { return f.eval(n, y) * f.eval(m, y); });
                EXPECT_NEAR(v, n == m ? 1.0 : 0.0, 1e-10) << to_string(f.kind()) << " " << n << "," << m;
            }
        }
    }
}

TEST(PolynomialFamily, GaussRulesIntegrateMomentsExactly) {
    for (const auto& f : families()) {
        for (int n = 1; n <= 8; ++n) {
            const auto& rule = f.gauss_rule(n);
            ASSERT_EQ(rule.size(), static_cast<std::size_t>(n));
            double wsum = 0.0;
            for (double w : rule.weights) {
                EXPECT_GT(w, 0.0);
                wsum += w;
            }
            EXPECT_NEAR(wsum, 1.0, 1e-13);
            for (int k = 0; k <= rule.exactness(); ++k) {
                double q = 0.0;
                double magnitude = 0.0;  // size of the terms being summed, sets the rounding floor
                for (std::size_t i = 0; i < rule.size(); ++i) {
                    q += rule.weights[i] * std::pow(rule.nodes[i], k);
                    magnitude += rule.weights[i] * std::abs(std::pow(rule.nodes[i], k));
                }
                const double exact = raw_moment(f, k);
                EXPECT_LE(std::abs(q - exact), 1e-9 * std::max(1.0, magnitude))
                    << to_string(f.kind()) << " n=" << n << " k=" << k;
            }
        }
    }
}

TEST(PolynomialFamily, HermiteRecurrenceMatchesClosedForm) {
    const auto h = PolynomialFamily::hermite();
    for (double y : {-2.0, -0.3, 0.0, 1.7}) {
        EXPECT_NEAR(h.eval(0, y), 1.0, 1e-15);
        EXPECT_NEAR(h.eval(1, y), y, 1e-15);
        EXPECT_NEAR(h.eval(2, y), (y * y - 1.0) / std::sqrt(2.0), 1e-14);
        EXPECT_NEAR(h.eval(3, y), (y * y * y - 3.0 * y) / std::sqrt(6.0), 1e-13);
    }
}

TEST(PolynomialFamily, EvalAllMatchesEval) {
    for (const auto& f : families()) {
        std::vector<double> out(7);
        f.eval_all(0.37, out);
        for (int n = 0; n < 7; ++n) EXPECT_NEAR(out[static_cast<std::size_t>(n)], f.eval(n, 0.37), 1e-14);
    }
}

TEST(PolynomialFamily, HermiteTripleProduct) {
    const auto h = PolynomialFamily::hermite();
    const auto& rule = h.gauss_rule(3);
    EXPECT_NEAR(h.triple_product(1, 1, 2, rule), std::sqrt(2.0), 1e-13);
    EXPECT_NEAR(h.triple_product(1, 1, 0, rule), 1.0, 1e-13);
    EXPECT_NEAR(h.triple_product(1, 1, 1, rule), 0.0, 1e-13);
}

TEST(PolynomialFamily, RejectsInexactRules) {
    const auto h = PolynomialFamily::hermite();
    EXPECT_THROW(h.inner_product(3, 3, h.gauss_rule(2)), InputError);
    EXPECT_THROW(h.triple_product(2, 2, 2, h.gauss_rule(3)), InputError);
}

TEST(PolynomialFamily, RejectsDegreesBeyondTheRecurrence) {
    const auto h = PolynomialFamily::hermite(4);
    EXPECT_THROW(h.eval(5, 0.0), InputError);
}

TEST(Distribution, MomentsAndQuantiles) {
    const auto n = Distribution::normal(2.0, 0.5);
    EXPECT_DOUBLE_EQ(n.mean(), 2.0);
    EXPECT_DOUBLE_EQ(n.stddev(), 0.5);
    EXPECT_NEAR(n.cdf(n.quantile(0.95)), 0.95, 1e-12);
    const auto u = Distribution::uniform(-1.0, 3.0);
    EXPECT_DOUBLE_EQ(u.mean(), 1.0);
    EXPECT_NEAR(u.stddev(), 4.0 / std::sqrt(12.0), 1e-14);
    EXPECT_TRUE(u.in_support(2.9));
    EXPECT_FALSE(u.in_support(3.1));
    const auto g = Distribution::gamma(2.0, 3.0, 1.0);
    EXPECT_NEAR(g.mean(), 7.0, 1e-14);
    EXPECT_NEAR(g.stddev(), std::sqrt(18.0), 1e-12);
    const auto b = Distribution::beta(2.0, 3.0, 0.0, 10.0);
    EXPECT_NEAR(b.mean(), 4.0, 1e-14);
}

TEST(Distribution, RejectsInvalidParameters) {
    EXPECT_THROW(Distribution::normal(0.0, 0.0), InputError);
    EXPECT_THROW(Distribution::normal(0.0, -1.0), InputError);
    EXPECT_THROW(Distribution::uniform(1.0, 1.0), InputError);
    EXPECT_THROW(Distribution::gamma(0.0, 1.0), InputError);
    EXPECT_THROW(Distribution::beta(1.0, 0.0), InputError);
    EXPECT_THROW(parse_distribution_kind("cauchy"), InputError);
    const std::vector<double> one{1.0};
    EXPECT_THROW(Distribution::from_parameters("normal", one), InputError);
}

TEST(Standardize, AskeyPairingAndAffineMap) {
    const auto sn = standardize(Distribution::normal(5.0, 2.0));
    EXPECT_EQ(sn.family.kind(), FamilyKind::hermite);
    EXPECT_DOUBLE_EQ(sn.transform.apply(1.0), 7.0);
    const auto su = standardize(Distribution::uniform(0.0, 4.0));
    EXPECT_EQ(su.family.kind(), FamilyKind::legendre);
    EXPECT_DOUBLE_EQ(su.transform.apply(-1.0), 0.0);
    EXPECT_DOUBLE_EQ(su.transform.apply(1.0), 4.0);
    const auto sg = standardize(Distribution::gamma(3.0, 2.0));
    EXPECT_EQ(sg.family.kind(), FamilyKind::laguerre);
    EXPECT_DOUBLE_EQ(sg.family.alpha(), 2.0);
    const auto sb = standardize(Distribution::beta(2.0, 4.0));
    EXPECT_EQ(sb.family.kind(), FamilyKind::jacobi);
    EXPECT_DOUBLE_EQ(sb.family.alpha(), 3.0);
    EXPECT_DOUBLE_EQ(sb.family.beta(), 1.0);
}

TEST(Standardize, GermExpansionReproducesTheInput) {
    // x = offset + scale * (a0 + sqrt(b1) psi_1): mean and standard deviation must match
    for (const auto& d : {Distribution::normal(1.0, 3.0), Distribution::uniform(-2.0, 6.0),
                          Distribution::gamma(2.5, 1.5, 0.5), Distribution::beta(2.0, 5.0, 1.0, 3.0)}) {
        const auto s = standardize(d);
        const double mean = s.transform.apply(s.family.germ_mean_coefficient());
        const double sd = std::abs(s.transform.scale) * s.family.germ_linear_coefficient();
        EXPECT_NEAR(mean, d.mean(), 1e-12) << to_string(d.kind());
        EXPECT_NEAR(sd, d.stddev(), 1e-12) << to_string(d.kind());
    }
}
