#include "spectral/error.hpp"
#include "spectral/multibasis.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>
#include <vector>

using namespace spectral;

namespace {

// Brute-force enumeration of {alpha in N^n : |alpha| <= d}.
std::set<MultiIndex> enumerate(std::size_t n, int d) {
    std::set<MultiIndex> out;
    MultiIndex a(n, 0);
    std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int left) {
        if (pos == n) {
            out.insert(a);
            return;
        }
        for (int k = 0; k <= left; ++k) {
            a[pos] = k;
            rec(pos + 1, left - k);
        }
        a[pos] = 0;
    };
    rec(0, d);
    return out;
}

double binom(std::size_t n, std::size_t k) {
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

} // namespace

TEST(IndexSet, MatchesEnumeration) {
    for (std::size_t n = 1; n <= 6; ++n) {
        for (int d = 0; d <= 4; ++d) {
            const auto set = build_index_set(n, d);
            const auto ref = enumerate(n, d);
            ASSERT_EQ(set.size(), ref.size());
            EXPECT_EQ(std::set<MultiIndex>(set.begin(), set.end()), ref);
            EXPECT_EQ(basis_cardinality(n, d), static_cast<std::size_t>(binom(n + static_cast<std::size_t>(d),
                                                                                static_cast<std::size_t>(d))));
        }
    }
}

TEST(IndexSet, EightGermsDegreeOneHasNineTerms) {
    EXPECT_EQ(build_index_set(8, 1).size(), 9u);
    EXPECT_EQ(basis_cardinality(8, 1), 9u);
}

TEST(IndexSet, GradedLexicographicOrder) {
    const auto set = build_index_set(2, 2);
    const std::vector<MultiIndex> expected{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
    EXPECT_EQ(set, expected);
    for (std::size_t k = 1; k < set.size(); ++k) {
        const int a = std::accumulate(set[k - 1].begin(), set[k - 1].end(), 0);
        const int b = std::accumulate(set[k].begin(), set[k].end(), 0);
        EXPECT_LE(a, b);
    }
}

TEST(IndexSet, ZeroGermsAndZeroDegree) {
    EXPECT_EQ(build_index_set(0, 3).size(), 1u);
    EXPECT_EQ(build_index_set(5, 0).size(), 1u);
}

TEST(MultiIndexBasis, FindAndLinearModes) {
    MultiIndexBasis b({PolynomialFamily::hermite(), PolynomialFamily::legendre(), PolynomialFamily::hermite()}, 2);
    EXPECT_EQ(b.size(), 10u);
    EXPECT_EQ(b.find({0, 0, 0}), 0u);
    for (std::size_t g = 0; g < 3; ++g) {
        const auto k = b.linear_mode(g);
        ASSERT_TRUE(k.has_value());
        MultiIndex e(3, 0);
        e[g] = 1;
        EXPECT_EQ(b.index(*k), e);
    }
    EXPECT_FALSE(b.find({3, 0, 0}).has_value());
}

TEST(MultiIndexBasis, EvalIsProductOfUnivariates) {
    const auto h = PolynomialFamily::hermite();
    const auto l = PolynomialFamily::legendre();
    MultiIndexBasis b({h, l}, 3);
    const std::vector<double> y{0.4, -0.7};
    std::vector<double> all(b.size());
    b.eval_all(y, all);
    for (std::size_t k = 0; k < b.size(); ++k) {
        const auto& a = b.index(k);
        EXPECT_NEAR(all[k], h.eval(a[0], y[0]) * l.eval(a[1], y[1]), 1e-14);
        EXPECT_NEAR(b.eval(k, y), all[k], 1e-14);
    }
}

TEST(TripleTensor, MatchesFullGridQuadrature) {
    const std::vector<std::vector<PolynomialFamily>> pairs{
        {PolynomialFamily::hermite(), PolynomialFamily::hermite()},
        {PolynomialFamily::hermite(), PolynomialFamily::legendre()},
        {PolynomialFamily::laguerre(0.5), PolynomialFamily::jacobi(1.0, 0.5)},
    };
    for (const auto& fams : pairs) {
        for (int d = 1; d <= 2; ++d) {
            MultiIndexBasis b(fams, d);
            const auto& r0 = fams[0].gauss_rule(8);
            const auto& r1 = fams[1].gauss_rule(8);
            std::vector<double> psi(b.size());
            std::vector<double> full(b.size() * b.size() * b.size(), 0.0);
            for (std::size_t p = 0; p < r0.size(); ++p) {
                for (std::size_t q = 0; q < r1.size(); ++q) {
                    const std::vector<double> y{r0.nodes[p], r1.nodes[q]};
                    b.eval_all(y, psi);
                    const double w = r0.weights[p] * r1.weights[q];
                    for (std::size_t i = 0; i < b.size(); ++i)
                        for (std::size_t j = 0; j < b.size(); ++j)
                            for (std::size_t k = 0; k < b.size(); ++k)
                                full[(i * b.size() + j) * b.size() + k] += w * psi[i] * psi[j] * psi[k];
                }
            }
            const auto& t = b.triple_tensor();
            for (std::size_t i = 0; i < b.size(); ++i)
                for (std::size_t j = 0; j < b.size(); ++j)
                    for (std::size_t k = 0; k < b.size(); ++k)
                        EXPECT_NEAR(t(i, j, k), full[(i * b.size() + j) * b.size() + k], 1e-9);
        }
    }
}

TEST(TripleTensor, PermutationSymmetryIsExact) {
    MultiIndexBasis b({PolynomialFamily::hermite(), PolynomialFamily::legendre(), PolynomialFamily::laguerre(1.0)}, 3);
    const auto& t = b.triple_tensor();
    for (const auto& e : t.entries()) {
        EXPECT_EQ(t(e.i, e.j, e.k), e.value);
        EXPECT_EQ(t(e.j, e.i, e.k), e.value);
        EXPECT_EQ(t(e.k, e.j, e.i), e.value);
        EXPECT_EQ(t(e.i, e.k, e.j), e.value);
        EXPECT_EQ(t(e.j, e.k, e.i), e.value);
        EXPECT_EQ(t(e.k, e.i, e.j), e.value);
    }
}

TEST(TripleTensor, OrthonormalityEntriesAndHermiteValue) {
    MultiIndexBasis b({PolynomialFamily::hermite()}, 2);
    const auto& t = b.triple_tensor();
    for (std::size_t i = 0; i < b.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) EXPECT_NEAR(t(0, i, j), i == j ? 1.0 : 0.0, 1e-14);
    EXPECT_NEAR(t(1, 1, 2), std::sqrt(2.0), 1e-13);
}

TEST(TripleTensor, SliceListsEveryPartner) {
    MultiIndexBasis b({PolynomialFamily::hermite(), PolynomialFamily::hermite()}, 2);
    const auto& t = b.triple_tensor();
    std::size_t total = 0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        for (const auto& e : t.slice(i)) {
            EXPECT_EQ(e.i, i);
            EXPECT_GT(std::abs(e.value), TripleTensor::kDropTolerance);
        }
        total += t.slice(i).size();
    }
    EXPECT_EQ(total, t.nonzeros());
}

TEST(MultiIndexBasis, RejectsTooSmallRules) {
    EXPECT_THROW(MultiIndexBasis({PolynomialFamily::hermite()}, 2, 2), InputError);
}

TEST(Moments, MeanAndVarianceFromCoefficients) {
    const std::vector<double> c{2.0, 3.0, -4.0};
    const auto m = moments(c);
    EXPECT_DOUBLE_EQ(m.mean, 2.0);
    EXPECT_DOUBLE_EQ(m.variance, 25.0);
}
