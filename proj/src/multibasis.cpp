#include "spectral/multibasis.hpp"

#include "spectral/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <string>

namespace spectral {

std::size_t basis_cardinality(std::size_t n_germs, int max_degree) {
    if (max_degree < 0) return 0;
    // binom(n + d, d) built incrementally; every partial product is an integer
    std::size_t result = 1;
    for (int k = 1; k <= max_degree; ++k) {
        result = result * (n_germs + static_cast<std::size_t>(k)) / static_cast<std::size_t>(k);
    }
    return result;
}

std::vector<MultiIndex> build_index_set(std::size_t n_germs, int max_degree) {
    std::vector<MultiIndex> out;
    if (max_degree < 0) return out;
    out.reserve(basis_cardinality(n_germs, max_degree));
    MultiIndex current(n_germs, 0);

    // fills positions [pos, n) with exactly `remaining` total degree
    std::function<void(std::size_t, int)> emit = [&](std::size_t pos, int remaining) {
        if (pos + 1 >= n_germs) {
            if (n_germs > 0) current[n_germs - 1] = remaining;
            out.push_back(current);
            return;
        }
        for (int d = remaining; d >= 0; --d) {
            current[pos] = d;
            emit(pos + 1, remaining - d);
        }
        current[pos] = 0;
    };

    if (n_germs == 0) {
        out.emplace_back();
        return out;
    }
    for (int total = 0; total <= max_degree; ++total) {
        emit(0, total);
    }
    return out;
}

TripleTensor::TripleTensor(std::size_t size, std::vector<TripleEntry> entries)
    : size_(size), entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(), [](const TripleEntry& a, const TripleEntry& b) {
        if (a.i != b.i) return a.i < b.i;
        if (a.j != b.j) return a.j < b.j;
        return a.k < b.k;
    });
    offsets_.assign(size_ + 1, 0);
    for (const auto& e : entries_) ++offsets_[e.i + 1];
    for (std::size_t i = 0; i < size_; ++i) offsets_[i + 1] += offsets_[i];
}

std::span<const TripleEntry> TripleTensor::slice(std::size_t i) const {
    if (i >= size_) return {};
    return std::span<const TripleEntry>(entries_).subspan(offsets_[i], offsets_[i + 1] - offsets_[i]);
}

double TripleTensor::operator()(std::size_t i, std::size_t j, std::size_t k) const {
    const auto row = slice(i);
    auto it = std::lower_bound(row.begin(), row.end(), std::pair{j, k},
                               [](const TripleEntry& e, const std::pair<std::size_t, std::size_t>& key) {
                                   return std::pair<std::size_t, std::size_t>{e.j, e.k} < key;
                               });
    if (it != row.end() && it->j == j && it->k == k) return it->value;
    return 0.0;
}

MultiIndexBasis::MultiIndexBasis(std::vector<PolynomialFamily> families, int max_degree)
    : MultiIndexBasis(std::move(families), max_degree, triple_rule_size(std::max(max_degree, 0))) {}

MultiIndexBasis::MultiIndexBasis(std::vector<PolynomialFamily> families, int max_degree, int quadrature_nodes)
    : families_(std::move(families)), max_degree_(max_degree), quadrature_nodes_(quadrature_nodes) {
    if (max_degree < 0) {
        throw InputError("basis degree must be non-negative");
    }
    if (quadrature_nodes < triple_rule_size(max_degree)) {
        throw InputError("triple products of degree " + std::to_string(max_degree) + " need at least " +
                         std::to_string(triple_rule_size(max_degree)) + " quadrature nodes, got " +
                         std::to_string(quadrature_nodes));
    }
    for (const auto& f : families_) {
        if (f.max_degree() < max_degree) {
            throw InputError("polynomial family of degree " + std::to_string(f.max_degree()) +
                             " cannot support a basis of degree " + std::to_string(max_degree));
        }
    }
    indices_ = build_index_set(families_.size(), max_degree);

    // univariate tables T_g[a][b][c] = E[psi_a psi_b psi_c]
    const auto d1 = static_cast<std::size_t>(max_degree + 1);
    std::vector<std::vector<double>> univariate(families_.size(), std::vector<double>(d1 * d1 * d1, 0.0));
    for (std::size_t g = 0; g < families_.size(); ++g) {
        const auto& rule = families_[g].gauss_rule(quadrature_nodes_);
        for (int a = 0; a <= max_degree; ++a) {
            for (int b = a; b <= max_degree; ++b) {
                for (int c = b; c <= max_degree; ++c) {
                    const double v = families_[g].triple_product(a, b, c, rule);
                    const int perm[6][3] = {{a, b, c}, {a, c, b}, {b, a, c}, {b, c, a}, {c, a, b}, {c, b, a}};
                    for (const auto& p : perm) {
                        univariate[g][(static_cast<std::size_t>(p[0]) * d1 + static_cast<std::size_t>(p[1])) * d1 +
                                      static_cast<std::size_t>(p[2])] = v;
                    }
                }
            }
        }
    }

    // symmetric assembly over i <= j <= k, then mirrored
    std::vector<TripleEntry> entries;
    const std::size_t n = indices_.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            for (std::size_t k = j; k < n; ++k) {
                double v = 1.0;
                for (std::size_t g = 0; g < families_.size() && v != 0.0; ++g) {
                    const auto a = static_cast<std::size_t>(indices_[i][g]);
                    const auto b = static_cast<std::size_t>(indices_[j][g]);
                    const auto c = static_cast<std::size_t>(indices_[k][g]);
                    v *= univariate[g][(a * d1 + b) * d1 + c];
                }
                if (std::abs(v) <= TripleTensor::kDropTolerance) continue;
                std::array<std::array<std::size_t, 3>, 6> perms{{{i, j, k}, {i, k, j}, {j, i, k},
                                                                  {j, k, i}, {k, i, j}, {k, j, i}}};
                std::sort(perms.begin(), perms.end());
                const auto end = std::unique(perms.begin(), perms.end());
                for (auto it = perms.begin(); it != end; ++it) {
                    entries.push_back({static_cast<std::uint32_t>((*it)[0]), static_cast<std::uint32_t>((*it)[1]),
                                       static_cast<std::uint32_t>((*it)[2]), v});
                }
            }
        }
    }
    tensor_ = TripleTensor(n, std::move(entries));
}

void MultiIndexBasis::check_dimension(std::size_t n) const {
    if (n != families_.size()) {
        throw InputError("realization has " + std::to_string(n) + " components, basis has " +
                         std::to_string(families_.size()) + " germs");
    }
}

std::optional<std::size_t> MultiIndexBasis::find(const MultiIndex& alpha) const {
    auto it = std::find(indices_.begin(), indices_.end(), alpha);
    if (it == indices_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - indices_.begin());
}

std::optional<std::size_t> MultiIndexBasis::linear_mode(std::size_t germ) const {
    if (germ >= families_.size() || max_degree_ < 1) return std::nullopt;
    // graded lex: degree-one indices follow the constant one in germ order
    return 1 + germ;
}

double MultiIndexBasis::eval(const MultiIndex& alpha, std::span<const double> y) const {
    check_dimension(y.size());
    if (alpha.size() != families_.size()) {
        throw InputError("multi-index length does not match the number of germs");
    }
    double v = 1.0;
    for (std::size_t g = 0; g < families_.size(); ++g) {
        if (alpha[g] != 0) v *= families_[g].eval(alpha[g], y[g]);
    }
    return v;
}

void MultiIndexBasis::eval_all(std::span<const double> y, std::span<double> out) const {
    check_dimension(y.size());
    if (out.size() != indices_.size()) {
        throw InputError("output span does not match the basis size");
    }
    const auto d1 = static_cast<std::size_t>(max_degree_ + 1);
    std::vector<double> table(families_.size() * d1);
    for (std::size_t g = 0; g < families_.size(); ++g) {
        families_[g].eval_all(y[g], std::span<double>(table).subspan(g * d1, d1));
    }
    for (std::size_t k = 0; k < indices_.size(); ++k) {
        double v = 1.0;
        for (std::size_t g = 0; g < families_.size(); ++g) {
            const int a = indices_[k][g];
            if (a != 0) v *= table[g * d1 + static_cast<std::size_t>(a)];
        }
        out[k] = v;
    }
}

Moments moments(std::span<const double> coefficients) {
    if (coefficients.empty()) return {0.0, 0.0};
    double var = 0.0;
    for (std::size_t k = 1; k < coefficients.size(); ++k) var += coefficients[k] * coefficients[k];
    return {coefficients[0], var};
}

} // namespace spectral
