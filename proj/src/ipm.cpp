#include "spectral/conic.hpp"

#include "spectral/error.hpp"

#include <Eigen/SparseCholesky>
#include <amd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <mutex>
#include <vector>
#include <string>

namespace spectral {

namespace {

using Vec = Eigen::VectorXd;
using Triplet = Eigen::Triplet<double, int>;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct ConeLayout {
    std::size_t l = 0;
    std::vector<std::size_t> size;
    std::vector<std::size_t> start;
    std::size_t m = 0;

    double degree() const { return static_cast<double>(l + size.size()); }
};

/// Nesterov-Todd scaling: W = diag(w) on the linear part and
/// W = eta [[w0, w1'], [w1, I + w1 w1' / (1 + w0)]] on each second-order cone.
struct Scaling {
    Vec lp;
    std::vector<double> eta;
    Vec wbar;
};

double soc_residual(const double* v, std::size_t q) {
    double n1 = 0.0;
    for (std::size_t i = 1; i < q; ++i) n1 += v[i] * v[i];
    return v[0] * v[0] - n1;
}

// W v (inverse = false) or W^{-1} v (inverse = true)
void apply_w(const ConeLayout& K, const Scaling& W, const Vec& v, Vec& out, bool inverse) {
    out.resize(K.m);
    for (std::size_t i = 0; i < K.l; ++i) out[i] = inverse ? v[i] / W.lp[i] : v[i] * W.lp[i];
    for (std::size_t k = 0; k < K.size.size(); ++k) {
        const std::size_t s = K.start[k];
        const std::size_t q = K.size[k];
        const double* w = W.wbar.data() + s;
        const double* x = v.data() + s;
        double w1x1 = 0.0;
        for (std::size_t i = 1; i < q; ++i) w1x1 += w[i] * x[i];
        const double sign = inverse ? -1.0 : 1.0;
        const double eta = inverse ? 1.0 / W.eta[k] : W.eta[k];
        out[s] = eta * (w[0] * x[0] + sign * w1x1);
        const double f = sign * x[0] + w1x1 / (1.0 + w[0]);
        for (std::size_t i = 1; i < q; ++i) out[s + i] = eta * (x[i] + f * w[i]);
    }
}

// W^2 v, using W_bar^2 = 2 w w' - J
void apply_w2(const ConeLayout& K, const Scaling& W, Eigen::Ref<const Vec> v, Vec& out) {
    out.resize(K.m);
    for (std::size_t i = 0; i < K.l; ++i) out[i] = W.lp[i] * W.lp[i] * v[i];
    for (std::size_t k = 0; k < K.size.size(); ++k) {
        const std::size_t s = K.start[k];
        const std::size_t q = K.size[k];
        const double* w = W.wbar.data() + s;
        double wv = 0.0;
        for (std::size_t i = 0; i < q; ++i) wv += w[i] * v[s + i];
        const double e2 = W.eta[k] * W.eta[k];
        out[s] = e2 * (2.0 * w[0] * wv - v[s]);
        for (std::size_t i = 1; i < q; ++i) out[s + i] = e2 * (2.0 * w[i] * wv + v[s + i]);
    }
}

// Jordan product u o v
void cone_product(const ConeLayout& K, const Vec& u, const Vec& v, Vec& out) {
    out.resize(K.m);
    for (std::size_t i = 0; i < K.l; ++i) out[i] = u[i] * v[i];
    for (std::size_t k = 0; k < K.size.size(); ++k) {
        const std::size_t s = K.start[k];
        const std::size_t q = K.size[k];
        double dot = 0.0;
        for (std::size_t i = 0; i < q; ++i) dot += u[s + i] * v[s + i];
        out[s] = dot;
        for (std::size_t i = 1; i < q; ++i) out[s + i] = u[s] * v[s + i] + v[s] * u[s + i];
    }
}

// x with lambda o x = w
void cone_division(const ConeLayout& K, const Vec& lambda, const Vec& w, Vec& out) {
    out.resize(K.m);
    for (std::size_t i = 0; i < K.l; ++i) out[i] = w[i] / lambda[i];
    for (std::size_t k = 0; k < K.size.size(); ++k) {
        const std::size_t s = K.start[k];
        const std::size_t q = K.size[k];
        const double l0 = lambda[s];
        double l1w1 = 0.0;
        double l1l1 = 0.0;
        for (std::size_t i = 1; i < q; ++i) {
            l1w1 += lambda[s + i] * w[s + i];
            l1l1 += lambda[s + i] * lambda[s + i];
        }
        const double x0 = (l0 * w[s] - l1w1) / (l0 * l0 - l1l1);
        out[s] = x0;
        for (std::size_t i = 1; i < q; ++i) out[s + i] = (w[s + i] - x0 * lambda[s + i]) / l0;
    }
}

// smallest positive root of a t^2 + b t + c with c > 0, or +inf
double first_positive_root(double a, double b, double c) {
    if (a == 0.0) return b < 0.0 ? -c / b : kInf;
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return kInf;
    const double sq = std::sqrt(disc);
    const double qq = -0.5 * (b + (b >= 0.0 ? sq : -sq));
    double best = kInf;
    for (double r : {qq / a, qq != 0.0 ? c / qq : kInf}) {
        if (r > 0.0 && r < best) best = r;
    }
    return best;
}

// largest step keeping x + t dx in the cone
double max_step(const ConeLayout& K, const Vec& x, const Vec& dx) {
    double t = kInf;
    for (std::size_t i = 0; i < K.l; ++i) {
        if (dx[i] < 0.0) t = std::min(t, -x[i] / dx[i]);
    }
    for (std::size_t k = 0; k < K.size.size(); ++k) {
        const std::size_t s = K.start[k];
        const std::size_t q = K.size[k];
        double a = dx[s] * dx[s];
        double b = x[s] * dx[s];
        double c = x[s] * x[s];
        for (std::size_t i = 1; i < q; ++i) {
            a -= dx[s + i] * dx[s + i];
            b -= x[s + i] * dx[s + i];
            c -= x[s + i] * x[s + i];
        }
        c = std::max(c, 0.0);
        double r = first_positive_root(a, 2.0 * b, c);
        if (dx[s] < 0.0) r = std::min(r, -x[s] / dx[s]);
        t = std::min(t, r);
    }
    return t;
}

// shifts v into the interior of the cone when needed
void shift_into_cone(const ConeLayout& K, Vec& v) {
    double alpha = -kInf;
    for (std::size_t i = 0; i < K.l; ++i) alpha = std::max(alpha, -v[i]);
    for (std::size_t k = 0; k < K.size.size(); ++k) {
        const std::size_t s = K.start[k];
        double n1 = 0.0;
        for (std::size_t i = 1; i < K.size[k]; ++i) n1 += v[s + i] * v[s + i];
        alpha = std::max(alpha, std::sqrt(n1) - v[s]);
    }
    if (alpha < 0.0) return;
    for (std::size_t i = 0; i < K.l; ++i) v[i] += 1.0 + alpha;
    for (std::size_t k = 0; k < K.size.size(); ++k) v[K.start[k]] += 1.0 + alpha;
}

double dot(const Vec& a, const Vec& b) { return a.size() ? a.dot(b) : 0.0; }

// y[j] (+)= sum_i M(i, j) x[i] over columns [0, cols) of a column-major matrix
void gather_columns(const SparseMatrix& M, const double* x, double* y, Eigen::Index cols, bool accumulate) {
    const int* outer = M.outerIndexPtr();
    const int* inner = M.innerIndexPtr();
    const double* val = M.valuePtr();
    for (Eigen::Index j = 0; j < cols; ++j) {
        double acc = accumulate ? y[j] : 0.0;
        for (int k = outer[j]; k < outer[j + 1]; ++k) acc += val[k] * x[inner[k]];
        y[j] = acc;
    }
}

// y[i] = sum_j M(i, j) x[j] over rows [0, rows) of a row-major matrix
void gather_rows(const Eigen::SparseMatrix<double, Eigen::RowMajor, int>& M, const double* x, double* y,
                 Eigen::Index rows) {
    const int* outer = M.outerIndexPtr();
    const int* inner = M.innerIndexPtr();
    const double* val = M.valuePtr();
    for (Eigen::Index i = 0; i < rows; ++i) {
        double acc = 0.0;
        for (int k = outer[i]; k < outer[i + 1]; ++k) acc += val[k] * x[inner[k]];
        y[i] = acc;
    }
}

/// Fill-reducing ordering from SuiteSparse AMD; Eigen hands over the full
/// symmetric pattern and expects the inverse permutation, which is what
/// amd_order returns (perm[k] = original index of pivot k). The last ordering
/// is kept and reused when the same pattern comes back, as it does for
/// repeated scenario sets of one model.
struct AmdOrdering {
    template <class Matrix>
    void operator()(const Matrix& pattern, Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int>& perm) {
        const int n = static_cast<int>(pattern.rows());
        const int* outer = pattern.outerIndexPtr();
        const int* inner = pattern.innerIndexPtr();
        const std::uint64_t key = fingerprint(outer, n + 1) ^ (fingerprint(inner, outer[n]) * 0x9e3779b97f4a7c15ULL);
        perm.resize(n);
        {
            std::lock_guard lock(cache_mutex());
            auto& c = cache();
            if (c.n == n && c.nnz == outer[n] && c.key == key) {
                std::copy(c.perm.begin(), c.perm.end(), perm.indices().data());
                return;
            }
        }
        double control[AMD_CONTROL];
        double info[AMD_INFO];
        amd_defaults(control);
        const int status = amd_order(n, outer, inner, perm.indices().data(), control, info);
        if (status < AMD_OK) throw NumericalError("AMD ordering failed with status " + std::to_string(status));
        std::lock_guard lock(cache_mutex());
        auto& c = cache();
        c.n = n;
        c.nnz = outer[n];
        c.key = key;
        c.perm.assign(perm.indices().data(), perm.indices().data() + n);
    }

private:
    struct Cached {
        int n = -1;
        int nnz = -1;
        std::uint64_t key = 0;
        std::vector<int> perm;
    };
    static Cached& cache() {
        static Cached c;
        return c;
    }
    static std::mutex& cache_mutex() {
        static std::mutex m;
        return m;
    }
    static std::uint64_t fingerprint(const int* data, int count) {
        std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
        for (int i = 0; i < count; ++i) {
            h ^= static_cast<std::uint32_t>(data[i]);
            h *= 1099511628211ULL;
        }
        return h;
    }
};

class Solver {
public:
    Solver(const ConicProblem& p, const SolveSettings& st) : p_(p), st_(st) {
        n_ = p.variables;
        neq_ = p.b.size();
        K_.l = p.linear_rows;
        K_.m = p.h.size();
        std::size_t start = K_.l;
        for (auto q : p.soc_sizes) {
            K_.size.push_back(q);
            K_.start.push_back(start);
            start += q;
        }
        equilibrate();
    }

    SolveResult run();

private:
    void equilibrate();
    void build_kkt();
    void update_kkt(const Scaling& W, double delta_z);
    bool factorize();
    void kkt_multiply(const Scaling& W, const Vec& v, Vec& out) const;
    void kkt_solve(const Scaling& W, const Vec& rhs, Vec& sol);
    void compute_scaling(const Vec& s, const Vec& z, Scaling& W, Vec& lambda) const;

    const ConicProblem& p_;
    SolveSettings st_;
    std::size_t n_ = 0;
    std::size_t neq_ = 0;
    ConeLayout K_;

    SparseMatrix A_, G_, At_, Gt_;
    // row-major copies for products with dense vectors
    Eigen::SparseMatrix<double, Eigen::RowMajor, int> Arows_, Grows_;
    Vec c_, b_, h_;
    Vec D_, EA_, EG_;

    // Linear rows are eliminated from the KKT system: their block is replaced
    // by GL' diag(d) GL in the leading block, d = 1 / (w^2 + delta).
    SparseMatrix GL_, GLt_, GS_;
    Vec d_;
    mutable Vec w2_;
    Vec dr_;

    SparseMatrix kkt_;
    std::vector<int> diag_pos_;
    std::vector<int> h_pos_;     // KKT slots of the lower triangle of GL' GL
    std::vector<int> pair_pos_;  // per linear row, the slot of every column pair (a <= b)
    std::vector<std::vector<int>> soc_pos_;  // lower triangle, column-major within each block
    double delta_ = 1e-8;
    Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, AmdOrdering> ldlt_;
    bool analyzed_ = false;
};

void Solver::equilibrate() {
    A_ = p_.A;
    G_ = p_.G;
    c_ = Eigen::Map<const Vec>(p_.c.data(), static_cast<Eigen::Index>(p_.c.size()));
    b_ = Eigen::Map<const Vec>(p_.b.data(), static_cast<Eigen::Index>(p_.b.size()));
    h_ = Eigen::Map<const Vec>(p_.h.data(), static_cast<Eigen::Index>(p_.h.size()));
    D_ = Vec::Ones(static_cast<Eigen::Index>(n_));
    EA_ = Vec::Ones(static_cast<Eigen::Index>(neq_));
    EG_ = Vec::Ones(static_cast<Eigen::Index>(K_.m));

    auto clamp_scale = [](double v) { return v > 0.0 ? std::clamp(1.0 / std::sqrt(v), 1e-4, 1e4) : 1.0; };
    for (int pass = 0; pass < st_.equilibration_passes; ++pass) {
        Vec col = Vec::Zero(static_cast<Eigen::Index>(n_));
        Vec row_a = Vec::Zero(static_cast<Eigen::Index>(neq_));
        Vec row_g = Vec::Zero(static_cast<Eigen::Index>(K_.m));
        for (int j = 0; j < A_.outerSize(); ++j) {
            for (SparseMatrix::InnerIterator it(A_, j); it; ++it) {
                const double v = std::abs(it.value());
                col[j] = std::max(col[j], v);
                row_a[it.row()] = std::max(row_a[it.row()], v);
            }
        }
        for (int j = 0; j < G_.outerSize(); ++j) {
            for (SparseMatrix::InnerIterator it(G_, j); it; ++it) {
                const double v = std::abs(it.value());
                col[j] = std::max(col[j], v);
                row_g[it.row()] = std::max(row_g[it.row()], v);
            }
        }
        // rows of one cone share a factor so the cone is preserved
        for (std::size_t k = 0; k < K_.size.size(); ++k) {
            const auto s = static_cast<Eigen::Index>(K_.start[k]);
            const auto q = static_cast<Eigen::Index>(K_.size[k]);
            const double mx = row_g.segment(s, q).maxCoeff();
            row_g.segment(s, q).setConstant(mx);
        }
        Vec dc(col.size()), da(row_a.size()), dg(row_g.size());
        for (Eigen::Index i = 0; i < col.size(); ++i) dc[i] = clamp_scale(col[i]);
        for (Eigen::Index i = 0; i < row_a.size(); ++i) da[i] = clamp_scale(row_a[i]);
        for (Eigen::Index i = 0; i < row_g.size(); ++i) dg[i] = clamp_scale(row_g[i]);
        A_ = da.asDiagonal() * A_ * dc.asDiagonal();
        G_ = dg.asDiagonal() * G_ * dc.asDiagonal();
        D_ = D_.cwiseProduct(dc);
        EA_ = EA_.cwiseProduct(da);
        EG_ = EG_.cwiseProduct(dg);
    }
    A_.makeCompressed();
    G_.makeCompressed();
    c_ = c_.cwiseProduct(D_);
    b_ = b_.cwiseProduct(EA_);
    h_ = h_.cwiseProduct(EG_);
    At_ = A_.transpose();
    Gt_ = G_.transpose();
    const auto l = static_cast<Eigen::Index>(K_.l);
    GL_ = G_.topRows(l);
    GS_ = G_.bottomRows(static_cast<Eigen::Index>(K_.m) - l);
    GL_.makeCompressed();
    GS_.makeCompressed();
    GLt_ = GL_.transpose();
    Arows_ = A_;
    Grows_ = G_;
    Arows_.makeCompressed();
    Grows_.makeCompressed();
    d_ = Vec::Ones(l);
}

void Solver::build_kkt() {
    const int n = static_cast<int>(n_);
    const int oy = n;
    const int oz = static_cast<int>(n_ + neq_);
    const int ms = static_cast<int>(K_.m - K_.l);
    const int N = oz + ms;
    SparseMatrix H = GLt_ * GL_;
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(A_.nonZeros() + GS_.nonZeros() + H.nonZeros()) + static_cast<std::size_t>(N) * 2);
    for (int j = 0; j < n; ++j) t.emplace_back(j, j, 0.0);
    for (int j = 0; j < H.outerSize(); ++j) {
        for (SparseMatrix::InnerIterator it(H, j); it; ++it) {
            if (it.row() > j) t.emplace_back(it.row(), j, 0.0);
        }
    }
    for (int j = 0; j < A_.outerSize(); ++j) {
        for (SparseMatrix::InnerIterator it(A_, j); it; ++it) t.emplace_back(oy + it.row(), j, it.value());
    }
    for (int i = 0; i < static_cast<int>(neq_); ++i) t.emplace_back(oy + i, oy + i, -delta_);
    for (int j = 0; j < GS_.outerSize(); ++j) {
        for (SparseMatrix::InnerIterator it(GS_, j); it; ++it) t.emplace_back(oz + it.row(), j, it.value());
    }
    for (std::size_t k = 0; k < K_.size.size(); ++k) {
        const int s = oz + static_cast<int>(K_.start[k] - K_.l);
        const int q = static_cast<int>(K_.size[k]);
        for (int col = 0; col < q; ++col) {
            for (int row = col; row < q; ++row) t.emplace_back(s + row, s + col, row == col ? -1.0 : 0.0);
        }
    }
    kkt_ = SparseMatrix(N, N);
    kkt_.setFromTriplets(t.begin(), t.end());
    kkt_.makeCompressed();

    auto position = [&](int row, int col) {
        const int* inner = kkt_.innerIndexPtr();
        const int begin = kkt_.outerIndexPtr()[col];
        const int end = kkt_.outerIndexPtr()[col + 1];
        const int* it = std::lower_bound(inner + begin, inner + end, row);
        return static_cast<int>(it - inner);
    };
    diag_pos_.resize(n_);
    for (int j = 0; j < n; ++j) diag_pos_[static_cast<std::size_t>(j)] = position(j, j);
    h_pos_.clear();
    for (int j = 0; j < H.outerSize(); ++j) {
        for (SparseMatrix::InnerIterator it(H, j); it; ++it) {
            if (it.row() > j) h_pos_.push_back(position(static_cast<int>(it.row()), j));
        }
    }
    pair_pos_.clear();
    for (int i = 0; i < static_cast<int>(K_.l); ++i) {
        const int begin = Grows_.outerIndexPtr()[i];
        const int end = Grows_.outerIndexPtr()[i + 1];
        const int* col = Grows_.innerIndexPtr();
        for (int a = begin; a < end; ++a) {
            for (int b = a; b < end; ++b) pair_pos_.push_back(position(col[b], col[a]));
        }
    }
    soc_pos_.assign(K_.size.size(), {});
    for (std::size_t k = 0; k < K_.size.size(); ++k) {
        const int s = oz + static_cast<int>(K_.start[k] - K_.l);
        const int q = static_cast<int>(K_.size[k]);
        for (int col = 0; col < q; ++col) {
            for (int row = col; row < q; ++row) soc_pos_[k].push_back(position(s + row, s + col));
        }
    }
}

void Solver::update_kkt(const Scaling& W, double delta_z) {
    double* val = kkt_.valuePtr();
    for (std::size_t i = 0; i < K_.l; ++i) d_[static_cast<Eigen::Index>(i)] = 1.0 / (W.lp[i] * W.lp[i] + delta_z);
    // leading block: delta I + GL' diag(d) GL, accumulated row by row
    for (auto pos : h_pos_) val[pos] = 0.0;
    for (auto pos : diag_pos_) val[pos] = delta_;
    const double* g = Grows_.valuePtr();
    const int* outer = Grows_.outerIndexPtr();
    std::size_t slot = 0;
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(K_.l); ++i) {
        const double di = d_[i];
        for (int a = outer[i]; a < outer[i + 1]; ++a) {
            const double ga = di * g[a];
            for (int b = a; b < outer[i + 1]; ++b) val[pair_pos_[slot++]] += ga * g[b];
        }
    }
    for (std::size_t k = 0; k < K_.size.size(); ++k) {
        const std::size_t s = K_.start[k];
        const std::size_t q = K_.size[k];
        const double* w = W.wbar.data() + s;
        const double e2 = W.eta[k] * W.eta[k];
        std::size_t idx = 0;
        for (std::size_t col = 0; col < q; ++col) {
            for (std::size_t row = col; row < q; ++row) {
                double v = 2.0 * w[row] * w[col];
                if (row == col) v += col == 0 ? -1.0 : 1.0;
                val[soc_pos_[k][idx++]] = -e2 * v - (row == col ? delta_z : 0.0);
            }
        }
    }
}

bool Solver::factorize() {
    if (!analyzed_) {
        ldlt_.analyzePattern(kkt_);
        analyzed_ = true;
    }
    ldlt_.factorize(kkt_);
    return ldlt_.info() == Eigen::Success;
}

void Solver::kkt_multiply(const Scaling& W, const Vec& v, Vec& out) const {
    const auto n = static_cast<Eigen::Index>(n_);
    const auto p = static_cast<Eigen::Index>(neq_);
    const auto m = static_cast<Eigen::Index>(K_.m);
    out.resize(v.size());
    out.head(n).setZero();
    if (p) gather_columns(A_, v.data() + n, out.data(), n, true);
    if (m) gather_columns(G_, v.data() + n + p, out.data(), n, true);
    if (p) gather_rows(Arows_, v.data(), out.data() + n, p);
    if (m) {
        apply_w2(K_, W, v.segment(n + p, m), w2_);
        gather_rows(Grows_, v.data(), out.data() + n + p, m);
        out.segment(n + p, m) -= w2_;
    }
}
void Solver::kkt_solve(const Scaling& W, const Vec& rhs, Vec& sol) {
    const auto n = static_cast<Eigen::Index>(n_);
    const auto p = static_cast<Eigen::Index>(neq_);
    const auto l = static_cast<Eigen::Index>(K_.l);
    const auto ms = static_cast<Eigen::Index>(K_.m) - l;
    Vec reduced(n + p + ms), part;
    auto solve_once = [&](const Vec& r, Vec& out) {
        reduced.head(n) = r.head(n);
        if (l) {
            dr_ = d_.cwiseProduct(r.segment(n + p, l));
            gather_columns(GL_, dr_.data(), reduced.data(), n, true);
        }
        reduced.segment(n, p) = r.segment(n, p);
        reduced.tail(ms) = r.tail(ms);
        // explicit permutations: Eigen's in-place permutation product is slow on long vectors
        const int* perm = ldlt_.permutationP().indices().data();
        part.resize(reduced.size());
        for (Eigen::Index i = 0; i < reduced.size(); ++i) part[perm[i]] = reduced[i];
        ldlt_.matrixL().solveInPlace(part);
        part.array() /= ldlt_.vectorD().array();
        ldlt_.matrixU().solveInPlace(part);
        for (Eigen::Index i = 0; i < reduced.size(); ++i) reduced[i] = part[perm[i]];
        part.swap(reduced);
        out.resize(r.size());
        out.head(n + p) = part.head(n + p);
        if (l) {
            gather_rows(Grows_, part.data(), out.data() + n + p, l);
            out.segment(n + p, l) = d_.cwiseProduct(out.segment(n + p, l) - r.segment(n + p, l));
        }
        out.tail(ms) = part.tail(ms);
    };
    solve_once(rhs, sol);
    const double scale = 1.0 + rhs.lpNorm<Eigen::Infinity>();
    Vec r, correction;
    double last = kInf;
    for (int k = 0; k < st_.refinement_steps; ++k) {
        kkt_multiply(W, sol, r);
        r = rhs - r;
        const double err = r.lpNorm<Eigen::Infinity>();
        // stop once accurate or when refinement has stalled
        if (err <= 1e-8 * scale || err > 0.5 * last) break;
        last = err;
        solve_once(r, correction);
        sol += correction;
    }
}

void Solver::compute_scaling(const Vec& s, const Vec& z, Scaling& W, Vec& lambda) const {
    W.lp.resize(static_cast<Eigen::Index>(K_.l));
    W.wbar.resize(static_cast<Eigen::Index>(K_.m));
    W.eta.assign(K_.size.size(), 1.0);
    lambda.resize(static_cast<Eigen::Index>(K_.m));
    for (std::size_t i = 0; i < K_.l; ++i) {
        W.lp[i] = std::sqrt(s[i] / z[i]);
        lambda[i] = std::sqrt(s[i] * z[i]);
    }
    for (std::size_t k = 0; k < K_.size.size(); ++k) {
        const std::size_t st = K_.start[k];
        const std::size_t q = K_.size[k];
        const double sres = std::sqrt(std::max(soc_residual(s.data() + st, q), 1e-300));
        const double zres = std::sqrt(std::max(soc_residual(z.data() + st, q), 1e-300));
        double sz = 0.0;
        for (std::size_t i = 0; i < q; ++i) sz += s[st + i] * z[st + i];
        sz /= sres * zres;
        const double gamma = std::sqrt(0.5 * (1.0 + sz));
        double w1sq = 0.0;
        for (std::size_t i = 1; i < q; ++i) {
            W.wbar[st + i] = (s[st + i] / sres - z[st + i] / zres) / (2.0 * gamma);
            w1sq += W.wbar[st + i] * W.wbar[st + i];
        }
        // keeps w'Jw = 1 exactly
        W.wbar[st] = std::sqrt(1.0 + w1sq);
        W.eta[k] = std::sqrt(sres / zres);
    }
    Vec lam;
    apply_w(K_, W, z, lam, false);
    for (std::size_t k = 0; k < K_.size.size(); ++k) {
        const std::size_t st = K_.start[k];
        for (std::size_t i = 0; i < K_.size[k]; ++i) lambda[st + i] = lam[st + i];
    }
}

SolveResult Solver::run() {
    const auto t0 = std::chrono::steady_clock::now();
    SolveResult result;
    auto& diag = result.diagnostics;
    auto finish = [&](SolveStatus status, std::string message) {
        result.status = status;
        diag.message = std::move(message);
        diag.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (status != SolveStatus::optimal) {
            result.x.clear();
            result.y.clear();
            result.z.clear();
        }
        return result;
    };

    const auto n = static_cast<Eigen::Index>(n_);
    const auto p = static_cast<Eigen::Index>(neq_);
    const auto m = static_cast<Eigen::Index>(K_.m);
    const Eigen::Index N = n + p + m;
    delta_ = st_.static_regularization;
    build_kkt();

    Scaling W;
    W.lp = Vec::Ones(static_cast<Eigen::Index>(K_.l));
    W.eta.assign(K_.size.size(), 1.0);
    W.wbar = Vec::Zero(m);
    for (std::size_t k = 0; k < K_.size.size(); ++k) {
        // w = e makes W_bar^2 = 2 e e' - J = I
        W.wbar[static_cast<Eigen::Index>(K_.start[k])] = 1.0;
    }
    update_kkt(W, delta_);
    if (!factorize()) return finish(SolveStatus::numerical_failure, "initial factorization failed");

    Vec x, y, z, s;
    Vec rhs = Vec::Zero(N), sol;
    rhs.segment(n, p) = b_;
    rhs.segment(n + p, m) = h_;
    kkt_solve(W, rhs, sol);
    x = sol.head(n);
    s = -sol.segment(n + p, m);
    shift_into_cone(K_, s);
    rhs.setZero();
    rhs.head(n) = -c_;
    kkt_solve(W, rhs, sol);
    y = sol.segment(n, p);
    z = sol.segment(n + p, m);
    shift_into_cone(K_, z);
    double tau = 1.0;
    double kappa = 1.0;

    const double bnorm = 1.0 + Eigen::Map<const Vec>(p_.b.data(), p).norm();
    const double hnorm = 1.0 + Eigen::Map<const Vec>(p_.h.data(), m).norm();
    const double cnorm = 1.0 + Eigen::Map<const Vec>(p_.c.data(), n).norm();

    Vec rx, ry, rz, lambda, v1, v2, dx, dy, dz, ds, tmp, tmp2, corr, q, Wq;
    const Vec e_cone = [&] {
        Vec e = Vec::Zero(m);
        for (std::size_t i = 0; i < K_.l; ++i) e[static_cast<Eigen::Index>(i)] = 1.0;
        for (auto st : K_.start) e[static_cast<Eigen::Index>(st)] = 1.0;
        return e;
    }();

    for (int iter = 0;; ++iter) {
        diag.iterations = iter;
        // residuals of the homogeneous embedding (scaled data)
        rx = c_ * tau;
        if (p) rx.noalias() += A_.transpose() * y;
        if (m) rx.noalias() += G_.transpose() * z;
        ry = b_ * tau;
        if (p) ry -= Arows_ * x;
        rz = h_ * tau - s;
        if (m) rz -= Grows_ * x;
        const double rtau = -dot(c_, x) - dot(b_, y) - dot(h_, z) - kappa;
        const double mu = (dot(s, z) + tau * kappa) / (K_.degree() + 1.0);

        // convergence checks on the original data, recovered from the scaled
        // residuals: c + A'y + G'z = D^-1 rx, Ax - b = -EA^-1 ry, Gx + s - h = -EG^-1 rz
        {
            const double pres = std::max(p ? ry.cwiseQuotient(EA_).norm() / bnorm : 0.0,
                                         m ? rz.cwiseQuotient(EG_).norm() / hnorm : 0.0) / tau;
            const double dres = rx.cwiseQuotient(D_).norm() / (tau * cnorm);
            const double pcost = dot(c_, x) / tau;
            const double dcost = -(dot(b_, y) + dot(h_, z)) / tau;
            const double gap = dot(s, z) / (tau * tau);
            const double denom = std::max(std::min(std::abs(pcost), std::abs(dcost)), 1e-12);
            const double relgap = gap / denom;
            diag.primal_residual = pres;
            diag.dual_residual = dres;
            diag.gap = gap;
            diag.relative_gap = relgap;
            const double ftol = st_.feasibility_tolerance;
            if (pres < ftol && dres < ftol &&
                (gap < st_.absolute_gap_tolerance || relgap < st_.relative_gap_tolerance)) {
                const Vec xo = D_.cwiseProduct(x) / tau;
                const Vec yo = EA_.cwiseProduct(y) / tau;
                const Vec zo = EG_.cwiseProduct(z) / tau;
                result.x.assign(xo.data(), xo.data() + n);
                result.y.assign(yo.data(), yo.data() + p);
                result.z.assign(zo.data(), zo.data() + m);
                result.objective = pcost + p_.offset;
                return finish(SolveStatus::optimal, "converged");
            }
            // certificates use the unnormalised iterate: A'y + G'z = D^-1 (rx - c tau)
            const double by_hz = -dcost * tau;
            if (by_hz < 0.0 && tau < kappa) {
                const double r = (rx - c_ * tau).cwiseQuotient(D_).norm();
                if (r / -by_hz < ftol) return finish(SolveStatus::infeasible, "primal infeasibility certificate");
            }
            const double cx = pcost * tau;
            if (cx < 0.0 && tau < kappa) {
                // A x = EA^-1 (b tau - ry), G x + s = EG^-1 (h tau - rz)
                double r = 0.0;
                if (p) r = std::max(r, (b_ * tau - ry).cwiseQuotient(EA_).norm());
                if (m) r = std::max(r, (h_ * tau - rz).cwiseQuotient(EG_).norm());
                if (r / -cx < ftol) return finish(SolveStatus::unbounded, "dual infeasibility certificate");
            }
        }
        if (iter >= st_.max_iterations) {
            return finish(SolveStatus::numerical_failure, "iteration limit reached");
        }

        compute_scaling(s, z, W, lambda);
        update_kkt(W, delta_);
        bool ok = factorize();
        for (int retry = 0; !ok && retry < 4; ++retry) {
            delta_ *= 100.0;
            build_kkt();
            update_kkt(W, delta_);
            analyzed_ = false;
            ok = factorize();
        }
        if (!ok) return finish(SolveStatus::numerical_failure, "KKT factorization failed");

        rhs.head(n) = -c_;
        rhs.segment(n, p) = b_;
        rhs.segment(n + p, m) = h_;
        kkt_solve(W, rhs, v1);
        const double denom_tau = kappa / tau - dot(c_, v1.head(n)) - dot(b_, v1.segment(n, p)) -
                                 dot(h_, v1.segment(n + p, m));

        auto direction = [&](double sigma, const Vec& wq, double corr_tau, double& dtau, double& dkappa) {
            rhs.head(n) = -(1.0 - sigma) * rx;
            rhs.segment(n, p) = (1.0 - sigma) * ry;
            rhs.segment(n + p, m) = (1.0 - sigma) * rz + wq;
            kkt_solve(W, rhs, v2);
            const double num = -(1.0 - sigma) * rtau + dot(c_, v2.head(n)) + dot(b_, v2.segment(n, p)) +
                               dot(h_, v2.segment(n + p, m)) + (sigma * mu - tau * kappa - corr_tau) / tau;
            dtau = num / denom_tau;
            dx = v2.head(n) + dtau * v1.head(n);
            dy = v2.segment(n, p) + dtau * v1.segment(n, p);
            dz = v2.segment(n + p, m) + dtau * v1.segment(n + p, m);
            apply_w2(K_, W, dz, tmp);
            ds = -wq - tmp;
            dkappa = (sigma * mu - tau * kappa - corr_tau - kappa * dtau) / tau;
        };
        auto step_length = [&](double dtau, double dkappa) {
            double a = std::min(max_step(K_, s, ds), max_step(K_, z, dz));
            if (dtau < 0.0) a = std::min(a, -tau / dtau);
            if (dkappa < 0.0) a = std::min(a, -kappa / dkappa);
            return a;
        };

        // affine scaling (predictor) direction: W (lambda \ (lambda o lambda)) = s
        double dtau_aff = 0.0;
        double dkappa_aff = 0.0;
        direction(0.0, s, 0.0, dtau_aff, dkappa_aff);
        const double alpha_aff = std::min(1.0, step_length(dtau_aff, dkappa_aff));
        const double sigma = std::clamp(std::pow(1.0 - alpha_aff, 3.0), 0.0, 1.0);

        // Mehrotra corrector
        apply_w(K_, W, ds, tmp, true);
        apply_w(K_, W, dz, tmp2, false);
        cone_product(K_, tmp, tmp2, corr);
        cone_product(K_, lambda, lambda, tmp);
        tmp += corr - sigma * mu * e_cone;
        cone_division(K_, lambda, tmp, q);
        apply_w(K_, W, q, Wq, false);
        const double corr_tau = dtau_aff * dkappa_aff;
        double dtau = 0.0;
        double dkappa = 0.0;
        direction(sigma, Wq, corr_tau, dtau, dkappa);
        const double alpha = std::min(1.0, 0.99 * step_length(dtau, dkappa));
        if (!(alpha > 1e-12)) return finish(SolveStatus::numerical_failure, "step length collapsed");

        x += alpha * dx;
        y += alpha * dy;
        z += alpha * dz;
        s += alpha * ds;
        tau += alpha * dtau;
        kappa += alpha * dkappa;
        if (!std::isfinite(tau) || !std::isfinite(kappa) || !x.allFinite()) {
            return finish(SolveStatus::numerical_failure, "non-finite iterate");
        }
    }
}

} // namespace

SolveResult solve(const ConicProblem& problem, const SolveSettings& settings) {
    problem.validate();
    Solver solver(problem, settings);
    auto r = solver.run();
    return r;
}

} // namespace spectral
