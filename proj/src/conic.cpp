#include "spectral/conic.hpp"

#include "spectral/error.hpp"
#include "spectral/text.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace spectral {

std::string_view to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::unbounded: return "unbounded";
        case SolveStatus::numerical_failure: return "numerical_failure";
    }
    return "unknown";
}

void ConicProblem::validate() const {
    auto fail = [](const std::string& m) { throw InputError("conic problem: " + m); };
    if (c.size() != variables) fail("objective length differs from the variable count");
    if (static_cast<std::size_t>(A.cols()) != variables || static_cast<std::size_t>(A.rows()) != b.size()) {
        fail("equality matrix dimensions do not match");
    }
    if (static_cast<std::size_t>(G.cols()) != variables || static_cast<std::size_t>(G.rows()) != h.size()) {
        fail("cone matrix dimensions do not match");
    }
    const std::size_t soc_rows = std::accumulate(soc_sizes.begin(), soc_sizes.end(), std::size_t{0});
    if (linear_rows + soc_rows != h.size()) fail("cone sizes do not add up to the cone rows");
    for (auto q : soc_sizes) {
        if (q == 0) fail("empty second-order cone");
    }
    auto finite = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    if (!finite(c) || !finite(b) || !finite(h) || !std::isfinite(offset)) fail("non-finite vector entry");
    for (const auto* m : {&A, &G}) {
        for (int k = 0; k < m->outerSize(); ++k) {
            for (SparseMatrix::InnerIterator it(*m, k); it; ++it) {
                if (!std::isfinite(it.value())) fail("non-finite matrix entry");
            }
        }
    }
}

namespace {

using Triplet = Eigen::Triplet<double, int>;

void append_row(std::vector<Triplet>& t, int row, const AffineRow& r, double scale) {
    for (std::size_t i = 0; i < r.index.size(); ++i) {
        t.emplace_back(row, static_cast<int>(r.index[i]), scale * r.value[i]);
    }
}

SparseMatrix build(int rows, int cols, const std::vector<Triplet>& triplets) {
    SparseMatrix m(rows, cols);
    m.setFromTriplets(triplets.begin(), triplets.end());
    m.makeCompressed();
    return m;
}

} // namespace

ConicProblem assemble(const ProjectedProgram& program) {
    ConicProblem p;
    p.variables = program.layout.size();
    p.c.assign(p.variables, 0.0);
    for (std::size_t i = 0; i < program.objective.index.size(); ++i) {
        p.c[program.objective.index[i]] = program.objective.value[i];
    }
    p.offset = program.objective.constant;

    std::vector<Triplet> at;
    for (const auto& e : program.equalities) {
        if (e.row.structurally_zero()) continue;
        append_row(at, static_cast<int>(p.b.size()), e.row, 1.0);
        p.b.push_back(-e.row.constant);
    }

    std::vector<Triplet> gt;
    for (const auto& l : program.linear_inequalities) {
        append_row(gt, static_cast<int>(p.h.size()), l.row, 1.0);
        p.h.push_back(-l.row.constant);
    }
    p.linear_rows = p.h.size();
    for (const auto& cone : program.cones) {
        append_row(gt, static_cast<int>(p.h.size()), cone.mean, 1.0 / cone.lambda);
        p.h.push_back(-cone.mean.constant / cone.lambda);
        for (const auto& r : cone.spread) {
            append_row(gt, static_cast<int>(p.h.size()), r, -1.0);
            p.h.push_back(r.constant);
        }
        p.soc_sizes.push_back(1 + cone.spread.size());
    }
    p.A = build(static_cast<int>(p.b.size()), static_cast<int>(p.variables), at);
    p.G = build(static_cast<int>(p.h.size()), static_cast<int>(p.variables), gt);
    return p;
}

ConicProblem assemble_extensive_form(const StochModel& model, std::span<const double> scenarios,
                                     std::span<const double> probabilities) {
    if (!model.finalized()) throw ModelError("model must be finalized");
    const std::size_t n_germs = model.germs().size();
    const std::size_t n_s = probabilities.size();
    if (n_s == 0) throw InputError("at least one scenario is required");
    if (scenarios.size() != n_s * n_germs) {
        throw InputError("scenario matrix has " + std::to_string(scenarios.size()) + " entries, expected " +
                         std::to_string(n_s) + " x " + std::to_string(n_germs));
    }
    double total = 0.0;
    for (double p : probabilities) {
        if (!(p >= 0.0)) throw InputError("scenario probabilities must be non-negative");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw InputError("scenario probabilities must sum to one");

    const std::size_t n_first = model.first_stage_scalars().size();
    const std::size_t n_second = model.second_stage_scalars().size();
    ConicProblem p;
    p.variables = n_first + n_s * n_second;
    p.c.assign(p.variables, 0.0);

    auto column = [&](std::int32_t var, std::size_t s) -> int {
        const auto v = static_cast<std::size_t>(var);
        const auto pos = model.stage_position(v);
        if (model.stage_of(v) == Stage::first) return static_cast<int>(pos);
        return static_cast<int>(n_first + s * n_second + pos);
    };
    auto scenario_dependent = [&](const std::vector<Term>& terms) {
        for (const auto& t : terms) {
            if (t.germ >= 0) return true;
            if (t.var >= 0 && model.stage_of(static_cast<std::size_t>(t.var)) == Stage::second) return true;
        }
        return false;
    };

    // emits one row per copy; returns the constant so the caller can place the rhs
    auto emit = [&](std::vector<Triplet>& trips, int row, const std::vector<Term>& terms, std::size_t s) {
        const double* omega = scenarios.data() + s * n_germs;
        double constant = 0.0;
        for (const auto& t : terms) {
            const double coef = t.germ >= 0 ? t.coef * omega[t.germ] : t.coef;
            if (t.var >= 0) {
                trips.emplace_back(row, column(t.var, s), coef);
            } else {
                constant += coef;
            }
        }
        return constant;
    };

    std::vector<Triplet> at;
    std::vector<Triplet> gt;
    std::vector<std::size_t> ineq;
    for (std::size_t j = 0; j < model.constraints().size(); ++j) {
        const auto& con = model.constraints()[j];
        const std::size_t copies = scenario_dependent(con.terms) ? n_s : 1;
        for (std::size_t s = 0; s < copies; ++s) {
            if (con.sense == Sense::equal) {
                p.b.push_back(-emit(at, static_cast<int>(p.b.size()), con.terms, s));
            } else {
                p.h.push_back(-emit(gt, static_cast<int>(p.h.size()), con.terms, s));
            }
        }
    }
    p.linear_rows = p.h.size();

    for (const auto& t : model.objective()) {
        if (t.germ < 0 && (t.var < 0 || model.stage_of(static_cast<std::size_t>(t.var)) == Stage::first)) {
            if (t.var >= 0) {
                p.c[static_cast<std::size_t>(column(t.var, 0))] += t.coef;
            } else {
                p.offset += t.coef;
            }
            continue;
        }
        for (std::size_t s = 0; s < n_s; ++s) {
            const double coef = probabilities[s] * (t.germ >= 0 ? t.coef * scenarios[s * n_germs + t.germ] : t.coef);
            if (t.var >= 0) {
                p.c[static_cast<std::size_t>(column(t.var, s))] += coef;
            } else {
                p.offset += coef;
            }
        }
    }

    p.A = build(static_cast<int>(p.b.size()), static_cast<int>(p.variables), at);
    p.G = build(static_cast<int>(p.h.size()), static_cast<int>(p.variables), gt);
    return p;
}

namespace {

constexpr std::string_view kMagic = "spectral-conic";
constexpr int kVersion = 1;

void dump_vector(std::ostream& out, char tag, const std::vector<double>& v) {
    std::size_t nz = 0;
    for (double x : v) nz += x != 0.0 || std::signbit(x);
    out << tag << ' ' << nz << '\n';
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] != 0.0 || std::signbit(v[i])) out << i << ' ' << format_double(v[i]) << '\n';
    }
}

void dump_matrix(std::ostream& out, char tag, const SparseMatrix& m) {
    out << tag << ' ' << m.nonZeros() << '\n';
    for (int k = 0; k < m.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
            out << it.row() << ' ' << it.col() << ' ' << format_double(it.value()) << '\n';
        }
    }
}

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    std::vector<std::string_view> next(std::string_view expect = {}) {
        while (std::getline(in_, line_)) {
            ++number_;
            tokens_ = split_tokens(line_);
            if (tokens_.empty()) continue;
            if (!expect.empty() && tokens_[0] != expect) {
                fail("expected '" + std::string(expect) + "', found '" + std::string(tokens_[0]) + "'");
            }
            return tokens_;
        }
        fail("unexpected end of file");
    }

    [[noreturn]] void fail(const std::string& m) const {
        throw InputError("conic dump line " + std::to_string(number_) + ": " + m);
    }

    std::size_t count(std::string_view tok) const {
        const auto v = parse_integer(tok, "count");
        if (v < 0) fail("negative count");
        return static_cast<std::size_t>(v);
    }

private:
    std::istream& in_;
    std::string line_;
    std::vector<std::string_view> tokens_;
    std::size_t number_ = 0;
};

std::vector<double> load_vector(Reader& r, std::string_view tag, std::size_t size) {
    auto head = r.next(tag);
    if (head.size() != 2) r.fail("malformed vector header");
    const auto nz = r.count(head[1]);
    std::vector<double> v(size, 0.0);
    for (std::size_t k = 0; k < nz; ++k) {
        auto t = r.next();
        if (t.size() != 2) r.fail("expected '<index> <value>'");
        const auto i = r.count(t[0]);
        if (i >= size) r.fail("index out of range");
        v[i] = parse_double(t[1], "value");
    }
    return v;
}

SparseMatrix load_matrix(Reader& r, std::string_view tag, std::size_t rows, std::size_t cols) {
    auto head = r.next(tag);
    if (head.size() != 2) r.fail("malformed matrix header");
    const auto nz = r.count(head[1]);
    std::vector<Triplet> trips;
    trips.reserve(nz);
    for (std::size_t k = 0; k < nz; ++k) {
        auto t = r.next();
        if (t.size() != 3) r.fail("expected '<row> <col> <value>'");
        const auto i = r.count(t[0]);
        const auto j = r.count(t[1]);
        if (i >= rows || j >= cols) r.fail("entry out of range");
        trips.emplace_back(static_cast<int>(i), static_cast<int>(j), parse_double(t[2], "value"));
    }
    // duplicates would be summed by setFromTriplets and break the round trip
    SparseMatrix m(static_cast<int>(rows), static_cast<int>(cols));
    m.setFromTriplets(trips.begin(), trips.end());
    m.makeCompressed();
    if (static_cast<std::size_t>(m.nonZeros()) != nz) r.fail("duplicate matrix entries");
    return m;
}

} // namespace

void dump(std::ostream& out, const ConicProblem& p) {
    p.validate();
    out << kMagic << ' ' << kVersion << '\n';
    out << "dims " << p.variables << ' ' << p.b.size() << ' ' << p.h.size() << ' ' << p.linear_rows << ' '
        << p.soc_sizes.size() << '\n';
    out << "soc";
    for (auto q : p.soc_sizes) out << ' ' << q;
    out << '\n';
    out << "offset " << format_double(p.offset) << '\n';
    dump_vector(out, 'c', p.c);
    dump_matrix(out, 'A', p.A);
    dump_vector(out, 'b', p.b);
    dump_matrix(out, 'G', p.G);
    dump_vector(out, 'h', p.h);
    out << "end\n";
}

void dump(const std::filesystem::path& path, const ConicProblem& problem) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    dump(out, problem);
    if (!out) throw InputError("failed writing " + path.string());
}

ConicProblem load(std::istream& in) {
    Reader r(in);
    auto head = r.next(kMagic);
    if (head.size() != 2 || parse_integer(head[1], "version") != kVersion) r.fail("unsupported conic dump version");
    auto dims = r.next("dims");
    if (dims.size() != 6) r.fail("dims needs five counts");
    ConicProblem p;
    p.variables = r.count(dims[1]);
    const auto m_eq = r.count(dims[2]);
    const auto m_cone = r.count(dims[3]);
    p.linear_rows = r.count(dims[4]);
    const auto n_soc = r.count(dims[5]);
    auto soc = r.next("soc");
    if (soc.size() != n_soc + 1) r.fail("soc line does not list every cone");
    for (std::size_t k = 1; k < soc.size(); ++k) p.soc_sizes.push_back(r.count(soc[k]));
    auto off = r.next("offset");
    if (off.size() != 2) r.fail("malformed offset");
    p.offset = parse_double(off[1], "offset");
    p.c = load_vector(r, "c", p.variables);
    p.A = load_matrix(r, "A", m_eq, p.variables);
    p.b = load_vector(r, "b", m_eq);
    p.G = load_matrix(r, "G", m_cone, p.variables);
    p.h = load_vector(r, "h", m_cone);
    r.next("end");
    p.validate();
    return p;
}

ConicProblem load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    return load(in);
}

} // namespace spectral
