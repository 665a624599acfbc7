// Acceptance driver: one PASS/FAIL line per criterion, exit code 1 if any fails.

#include "spectral/benchmark.hpp"
#include "spectral/galerkin.hpp"
#include "spectral/multibasis.hpp"
#include "spectral/pipeline.hpp"
#include "spectral/polybasis.hpp"
#include "spectral/validate.hpp"
#include "spectral/vpp.hpp"

#include "CLI11.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>
#include <unistd.h>

using namespace spectral;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, format, a, b, c, d);
    return buf;
}

// ---------------------------------------------------------------------------
// Independent one-dimensional integration against each standardized weight.

double normal_pdf(double y) { return std::exp(-0.5 * y * y) / std::sqrt(2.0 * std::numbers::pi); }

double weight(const PolynomialFamily& f, double y) {
    switch (f.kind()) {
    case FamilyKind::hermite: return normal_pdf(y);
    case FamilyKind::legendre: return 0.5;
    case FamilyKind::laguerre: return std::pow(y, f.alpha()) * std::exp(-y) / std::tgamma(f.alpha() + 1.0);
    case FamilyKind::jacobi: {
        const double a = f.alpha(), b = f.beta();
        const double norm = std::pow(2.0, a + b + 1.0) * std::tgamma(a + 1.0) * std::tgamma(b + 1.0) /
                            std::tgamma(a + b + 2.0);
        return std::pow(1.0 - y, a) * std::pow(1.0 + y, b) / norm;
    }
    }
    return 0.0;
}

double integrate(const PolynomialFamily& f, const std::function<double(double)>& g) {
    auto integrand = [&](double y) {
        const double w = weight(f, y);
        return w == 0.0 ? 0.0 : g(y) * w;
    };
    switch (f.kind()) {
    case FamilyKind::hermite: {
        boost::math::quadrature::sinh_sinh<double> q;
        return q.integrate(integrand);
    }
    case FamilyKind::laguerre: {
        boost::math::quadrature::exp_sinh<double> q;
        return q.integrate(integrand, 0.0, std::numeric_limits<double>::infinity());
    }
    case FamilyKind::legendre:
    case FamilyKind::jacobi: {
        boost::math::quadrature::tanh_sinh<double> q;
        return q.integrate(integrand, -1.0, 1.0);
    }
    }
    return 0.0;
}

double raw_moment(const PolynomialFamily& f, int k) {
    switch (f.kind()) {
    case FamilyKind::hermite: {
        if (k % 2) return 0.0;
        double m = 1.0;
        for (int i = k - 1; i > 0; i -= 2) m *= i;
        return m;
    }
    case FamilyKind::legendre: return k % 2 ? 0.0 : 1.0 / (k + 1.0);
    case FamilyKind::laguerre: return std::tgamma(f.alpha() + 1.0 + k) / std::tgamma(f.alpha() + 1.0);
    case FamilyKind::jacobi: {
        const double p = f.beta() + 1.0, q = f.alpha() + 1.0;
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

std::vector<PolynomialFamily> all_families() {
    return {PolynomialFamily::hermite(),       PolynomialFamily::legendre(),
            PolynomialFamily::laguerre(0.0),   PolynomialFamily::laguerre(2.0),
            PolynomialFamily::jacobi(0.0, 0.0), PolynomialFamily::jacobi(1.0, 3.0),
            PolynomialFamily::jacobi(0.5, 2.5)};
}

std::string family_label(const PolynomialFamily& f) {
    std::ostringstream s;
    s << to_string(f.kind());
    if (f.kind() == FamilyKind::laguerre) s << "(" << f.alpha() << ")";
    if (f.kind() == FamilyKind::jacobi) s << "(" << f.alpha() << "," << f.beta() << ")";
    return s.str();
}

// ---------------------------------------------------------------------------

Verdict basis_correctness() {
    double worst_orth = 0.0;
    std::string worst_orth_at;
    double worst_gauss = 0.0;
    std::string worst_gauss_at;
    for (const auto& f : all_families()) {
        for (int n = 0; n <= 8; ++n) {
            for (int m = 0; m <= n; ++m) {
                const double v = integrate(f, [&](double y) { return f.eval(n, y) * f.eval(m, y); });
                const double err = std::abs(v - (n == m ? 1.0 : 0.0));
                if (err > worst_orth) {
                    worst_orth = err;
                    worst_orth_at = family_label(f) + " <" + std::to_string(n) + "," + std::to_string(m) + ">";
                }
            }
        }
        for (int n = 1; n <= 9; ++n) {
            const auto& rule = f.gauss_rule(n);
            for (int k = 0; k <= rule.exactness(); ++k) {
                double q = 0.0, magnitude = 0.0;
                for (std::size_t i = 0; i < rule.size(); ++i) {
                    const double t = rule.weights[i] * std::pow(rule.nodes[i], k);
                    q += t;
                    magnitude += std::abs(t);
                }
                // relative to the size of the summed terms; odd moments of symmetric weights are exactly zero
                const double err = std::abs(q - raw_moment(f, k)) / std::max(1.0, magnitude);
                if (err > worst_gauss) {
                    worst_gauss = err;
                    worst_gauss_at = family_label(f) + " n=" + std::to_string(n) + " y^" + std::to_string(k);
                }
            }
        }
    }
    Verdict v;
    v.pass = worst_orth <= 1e-10 && worst_gauss <= 1e-9;
    v.detail = fmt("max orthonormality error %.2e", worst_orth) + " (" + worst_orth_at + "), " +
               fmt("max relative Gauss moment error %.2e", worst_gauss) + " (" + worst_gauss_at + ")";
    return v;
}

std::size_t enumerate_count(std::size_t n, int d, std::set<MultiIndex>& out) {
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
    return out.size();
}

Verdict cardinality() {
    std::size_t cases = 0, failures = 0;
    for (std::size_t n = 1; n <= 10; ++n) {
        for (int d = 0; d <= 4; ++d) {
            std::set<MultiIndex> ref;
            enumerate_count(n, d, ref);
            const auto set = build_index_set(n, d);
            const std::set<MultiIndex> got(set.begin(), set.end());
            // closed form binom(n + d, d)
            double binom = 1.0;
            for (int i = 1; i <= d; ++i) binom = binom * static_cast<double>(n + static_cast<std::size_t>(i)) / i;
            const bool ok = got == ref && set.size() == ref.size() &&
                            basis_cardinality(n, d) == static_cast<std::size_t>(std::llround(binom));
            ++cases;
            if (!ok) ++failures;
        }
    }
    const std::size_t eight_one = build_index_set(8, 1).size();
    Verdict v;
    v.pass = failures == 0 && eight_one == 9;
    v.detail = std::to_string(cases - failures) + "/" + std::to_string(cases) +
               " (germs, degree) pairs match enumeration; 8 germs at degree 1 -> " + std::to_string(eight_one);
    return v;
}

Verdict tensor_oracle() {
    const std::vector<std::vector<PolynomialFamily>> pairs{
        {PolynomialFamily::hermite(), PolynomialFamily::hermite()},
        {PolynomialFamily::hermite(), PolynomialFamily::legendre()},
        {PolynomialFamily::legendre(), PolynomialFamily::laguerre(1.0)},
        {PolynomialFamily::laguerre(0.5), PolynomialFamily::jacobi(1.0, 2.0)},
    };
    double worst = 0.0;
    std::size_t compared = 0;
    bool symmetric = true;
    for (const auto& fams : pairs) {
        for (int d = 0; d <= 2; ++d) {
            MultiIndexBasis basis(fams, d);
            const auto& t = basis.triple_tensor();
            for (std::size_t i = 0; i < basis.size(); ++i) {
                for (std::size_t j = i; j < basis.size(); ++j) {
                    for (std::size_t k = j; k < basis.size(); ++k) {
                        const auto& a = basis.index(i);
                        const auto& b = basis.index(j);
                        const auto& c = basis.index(k);
                        // nested adaptive integration over the full two-dimensional domain
                        const double grid = integrate(fams[0], [&](double y0) {
                            return integrate(fams[1], [&](double y1) {
                                return fams[0].eval(a[0], y0) * fams[0].eval(b[0], y0) * fams[0].eval(c[0], y0) *
                                       fams[1].eval(a[1], y1) * fams[1].eval(b[1], y1) * fams[1].eval(c[1], y1);
                            });
                        });
                        worst = std::max(worst, std::abs(grid - t(i, j, k)));
                        ++compared;
                        const double v = t(i, j, k);
                        symmetric = symmetric && t(i, k, j) == v && t(j, i, k) == v && t(j, k, i) == v &&
                                    t(k, i, j) == v && t(k, j, i) == v;
                    }
                }
            }
        }
    }
    MultiIndexBasis hermite({PolynomialFamily::hermite(), PolynomialFamily::hermite()}, 2);
    const double m112 = hermite.triple_tensor()(*hermite.find({1, 0}), *hermite.find({1, 0}), *hermite.find({2, 0}));
    const double m_err = std::abs(m112 - std::sqrt(2.0));
    Verdict v;
    v.pass = worst <= 1e-9 && m_err <= 1e-9 && symmetric;
    v.detail = std::to_string(compared) + " entries, " + fmt("max deviation from quadrature %.2e", worst) +
               fmt(", Hermite M(1,1,2) = %.15f", m112) + (symmetric ? ", symmetry exact" : ", symmetry BROKEN");
    return v;
}

// Two-stage LP with mixed germs whose inequalities are strictly slack at the optimum.
StochModel slack_lp() {
    StochModel m;
    auto x = m.add_variable("x", Stage::first, {2});
    auto y = m.add_variable("y", Stage::second, {2});
    auto a = m.add_germ("a", Distribution::uniform(-1.0, 1.0));
    auto b = m.add_germ("b", Distribution::normal(0.0, 0.3));
    auto c = m.add_germ("c", Distribution::gamma(2.0, 0.5));
    auto e = m.add_germ("e", Distribution::beta(2.0, 3.0, -1.0, 1.0));
    // shortfalls bought on the recourse market
    m.add_constraint(Expression(y[0]) + x[0] - 10.0 - a - b, Sense::equal, std::nullopt, "demand_a");
    m.add_constraint(Expression(y[1]) + x[1] - 8.0 - c - 0.5 * Expression(e), Sense::equal, std::nullopt, "demand_b");
    m.add_constraint(Expression(x[0]) - 6.0, Sense::less_equal, std::nullopt, "cap_a");
    m.add_constraint(Expression(x[1]) - 5.0, Sense::less_equal, std::nullopt, "cap_b");
    m.add_constraint(-Expression(x[0]), Sense::less_equal, std::nullopt, "floor_a");
    m.add_constraint(-Expression(x[1]), Sense::less_equal, std::nullopt, "floor_b");
    m.add_constraint(Expression(x[0]) + x[1] - 10.0, Sense::less_equal, std::nullopt, "joint");
    m.add_constraint(Expression(y[0]) - 50.0, Sense::less_equal, std::nullopt, "market_a");
    m.add_constraint(Expression(y[1]) - 50.0, Sense::less_equal, std::nullopt, "market_b");
    m.add_constraint(-Expression(y[0]) - 50.0, Sense::less_equal, std::nullopt, "resale_a");
    m.add_constraint(-Expression(y[1]) - 50.0, Sense::less_equal, std::nullopt, "resale_b");
    m.set_objective(2.0 * Expression(x[0]) + 1.5 * Expression(x[1]) + (4.0 + 0.5 * Expression(a)) * y[0] +
                    (3.0 + 0.2 * Expression(c)) * y[1]);
    m.finalize();
    return m;
}

// x in [0, 4] at unit cost, y = 5 + xi1 + xi2 - x at price 3 + 0.5 xi1, xi ~ N(0, 1):
// E[cost] = 15 - 2x + 0.5, minimized at x = 4 with value 7.5.
StochModel analytic_toy() {
    StochModel m;
    auto x = m.add_variable("x", Stage::first)[0];
    auto y = m.add_variable("y", Stage::second)[0];
    auto g1 = m.add_germ("xi1", Distribution::normal(0.0, 1.0));
    auto g2 = m.add_germ("xi2", Distribution::normal(0.0, 1.0));
    m.add_constraint(Expression(y) - 5.0 - g1 - g2 + x, Sense::equal, std::nullopt, "balance");
    m.add_constraint(Expression(x) - 4.0, Sense::less_equal, std::nullopt, "cap");
    m.add_constraint(-Expression(x), Sense::less_equal, std::nullopt, "floor");
    m.set_objective(Expression(x) + (3.0 + 0.5 * Expression(g1)) * y);
    m.finalize();
    return m;
}

Verdict affine_recourse() {
    const auto lp = slack_lp();
    const auto pce = solve_pce(lp);
    const auto sa = solve_sa(lp, 5000, 1);
    const auto toy = solve_pce(analytic_toy());
    Verdict v;
    if (!pce.ok() || !sa.ok() || !toy.ok()) {
        v.detail = "solve failed: pce " + std::string(to_string(pce.result.status)) + ", sa " +
                   std::string(to_string(sa.status)) + ", toy " + std::string(to_string(toy.result.status));
        return v;
    }
    const double gap = std::abs(pce.result.objective - sa.objective) / std::abs(sa.objective);
    const double toy_err = std::abs(toy.result.objective - 7.5) / 7.5;
    v.pass = gap <= 0.01 && toy_err <= 0.005;
    v.detail = fmt("slack LP: PCE %.6f vs SA(5000) %.6f, gap %.4f%%", pce.result.objective, sa.objective,
                   100.0 * gap) +
               fmt("; toy: PCE %.6f vs analytic 7.5, error %.4f%%", toy.result.objective, 100.0 * toy_err);
    return v;
}

struct DeskResults {
    StochModel model;
    vpp::InstanceConfig config;
    PceRun pce;
    std::vector<SaRun> runs;
    double sa_seconds = 0.0;
    double total_seconds = 0.0;
};

Verdict desk_accuracy(DeskResults& desk, std::uint64_t base_seed) {
    const auto t0 = Clock::now();
    desk.pce = solve_pce(desk.model);
    const auto t1 = Clock::now();
    desk.runs = run_sa_grid(desk.model, {2000}, 20, base_seed, {}, 1);
    desk.sa_seconds = seconds_since(t1);
    desk.total_seconds = seconds_since(t0);
    Verdict v;
    std::size_t failed = 0;
    for (const auto& r : desk.runs) failed += r.ok() ? 0 : 1;
    if (!desk.pce.ok() || failed) {
        v.detail = "PCE " + std::string(to_string(desk.pce.result.status)) + ", failed SA runs " +
                   std::to_string(failed);
        return v;
    }
    double mean = 0.0, lo = desk.runs[0].objective, hi = lo;
    for (const auto& r : desk.runs) {
        mean += r.objective;
        lo = std::min(lo, r.objective);
        hi = std::max(hi, r.objective);
    }
    mean /= static_cast<double>(desk.runs.size());
    const double gap = std::abs(desk.pce.result.objective - mean) / std::abs(mean);
    v.pass = gap <= 0.05 && desk.total_seconds <= 15.0 * 60.0;
    v.detail = fmt("PCE %.4f vs mean SA(2000) %.4f (runs %.4f..%.4f)", desk.pce.result.objective, mean, lo, hi) +
               fmt(", gap %.3f%%, total %.1f s", 100.0 * gap, desk.total_seconds);
    return v;
}

Verdict chance_validation(const DeskResults& desk) {
    Verdict v;
    if (!desk.pce.ok()) {
        v.detail = "no PCE policy";
        return v;
    }
    ValidationSettings s;
    s.samples = 10000;
    s.seed = 1;
    const auto report = estimate_violations(*desk.pce.policy, desk.model, s);
    const double fraction = report.fraction_above_target();
    v.pass = report.max_probability <= 0.065 && fraction <= 0.01;
    v.detail = fmt("max violation %.3f%%", 100.0 * report.max_probability) + " (" + report.max_constraint + "), " +
               std::to_string(report.above_target) + " of " + std::to_string(report.constraints.size()) +
               fmt(" inequalities above 5%% (%.2f%%, limit 1%%)", 100.0 * fraction);
    return v;
}

Verdict first_stage_fidelity(const DeskResults& desk) {
    Verdict v;
    if (!desk.pce.ok() || desk.runs.empty()) {
        v.detail = "missing solves";
        return v;
    }
    const auto rep = compare(desk.model, desk.pce.result.objective, desk.pce.policy->first_stage(), desk.runs,
                             vpp::decision_weights(desk.config));
    std::map<std::string, std::pair<double, double>> per_block;  // inside hours, total hours
    for (const auto& r : rep.rows) {
        per_block[r.decision].second += r.weight;
        if (r.inside) per_block[r.decision].first += r.weight;
    }
    v.pass = rep.coverage >= 0.90;
    v.detail = fmt("%.1f%% of bid hours inside the 20-run envelope", 100.0 * rep.coverage);
    for (const auto& [name, hours] : per_block) {
        v.detail += "; " + name + fmt(" %.0f/%.0f h", hours.first, hours.second);
    }
    return v;
}

Verdict galerkin_residual(const DeskResults& desk) {
    Verdict v;
    if (!desk.pce.ok()) {
        v.detail = "no PCE policy";
        return v;
    }
    const auto r = max_equality_residual(*desk.pce.policy, desk.model, 1000, 7);
    v.pass = r.max_abs <= 1e-6;
    v.detail = fmt("max |residual| %.3e", r.max_abs) + " over " + std::to_string(r.samples) +
               " realizations (worst: " + r.worst_constraint + ")";
    return v;
}

Verdict zero_uncertainty() {
    auto config = vpp::desk_instance();
    const auto nominal = vpp::build_instance(config);
    config.uncertainty_scale = 0.0;
    const auto collapsed = vpp::build_instance(config);
    const auto pce = solve_pce(collapsed);
    const auto sa_few = solve_sa(collapsed, 3, 1);
    const auto sa_many = solve_sa(collapsed, 50, 2);
    // deterministic LP: the nominal model with every germ at its mean, one scenario
    const auto det = solve_sa(freeze_germs(nominal), 1, 1);
    Verdict v;
    if (!pce.ok() || !sa_few.ok() || !sa_many.ok() || !det.ok()) {
        v.detail = "a solve failed";
        return v;
    }
    const double ref = det.objective;
    auto rel = [&](double x) { return std::abs(x - ref) / std::max(1.0, std::abs(ref)); };
    const double worst = std::max({rel(pce.result.objective), rel(sa_few.objective), rel(sa_many.objective)});
    v.pass = worst <= 1e-6;
    v.detail = fmt("deterministic %.8f, PCE %.8f, SA(3) %.8f, SA(50) %.8f", ref, pce.result.objective,
                   sa_few.objective, sa_many.objective) +
               fmt(", max relative difference %.2e", worst);
    return v;
}

Verdict performance(const DeskResults& desk) {
    // fresh timings, not the ones taken next to the long benchmark
    const auto t0 = Clock::now();
    const auto pce = solve_pce(desk.model);
    const double pce_seconds = seconds_since(t0);
    const auto t1 = Clock::now();
    const auto sa = solve_sa(desk.model, 500, 1);
    const double sa_seconds = seconds_since(t1);
    Verdict v;
    v.pass = pce.ok() && sa.ok() && pce_seconds <= 2.0 * sa_seconds;
    v.detail = fmt("PCE end-to-end %.3f s vs SA(500) %.3f s (ratio %.4f, limit 2)", pce_seconds, sa_seconds,
                   pce_seconds / sa_seconds);
    return v;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

int shell(const std::string& cmd) { return std::system((cmd + " >/dev/null 2>&1").c_str()); }

Verdict reproducibility(const std::string& cli, const fs::path& work) {
    fs::remove_all(work);
    fs::create_directories(work);
    const std::string model = (work / "desk.json").string();
    Verdict v;
    if (shell(cli + " instance desk --out " + model) != 0 ||
        shell(cli + " solve " + model + " --out " + (work / "solve").string()) != 0 ||
        shell(cli + " validate " + model + " --solution " + (work / "solve" / "solution.txt").string() +
              " --mc-samples 2000 --out " + (work / "validate").string()) != 0 ||
        shell(cli + " benchmark " + model + " --scenarios 20,40 --repetitions 2 --out " +
              (work / "benchmark").string()) != 0) {
        v.detail = "a CLI run failed";
        return v;
    }
    std::size_t files = 0, identical = 0;
    std::string mismatch;
    for (const char* step : {"solve", "validate", "benchmark"}) {
        const fs::path original = work / step;
        for (int rep = 0; rep < 2; ++rep) {
            const fs::path replayed = work / (std::string(step) + "_replay" + std::to_string(rep));
            if (shell(cli + " replay " + (original / "manifest.json").string() + " --out " + replayed.string()) != 0) {
                v.detail = std::string("replay of ") + step + " failed";
                return v;
            }
            for (const auto& entry : fs::directory_iterator(original)) {
                const auto name = entry.path().filename();
                if (name == "manifest.json") continue;  // carries wall-clock timestamps
                ++files;
                if (slurp(entry.path()) == slurp(replayed / name)) {
                    ++identical;
                } else if (mismatch.empty()) {
                    mismatch = (fs::path(step) / name).string();
                }
            }
        }
    }
    v.pass = files > 0 && identical == files;
    v.detail = std::to_string(identical) + "/" + std::to_string(files) +
               " output files byte-identical across manifest replays" + (mismatch.empty() ? "" : ", first diff " + mismatch);
    return v;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    std::string cli;
    std::string work = (fs::temp_directory_path() / ("spectral_acceptance_" + std::to_string(::getpid()))).string();
    std::vector<int> only;
    std::uint64_t seed = 1;
    app.add_option("--cli", cli, "Path of the spectral executable")->required();
    app.add_option("--work", work, "Scratch directory for CLI outputs");
    app.add_option("--only", only, "Run only these criteria")->delimiter(',');
    app.add_option("--seed", seed, "Base seed of the scenario runs");
    CLI11_PARSE(app, argc, argv);

    auto wanted = [&](int c) { return only.empty() || std::find(only.begin(), only.end(), c) != only.end(); };
    auto needs_desk = [&] {
        for (int c : {5, 6, 7, 8, 10})
            if (wanted(c)) return true;
        return false;
    };

    std::optional<DeskResults> desk;
    if (needs_desk()) {
        desk.emplace();
        desk->config = vpp::desk_instance();
        desk->model = vpp::build_instance(desk->config);
    }

    int failures = 0;
    auto report = [&](int id, const char* title, const std::function<Verdict()>& check) {
        if (!wanted(id)) return;
        const auto t0 = Clock::now();
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = std::string("exception: ") + e.what();
        }
        if (!v.pass) ++failures;
        std::cout << "criterion " << id << " [" << title << "]: " << (v.pass ? "PASS" : "FAIL") << " - " << v.detail
                  << fmt(" (%.1f s)", seconds_since(t0)) << std::endl;
    };

    report(1, "basis correctness", basis_correctness);
    report(2, "cardinality", cardinality);
    report(3, "tensor oracle", tensor_oracle);
    report(4, "affine-recourse exactness", affine_recourse);
    if (desk && !wanted(5)) {
        desk->pce = solve_pce(desk->model);
        if (wanted(7)) desk->runs = run_sa_grid(desk->model, {2000}, 20, seed, {}, 1);
    }
    report(5, "desk accuracy", [&] { return desk_accuracy(*desk, seed); });
    report(6, "chance-constraint validation", [&] { return chance_validation(*desk); });
    report(7, "first-stage fidelity", [&] { return first_stage_fidelity(*desk); });
    report(8, "Galerkin residual", [&] { return galerkin_residual(*desk); });
    report(9, "zero-uncertainty collapse", zero_uncertainty);
    report(10, "performance", [&] { return performance(*desk); });
    report(11, "reproducibility", [&] { return reproducibility(cli, work); });

    std::cout << (failures ? std::to_string(failures) + " criterion(s) FAILED" : std::string("all criteria PASS"))
              << std::endl;
    return failures ? 1 : 0;
}
