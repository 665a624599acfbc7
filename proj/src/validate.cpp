#include "spectral/validate.hpp"

#include "spectral/error.hpp"
#include "spectral/parallel.hpp"
#include "spectral/sampling.hpp"
#include "spectral/text.hpp"

#include <boost/math/distributions/beta.hpp>

#include <cmath>
#include <ostream>

namespace spectral {

namespace {

// fixed chunking keeps floating-point sums independent of the thread count
constexpr std::size_t kChunk = 512;

std::size_t chunk_count(std::size_t samples) { return (samples + kChunk - 1) / kChunk; }

} // namespace

double ViolationReport::fraction_above_target() const {
    return constraints.empty() ? 0.0 : static_cast<double>(above_target) / static_cast<double>(constraints.size());
}

std::pair<double, double> binomial_interval(std::size_t k, std::size_t n, double confidence) {
    if (n == 0) return {0.0, 1.0};
    const double a = 0.5 * (1.0 - confidence);
    const auto kd = static_cast<double>(k);
    const auto nd = static_cast<double>(n);
    const double lo = k == 0 ? 0.0 : boost::math::ibeta_inv(kd, nd - kd + 1.0, a);
    const double hi = k == n ? 1.0 : boost::math::ibeta_inv(kd + 1.0, nd - kd, 1.0 - a);
    return {lo, hi};
}

ViolationReport estimate_violations(const RecoursePolicy& policy, const StochModel& model,
                                    const ValidationSettings& settings) {
    if (settings.samples == 0) throw InputError("at least one Monte Carlo sample is required");
    const auto dists = germ_distributions(model);
    std::vector<std::size_t> rows;
    for (std::size_t j = 0; j < model.constraints().size(); ++j) {
        if (model.constraints()[j].sense == Sense::less_equal) rows.push_back(j);
    }
    const std::size_t chunks = chunk_count(settings.samples);
    std::vector<std::vector<std::size_t>> counts(chunks, std::vector<std::size_t>(rows.size(), 0));
    parallel_for(chunks, [&](std::size_t c) {
        std::vector<double> omega(dists.size());
        std::vector<double> scalars(model.scalar_count());
        std::vector<double> work;
        const std::size_t end = std::min(settings.samples, (c + 1) * kChunk);
        for (std::size_t i = c * kChunk; i < end; ++i) {
            monte_carlo_draw(dists, settings.seed, i, omega);
            policy.evaluate_scalars(omega, scalars, work);
            for (std::size_t r = 0; r < rows.size(); ++r) {
                const double res = evaluate_terms(model.constraints()[rows[r]].terms, scalars, omega);
                if (res > settings.threshold) ++counts[c][r];
            }
        }
    });

    ViolationReport report;
    report.samples = settings.samples;
    report.threshold = settings.threshold;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& con = model.constraints()[rows[r]];
        ConstraintViolation v;
        v.constraint = rows[r];
        v.name = con.name;
        for (std::size_t c = 0; c < chunks; ++c) v.violations += counts[c][r];
        v.samples = settings.samples;
        v.probability = static_cast<double>(v.violations) / static_cast<double>(v.samples);
        std::tie(v.ci_low, v.ci_high) = binomial_interval(v.violations, v.samples);
        v.target = con.epsilon.value_or(settings.epsilon);
        v.above_target = v.probability > v.target;
        if (v.above_target) ++report.above_target;
        if (v.probability > report.max_probability || report.max_constraint.empty()) {
            report.max_probability = v.probability;
            report.max_constraint = v.name;
        }
        report.constraints.push_back(std::move(v));
    }
    return report;
}

CostEstimate estimate_cost(const RecoursePolicy& policy, const StochModel& model, std::size_t samples,
                           std::uint64_t seed) {
    if (samples == 0) throw InputError("at least one Monte Carlo sample is required");
    const auto dists = germ_distributions(model);
    const std::size_t chunks = chunk_count(samples);
    std::vector<double> sum(chunks, 0.0);
    std::vector<double> values(samples, 0.0);
    parallel_for(chunks, [&](std::size_t c) {
        std::vector<double> omega(dists.size());
        std::vector<double> scalars(model.scalar_count());
        std::vector<double> work;
        const std::size_t end = std::min(samples, (c + 1) * kChunk);
        for (std::size_t i = c * kChunk; i < end; ++i) {
            monte_carlo_draw(dists, seed, i, omega);
            policy.evaluate_scalars(omega, scalars, work);
            values[i] = evaluate_terms(model.objective(), scalars, omega);
            sum[c] += values[i];
        }
    });
    double total = 0.0;
    for (double s : sum) total += s;
    const auto n = static_cast<double>(samples);
    CostEstimate est;
    est.samples = samples;
    est.mean = total / n;
    double ss = 0.0;
    for (double v : values) ss += (v - est.mean) * (v - est.mean);
    est.stddev = samples > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    est.standard_error = est.stddev / std::sqrt(n);
    est.ci_low = est.mean - 1.959963984540054 * est.standard_error;
    est.ci_high = est.mean + 1.959963984540054 * est.standard_error;
    return est;
}

EqualityResidual max_equality_residual(const RecoursePolicy& policy, const StochModel& model, std::size_t samples,
                                       std::uint64_t seed) {
    const auto dists = germ_distributions(model);
    const std::size_t chunks = chunk_count(samples);
    std::vector<EqualityResidual> partial(chunks);
    parallel_for(chunks, [&](std::size_t c) {
        std::vector<double> omega(dists.size());
        std::vector<double> scalars(model.scalar_count());
        std::vector<double> work;
        const std::size_t end = std::min(samples, (c + 1) * kChunk);
        for (std::size_t i = c * kChunk; i < end; ++i) {
            monte_carlo_draw(dists, seed, i, omega);
            policy.evaluate_scalars(omega, scalars, work);
            for (const auto& con : model.constraints()) {
                if (con.sense != Sense::equal) continue;
                const double r = std::abs(evaluate_terms(con.terms, scalars, omega));
                if (r > partial[c].max_abs || partial[c].worst_constraint.empty()) {
                    partial[c].max_abs = r;
                    partial[c].worst_constraint = con.name;
                }
            }
        }
    });
    EqualityResidual out;
    out.samples = samples;
    for (const auto& p : partial) {
        if (p.max_abs > out.max_abs || out.worst_constraint.empty()) out = {p.max_abs, p.worst_constraint, samples};
    }
    return out;
}

void write_violation_csv(std::ostream& out, const ViolationReport& report) {
    out << "constraint,violations,samples,probability,ci_low,ci_high,target,above_target\n";
    for (const auto& v : report.constraints) {
        out << '"' << v.name << '"' << ',' << v.violations << ',' << v.samples << ',' << format_double(v.probability)
            << ',' << format_double(v.ci_low) << ',' << format_double(v.ci_high) << ',' << format_double(v.target)
            << ',' << (v.above_target ? 1 : 0) << '\n';
    }
}

std::string violation_summary(const ViolationReport& report) {
    return "violations above target: " + std::to_string(report.above_target) + " of " +
           std::to_string(report.constraints.size()) + " inequalities; max empirical violation " +
           format_double(report.max_probability) + (report.max_constraint.empty() ? "" : " (" + report.max_constraint + ")");
}

} // namespace spectral
