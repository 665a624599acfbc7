#include "spectral/benchmark.hpp"

#include "spectral/error.hpp"
#include "spectral/parallel.hpp"
#include "spectral/sampling.hpp"
#include "spectral/text.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

namespace spectral {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Block name and flat step of every first-stage scalar.
std::vector<std::pair<std::string, std::size_t>> first_stage_labels(const StochModel& model) {
    std::vector<std::pair<std::string, std::size_t>> out;
    for (auto s : model.first_stage_scalars()) {
        const auto& b = model.block_of(s);
        out.emplace_back(b.name, s - b.offset);
    }
    return out;
}

} // namespace

SaRun solve_sa(const StochModel& model, std::size_t n_s, std::uint64_t seed, const SolveSettings& settings) {
    SaRun run;
    run.scenarios = n_s;
    run.seed = seed;
    const auto t0 = std::chrono::steady_clock::now();
    const auto dists = germ_distributions(model);
    const auto set = lhs_sample(dists, n_s, seed);
    const auto problem = assemble_extensive_form(model, set.values, set.probabilities);
    run.assemble_seconds = seconds_since(t0);

    const auto t1 = std::chrono::steady_clock::now();
    auto result = solve(problem, settings);
    run.solve_seconds = seconds_since(t1);
    run.status = result.status;
    run.iterations = result.diagnostics.iterations;
    run.message = result.diagnostics.message;
    if (result.optimal()) {
        run.objective = result.objective;
        run.first_stage.assign(result.x.begin(),
                               result.x.begin() + static_cast<std::ptrdiff_t>(model.first_stage_scalars().size()));
    } else if (result.status == SolveStatus::infeasible) {
        std::string bad;
        std::size_t found = 0;
        for (std::size_t s = 0; s < n_s && found < 10; ++s) {
            const double one = 1.0;
            auto single = solve(assemble_extensive_form(model, set.row(s), std::span<const double>(&one, 1)), settings);
            if (single.status == SolveStatus::infeasible) {
                bad += (found++ ? "," : "") + std::to_string(s);
            }
        }
        run.message += found ? "; infeasible scenarios: " + bad : "; no single scenario is infeasible on its own";
    }
    return run;
}

std::vector<SaRun> run_sa_grid(const StochModel& model, const std::vector<std::size_t>& grid, std::size_t repetitions,
                               std::uint64_t base_seed, const SolveSettings& settings, std::size_t threads) {
    std::vector<SaRun> runs(grid.size() * repetitions);
    parallel_for(runs.size(), [&](std::size_t k) {
        const std::size_t g = k / repetitions;
        const std::size_t r = k % repetitions;
        runs[k] = solve_sa(model, grid[g], base_seed + r, settings);
    }, threads);
    return runs;
}

std::vector<double> mean_trajectory(const std::vector<SaRun>& runs) {
    std::vector<double> mean;
    std::size_t used = 0;
    for (const auto& r : runs) {
        if (!r.ok()) continue;
        if (mean.empty()) mean.assign(r.first_stage.size(), 0.0);
        if (r.first_stage.size() != mean.size()) throw InputError("runs have different first-stage sizes");
        for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += r.first_stage[i];
        ++used;
    }
    for (auto& v : mean) v /= static_cast<double>(used);
    return mean;
}

ComparisonReport compare(const StochModel& model, double candidate_objective, const std::vector<double>& candidate,
                         const std::vector<SaRun>& runs, const std::map<std::string, double>& weights,
                         double tolerance) {
    std::vector<const SaRun*> ok;
    for (const auto& r : runs) {
        if (r.ok()) ok.push_back(&r);
    }
    if (ok.empty()) throw InputError("no successful reference runs to compare against");
    const auto labels = first_stage_labels(model);
    if (candidate.size() != labels.size()) {
        throw InputError("candidate has " + std::to_string(candidate.size()) + " first-stage values, model has " +
                         std::to_string(labels.size()));
    }
    for (const auto* r : ok) {
        if (r->first_stage.size() != labels.size()) throw InputError("reference run horizon mismatch");
    }

    ComparisonReport rep;
    rep.reference_runs = ok.size();
    rep.candidate_objective = candidate_objective;
    for (const auto* r : ok) rep.reference_objective += r->objective;
    rep.reference_objective /= static_cast<double>(ok.size());
    rep.gap_absolute = candidate_objective - rep.reference_objective;
    rep.gap_relative = rep.gap_absolute / std::abs(rep.reference_objective);

    const auto reference = mean_trajectory(runs);
    std::map<std::string, std::pair<double, std::size_t>> sq;
    double inside_weight = 0.0;
    double total_weight = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        ComparisonRow row;
        row.decision = labels[i].first;
        row.step = labels[i].second;
        auto w = weights.find(row.decision);
        row.weight = w == weights.end() ? 1.0 : w->second;
        row.candidate = candidate[i];
        row.reference = reference[i];
        row.envelope_min = ok.front()->first_stage[i];
        row.envelope_max = row.envelope_min;
        for (const auto* r : ok) {
            row.envelope_min = std::min(row.envelope_min, r->first_stage[i]);
            row.envelope_max = std::max(row.envelope_max, r->first_stage[i]);
        }
        const double tol = tolerance * (1.0 + std::abs(row.candidate));
        row.inside = row.candidate >= row.envelope_min - tol && row.candidate <= row.envelope_max + tol;
        total_weight += row.weight;
        if (row.inside) inside_weight += row.weight;
        const double e = row.candidate - row.reference;
        sq[row.decision].first += e * e;
        sq[row.decision].second += 1;
        rep.rows.push_back(std::move(row));
    }
    for (const auto& [name, acc] : sq) rep.rmse[name] = std::sqrt(acc.first / static_cast<double>(acc.second));
    rep.coverage = total_weight > 0.0 ? inside_weight / total_weight : 1.0;
    return rep;
}

std::map<std::string, double> trajectory_rmse(const StochModel& model, const std::vector<SaRun>& runs,
                                              const std::vector<double>& reference) {
    const auto labels = first_stage_labels(model);
    if (reference.size() != labels.size()) throw InputError("reference horizon mismatch");
    std::map<std::string, std::pair<double, std::size_t>> acc;
    std::size_t used = 0;
    std::vector<double> per_step(labels.size(), 0.0);
    for (const auto& r : runs) {
        if (!r.ok()) continue;
        ++used;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            const double e = r.first_stage[i] - reference[i];
            per_step[i] += e * e;
        }
    }
    std::map<std::string, double> out;
    if (used == 0) return out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto& a = acc[labels[i].first];
        a.first += std::sqrt(per_step[i] / static_cast<double>(used));
        a.second += 1;
    }
    for (const auto& [name, a] : acc) out[name] = a.first / static_cast<double>(a.second);
    return out;
}

void write_comparison_csv(std::ostream& out, const ComparisonReport& report) {
    out << "decision,step,weight,candidate,reference,abs_error,envelope_min,envelope_max,inside\n";
    for (const auto& r : report.rows) {
        out << r.decision << ',' << r.step << ',' << format_double(r.weight) << ',' << format_double(r.candidate) << ','
            << format_double(r.reference) << ',' << format_double(std::abs(r.candidate - r.reference)) << ','
            << format_double(r.envelope_min) << ',' << format_double(r.envelope_max) << ',' << (r.inside ? 1 : 0)
            << '\n';
    }
}

void write_runs_csv(std::ostream& out, const std::vector<SaRun>& runs, bool include_timing) {
    out << "scenarios,seed,status,objective,iterations";
    if (include_timing) out << ",assemble_seconds,solve_seconds";
    out << '\n';
    for (const auto& r : runs) {
        out << r.scenarios << ',' << r.seed << ',' << to_string(r.status) << ','
            << (r.ok() ? format_double(r.objective) : "") << ',' << r.iterations;
        if (include_timing) out << ',' << format_double(r.assemble_seconds) << ',' << format_double(r.solve_seconds);
        out << '\n';
    }
}

} // namespace spectral
