// Batch entry point: project, solve, validate and benchmark stochastic programs.
//
// Exit codes: 0 success, 1 input error, 2 solver did not reach optimality,
// 3 internal error. Errors are reported on stderr as one JSON object.

#include "spectral/benchmark.hpp"
#include "spectral/conic.hpp"
#include "spectral/error.hpp"
#include "spectral/galerkin.hpp"
#include "spectral/parallel.hpp"
#include "spectral/pipeline.hpp"
#include "spectral/text.hpp"
#include "spectral/validate.hpp"
#include "spectral/vpp.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <Eigen/Core>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = SPECTRAL_VERSION;

/// Solver did not return an optimal point; maps to exit code 2.
class SolverFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Every setting that determines a run's outputs.
struct RunSettings {
    std::string command;
    std::string model;
    std::string output;
    // basis and projection
    int degree = 1;
    double lambda = 1.645;
    std::optional<double> epsilon;
    bool cantelli = false;
    bool truncate = false;
    // solver
    spectral::SolveSettings solver;
    // validation
    std::string solution;
    std::size_t mc_samples = 10000;
    std::uint64_t seed = 1;
    // benchmark
    std::vector<std::size_t> scenarios{100, 500};
    std::size_t repetitions = 5;
    bool timing = false;
    // instance
    std::string instance = "desk";
};

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

Json settings_json(const RunSettings& s) {
    Json j;
    j["command"] = s.command;
    j["model"] = s.model;
    j["output"] = s.output;
    j["basis"] = {{"degree", s.degree},
                  {"lambda", s.lambda},
                  {"epsilon", s.epsilon ? Json(*s.epsilon) : Json(nullptr)},
                  {"cantelli", s.cantelli},
                  {"truncate", s.truncate}};
    j["solver"] = {{"feasibility_tolerance", s.solver.feasibility_tolerance},
                   {"absolute_gap_tolerance", s.solver.absolute_gap_tolerance},
                   {"relative_gap_tolerance", s.solver.relative_gap_tolerance},
                   {"max_iterations", s.solver.max_iterations},
                   {"equilibration_passes", s.solver.equilibration_passes},
                   {"static_regularization", s.solver.static_regularization},
                   {"refinement_steps", s.solver.refinement_steps}};
    j["validation"] = {{"solution", s.solution}, {"mc_samples", s.mc_samples}};
    j["seed"] = s.seed;
    j["benchmark"] = {{"scenarios", s.scenarios}, {"repetitions", s.repetitions}, {"timing", s.timing}};
    j["instance"] = s.instance;
    return j;
}

RunSettings settings_from_json(const Json& j) {
    RunSettings s;
    try {
        s.command = j.at("command").get<std::string>();
        s.model = j.at("model").get<std::string>();
        s.output = j.at("output").get<std::string>();
        const auto& b = j.at("basis");
        s.degree = b.at("degree").get<int>();
        s.lambda = b.at("lambda").get<double>();
        if (!b.at("epsilon").is_null()) s.epsilon = b.at("epsilon").get<double>();
        s.cantelli = b.at("cantelli").get<bool>();
        s.truncate = b.at("truncate").get<bool>();
        const auto& v = j.at("solver");
        s.solver.feasibility_tolerance = v.at("feasibility_tolerance").get<double>();
        s.solver.absolute_gap_tolerance = v.at("absolute_gap_tolerance").get<double>();
        s.solver.relative_gap_tolerance = v.at("relative_gap_tolerance").get<double>();
        s.solver.max_iterations = v.at("max_iterations").get<int>();
        s.solver.equilibration_passes = v.at("equilibration_passes").get<int>();
        s.solver.static_regularization = v.at("static_regularization").get<double>();
        s.solver.refinement_steps = v.at("refinement_steps").get<int>();
        s.solution = j.at("validation").at("solution").get<std::string>();
        s.mc_samples = j.at("validation").at("mc_samples").get<std::size_t>();
        s.seed = j.at("seed").get<std::uint64_t>();
        s.scenarios = j.at("benchmark").at("scenarios").get<std::vector<std::size_t>>();
        s.repetitions = j.at("benchmark").at("repetitions").get<std::size_t>();
        s.timing = j.at("benchmark").at("timing").get<bool>();
        s.instance = j.at("instance").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw spectral::InputError(std::string("manifest: ") + e.what());
    }
    return s;
}

/// Records settings, versions and timestamps next to the outputs.
class Manifest {
public:
    explicit Manifest(const RunSettings& s) : settings_(s), started_(utc_now()) {}

    void timing(const std::string& key, double seconds) { timings_[key] = seconds; }
    void output(const std::string& file) { outputs_.push_back(file); }
    void note(const std::string& key, Json value) { notes_[key] = std::move(value); }

    void write(const fs::path& dir) const {
        Json j;
        j["format"] = "spectral-manifest 1";
        j["settings"] = settings_json(settings_);
        j["threads"] = spectral::configured_threads();
        j["started"] = started_;
        j["finished"] = utc_now();
        j["versions"] = {{"spectral", kVersion},
                         {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                       "." + std::to_string(EIGEN_MINOR_VERSION)},
                         {"compiler", __VERSION__}};
        j["outputs"] = outputs_;
        j["results"] = notes_;
        j["timings"] = timings_;
        std::ofstream f(dir / "manifest.json");
        f << j.dump(2) << '\n';
        if (!f) throw std::runtime_error("cannot write " + (dir / "manifest.json").string());
    }

private:
    RunSettings settings_;
    std::string started_;
    Json timings_ = Json::object();
    Json notes_ = Json::object();
    std::vector<std::string> outputs_;
};

fs::path prepare_output(const std::string& dir) {
    if (dir.empty()) throw spectral::InputError("--out is required");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw spectral::InputError("cannot create output directory '" + dir + "'");
    return fs::path(dir);
}

template <class Writer>
void write_file(const fs::path& dir, const std::string& name, Manifest& manifest, Writer&& writer) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw spectral::InputError("cannot write '" + (dir / name).string() + "'");
    writer(f);
    if (!f) throw spectral::InputError("write failed for '" + (dir / name).string() + "'");
    manifest.output(name);
}

spectral::StochModel load_input(const RunSettings& s) {
    if (s.model.empty()) throw spectral::InputError("a model file is required");
    if (!fs::exists(s.model)) throw spectral::InputError("model file '" + s.model + "' does not exist");
    return spectral::load_model_or_instance(s.model);
}

spectral::PceSettings pce_settings(const RunSettings& s) {
    spectral::PceSettings p;
    p.degree = s.degree;
    p.projection.lambda = s.lambda;
    p.projection.epsilon = s.epsilon;
    p.projection.cantelli = s.cantelli;
    p.projection.allow_truncation = s.truncate;
    if (s.cantelli && !s.epsilon) p.projection.lambda = spectral::safety_factor(0.05, true);
    p.solver = s.solver;
    return p;
}

std::map<std::string, double> weights_for(const RunSettings& s) {
    if (fs::path(s.model).extension() == ".json") {
        return spectral::vpp::decision_weights(spectral::vpp::load_config(s.model));
    }
    return {};
}

Json report_json(const spectral::ProjectionReport& r) {
    return {{"basis_size", r.basis_size},
            {"variables", r.variables},
            {"first_stage", r.first_stage},
            {"coefficients", r.coefficients},
            {"equalities", r.equalities},
            {"trivial_equalities", r.trivial_equalities},
            {"linear_inequalities", r.linear_inequalities},
            {"cones", r.cones},
            {"cone_rows", r.cone_rows},
            {"truncated_terms", r.truncated_terms}};
}

int cmd_project(const RunSettings& s) {
    const auto dir = prepare_output(s.output);
    Manifest manifest(s);
    const auto t0 = std::chrono::steady_clock::now();
    const auto model = load_input(s);
    const auto p = pce_settings(s);
    const auto basis = spectral::make_basis(model, p.degree);
    const auto program = spectral::project_model(model, basis, p.projection);
    const auto problem = spectral::assemble(program);
    manifest.timing("project_seconds",
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    const auto report = program.report();
    write_file(dir, "projected.conic", manifest, [&](std::ostream& o) { spectral::dump(o, problem); });
    write_file(dir, "report.json", manifest, [&](std::ostream& o) { o << report_json(report).dump(2) << '\n'; });
    manifest.write(dir);
    std::cout << "basis size |A| = " << report.basis_size << "; " << report.variables << " variables, "
              << report.equalities << " equality rows, " << report.linear_inequalities << " linear rows, "
              << report.cones << " cones\n";
    return 0;
}

int cmd_solve(const RunSettings& s) {
    const auto dir = prepare_output(s.output);
    Manifest manifest(s);
    const auto model = load_input(s);
    const auto run = spectral::solve_pce(model, pce_settings(s));
    manifest.timing("project_seconds", run.project_seconds);
    manifest.timing("solve_seconds", run.solve_seconds);
    manifest.note("status", std::string(spectral::to_string(run.result.status)));
    manifest.note("iterations", run.result.diagnostics.iterations);
    if (!run.ok()) {
        manifest.write(dir);
        throw SolverFailure("solver returned " + std::string(spectral::to_string(run.result.status)) + ": " +
                            run.result.diagnostics.message);
    }
    const auto& policy = *run.policy;
    write_file(dir, "first_stage.csv", manifest,
               [&](std::ostream& o) { spectral::write_first_stage_csv(o, model, policy.first_stage()); });
    write_file(dir, "coefficients.csv", manifest,
               [&](std::ostream& o) { spectral::write_coefficients_csv(o, model, policy); });
    write_file(dir, "objective.csv", manifest, [&](std::ostream& o) {
        o << "objective,basis_size\n" << spectral::format_double(run.result.objective) << ',' << run.report.basis_size
          << '\n';
    });
    write_file(dir, "solution.txt", manifest,
               [&](std::ostream& o) { spectral::write_solution(o, policy, run.result.objective); });
    manifest.note("objective", run.result.objective);
    manifest.write(dir);
    std::cout << "optimal objective " << spectral::format_double(run.result.objective) << " (|A| = "
              << run.report.basis_size << ", " << run.result.diagnostics.iterations << " iterations)\n";
    return 0;
}

int cmd_validate(const RunSettings& s) {
    const auto dir = prepare_output(s.output);
    Manifest manifest(s);
    const auto model = load_input(s);
    if (s.solution.empty()) throw spectral::InputError("--solution is required");
    std::ifstream in(s.solution);
    if (!in) throw spectral::InputError("cannot read solution file '" + s.solution + "'");
    const auto stored = spectral::read_solution(in);
    const auto policy = spectral::restore_policy(model, stored);

    spectral::ValidationSettings v;
    v.samples = s.mc_samples;
    v.seed = s.seed;
    if (s.epsilon) v.epsilon = *s.epsilon;
    const auto t0 = std::chrono::steady_clock::now();
    const auto report = spectral::estimate_violations(policy, model, v);
    const auto cost = spectral::estimate_cost(policy, model, s.mc_samples, s.seed);
    const auto eq = spectral::max_equality_residual(policy, model, std::min<std::size_t>(s.mc_samples, 1000), s.seed);
    manifest.timing("validate_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());

    write_file(dir, "violations.csv", manifest, [&](std::ostream& o) { spectral::write_violation_csv(o, report); });
    write_file(dir, "cost.csv", manifest, [&](std::ostream& o) {
        o << "samples,mean,stddev,standard_error,ci_low,ci_high,solved_objective\n"
          << cost.samples << ',' << spectral::format_double(cost.mean) << ',' << spectral::format_double(cost.stddev)
          << ',' << spectral::format_double(cost.standard_error) << ',' << spectral::format_double(cost.ci_low) << ','
          << spectral::format_double(cost.ci_high) << ',' << spectral::format_double(stored.objective) << '\n';
    });
    write_file(dir, "equality_residual.csv", manifest, [&](std::ostream& o) {
        o << "samples,max_abs,worst_constraint\n"
          << eq.samples << ',' << spectral::format_double(eq.max_abs) << ",\"" << eq.worst_constraint << "\"\n";
    });
    const std::string summary = spectral::violation_summary(report);
    write_file(dir, "summary.txt", manifest, [&](std::ostream& o) { o << summary << '\n'; });
    manifest.note("above_target", report.above_target);
    manifest.note("max_violation", report.max_probability);
    manifest.write(dir);
    std::cout << summary << '\n';
    return 0;
}

int cmd_benchmark(const RunSettings& s) {
    const auto dir = prepare_output(s.output);
    Manifest manifest(s);
    if (s.scenarios.empty()) throw spectral::InputError("--scenarios needs at least one value");
    if (s.repetitions == 0) throw spectral::InputError("--repetitions must be positive");
    for (auto n : s.scenarios) {
        if (n == 0) throw spectral::InputError("scenario counts must be positive");
    }
    const auto model = load_input(s);
    const auto pce = spectral::solve_pce(model, pce_settings(s));
    manifest.timing("pce_seconds", pce.seconds());
    if (!pce.ok()) {
        manifest.write(dir);
        throw SolverFailure("intrusive solve returned " + std::string(spectral::to_string(pce.result.status)));
    }
    const std::vector<double> first(pce.result.x.begin(),
                                    pce.result.x.begin() +
                                        static_cast<std::ptrdiff_t>(model.first_stage_scalars().size()));
    const auto runs = spectral::run_sa_grid(model, s.scenarios, s.repetitions, s.seed, s.solver,
                                            spectral::configured_threads());
    const auto weights = weights_for(s);

    write_file(dir, "sa_runs.csv", manifest, [&](std::ostream& o) { spectral::write_runs_csv(o, runs, s.timing); });

    std::ostringstream acc;
    acc << "method,scenarios,runs,objective,gap_relative";
    for (const auto& v : model.variables()) {
        if (v.stage == spectral::Stage::first) acc << ",rmse_" << v.name;
    }
    acc << ",coverage,mean_iterations";
    if (s.timing) acc << ",mean_seconds";
    acc << '\n';
    acc << "pce,,1," << spectral::format_double(pce.result.objective) << ",0";
    for (const auto& v : model.variables()) {
        if (v.stage == spectral::Stage::first) acc << ",0";
    }
    acc << ",1," << pce.result.diagnostics.iterations;
    if (s.timing) acc << ',' << spectral::format_double(pce.seconds());
    acc << '\n';

    std::ostringstream env;
    env << "scenarios,decision,step,weight,pce,sa_mean,sa_min,sa_max,inside\n";
    bool any_failed = false;
    for (std::size_t g = 0; g < s.scenarios.size(); ++g) {
        std::vector<spectral::SaRun> group;
        double iters = 0.0;
        double seconds = 0.0;
        for (std::size_t r = 0; r < s.repetitions; ++r) {
            const auto& run = runs[g * s.repetitions + r];
            if (!run.ok()) {
                any_failed = true;
                continue;
            }
            group.push_back(run);
            iters += run.iterations;
            seconds += run.seconds();
        }
        if (group.empty()) continue;
        const auto cmp = spectral::compare(model, pce.result.objective, first, group, weights);
        const double n = static_cast<double>(group.size());
        acc << "sa," << s.scenarios[g] << ',' << group.size() << ',' << spectral::format_double(cmp.reference_objective)
            << ',' << spectral::format_double(cmp.gap_relative);
        for (const auto& v : model.variables()) {
            if (v.stage != spectral::Stage::first) continue;
            const auto it = cmp.rmse.find(v.name);
            acc << ',' << spectral::format_double(it == cmp.rmse.end() ? 0.0 : it->second);
        }
        acc << ',' << spectral::format_double(cmp.coverage) << ',' << spectral::format_double(iters / n);
        if (s.timing) acc << ',' << spectral::format_double(seconds / n);
        acc << '\n';
        for (const auto& row : cmp.rows) {
            env << s.scenarios[g] << ',' << row.decision << ',' << row.step << ',' << spectral::format_double(row.weight)
                << ',' << spectral::format_double(row.candidate) << ',' << spectral::format_double(row.reference) << ','
                << spectral::format_double(row.envelope_min) << ',' << spectral::format_double(row.envelope_max)
                << ',' << (row.inside ? 1 : 0) << '\n';
        }
        if (g + 1 == s.scenarios.size()) {
            write_file(dir, "comparison.csv", manifest,
                       [&](std::ostream& o) { spectral::write_comparison_csv(o, cmp); });
        }
    }
    write_file(dir, "accuracy_runtime.csv", manifest, [&](std::ostream& o) { o << acc.str(); });
    write_file(dir, "envelopes.csv", manifest, [&](std::ostream& o) { o << env.str(); });
    double total = 0.0;
    for (const auto& r : runs) total += r.seconds();
    manifest.timing("sa_seconds_total", total);
    manifest.note("pce_objective", pce.result.objective);
    manifest.write(dir);
    std::cout << "intrusive objective " << spectral::format_double(pce.result.objective) << "; " << runs.size()
              << " scenario runs written to " << dir.string() << '\n';
    if (any_failed) throw SolverFailure("at least one scenario run did not reach optimality (see sa_runs.csv)");
    return 0;
}

int cmd_instance(const RunSettings& s) {
    spectral::vpp::InstanceConfig config;
    if (s.instance == "desk") {
        config = spectral::vpp::desk_instance();
    } else if (s.instance == "micro") {
        config = spectral::vpp::micro_arbitrage();
    } else {
        throw spectral::InputError("unknown instance '" + s.instance + "' (expected desk or micro)");
    }
    if (s.output.empty()) throw spectral::InputError("--out is required");
    std::ofstream f(s.output, std::ios::binary);
    if (!f) throw spectral::InputError("cannot write '" + s.output + "'");
    f << spectral::vpp::to_json(config);
    return 0;
}

int dispatch(const RunSettings& s) {
    if (s.command == "project") return cmd_project(s);
    if (s.command == "solve") return cmd_solve(s);
    if (s.command == "validate") return cmd_validate(s);
    if (s.command == "benchmark") return cmd_benchmark(s);
    if (s.command == "instance") return cmd_instance(s);
    throw spectral::InputError("unknown command '" + s.command + "'");
}

int report_error(const char* kind, const std::string& message, int code) {
    Json j;
    j["error"] = {{"kind", kind}, {"message", message}, {"exit_code", code}};
    std::cerr << j.dump() << '\n';
    return code;
}

void add_basis_options(CLI::App* cmd, RunSettings& s) {
    cmd->add_option("--degree", s.degree, "Total polynomial degree N^d")->check(CLI::NonNegativeNumber);
    cmd->add_option("--lambda", s.lambda, "Safety factor of the chance constraints");
    cmd->add_option("--epsilon", s.epsilon, "Target violation probability; overrides --lambda")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_flag("--cantelli", s.cantelli, "Distribution-free safety factor sqrt((1-eps)/eps)");
    cmd->add_flag("--truncate", s.truncate, "Truncate products that exceed the basis degree");
    cmd->add_option("--max-iterations", s.solver.max_iterations, "Interior-point iteration limit");
}

} // namespace

int main(int argc, char** argv) {
    RunSettings s;
    std::string manifest_path;
    CLI::App app{"Intrusive polynomial-chaos solver for two-stage stochastic programs"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    auto* project = app.add_subcommand("project", "Project a model onto the basis and dump the conic program");
    project->add_option("model", s.model, "Model file (.json instance config or model text)")->required();
    project->add_option("--out", s.output, "Output directory")->required();
    add_basis_options(project, s);

    auto* solve = app.add_subcommand("solve", "Project and solve; write first-stage and coefficient tables");
    solve->add_option("model", s.model, "Model file")->required();
    solve->add_option("--out", s.output, "Output directory")->required();
    add_basis_options(solve, s);

    auto* validate = app.add_subcommand("validate", "Monte Carlo violation and cost report of a solved policy");
    validate->add_option("model", s.model, "Model file")->required();
    validate->add_option("--solution", s.solution, "solution.txt written by solve")->required();
    validate->add_option("--mc-samples", s.mc_samples, "Monte Carlo sample count")->check(CLI::PositiveNumber);
    validate->add_option("--seed", s.seed, "Monte Carlo seed");
    validate->add_option("--epsilon", s.epsilon, "Target violation probability")->check(CLI::Range(0.0, 1.0));
    validate->add_option("--out", s.output, "Output directory")->required();

    auto* bench = app.add_subcommand("benchmark", "Scenario-approximation runs compared against the intrusive solve");
    bench->add_option("model", s.model, "Model file")->required();
    bench->add_option("--scenarios", s.scenarios, "Scenario counts, comma separated")->delimiter(',');
    bench->add_option("--repetitions", s.repetitions, "Runs per scenario count")->check(CLI::PositiveNumber);
    bench->add_option("--seed", s.seed, "Base seed; repetition r uses seed + r");
    bench->add_flag("--timing", s.timing, "Add wall times to the CSV outputs (not byte-reproducible)");
    bench->add_option("--out", s.output, "Output directory")->required();
    add_basis_options(bench, s);

    auto* instance = app.add_subcommand("instance", "Write a bundled instance configuration");
    instance->add_option("name", s.instance, "desk or micro");
    instance->add_option("--out", s.output, "Output file")->required();

    auto* replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
    replay->add_option("manifest", manifest_path, "manifest.json")->required();
    replay->add_option("--out", s.output, "Output directory (default: the recorded one)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error("usage", e.what(), 1);
    }

    try {
        if (replay->parsed()) {
            std::ifstream f(manifest_path);
            if (!f) throw spectral::InputError("cannot read manifest '" + manifest_path + "'");
            Json j;
            try {
                j = Json::parse(f);
            } catch (const nlohmann::json::exception& e) {
                throw spectral::InputError(std::string("manifest: ") + e.what());
            }
            if (!j.contains("settings")) throw spectral::InputError("manifest has no settings");
            const std::string out = s.output;
            s = settings_from_json(j.at("settings"));
            if (!out.empty()) s.output = out;
        } else {
            s.command = app.get_subcommands().front()->get_name();
        }
        return dispatch(s);
    } catch (const SolverFailure& e) {
        return report_error("solver", e.what(), 2);
    } catch (const spectral::InputError& e) {
        return report_error("input", e.what(), 1);
    } catch (const spectral::NumericalError& e) {
        return report_error("numerical", e.what(), 2);
    } catch (const std::exception& e) {
        return report_error("internal", e.what(), 3);
    }
}
