#include "spectral/pipeline.hpp"

#include "spectral/error.hpp"
#include "spectral/model_io.hpp"
#include "spectral/text.hpp"
#include "spectral/vpp.hpp"

#include <chrono>
#include <istream>
#include <ostream>

namespace spectral {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string next_line(std::istream& in, const char* what) {
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) return line;
    }
    throw InputError(std::string("solution file ends before ") + what);
}

std::vector<std::string_view> expect(const std::string& line, std::string_view keyword, std::size_t tokens) {
    auto t = split_tokens(line);
    if (t.empty() || t[0] != keyword || t.size() != tokens) {
        throw InputError("solution file: expected '" + std::string(keyword) + "' line, got '" + line + "'");
    }
    return t;
}

std::size_t parse_count(std::string_view token, std::string_view what) {
    const long long v = parse_integer(token, what);
    if (v < 0) throw InputError("solution file: negative " + std::string(what));
    return static_cast<std::size_t>(v);
}

} // namespace

PceRun solve_pce(const StochModel& model, const PceSettings& settings) {
    PceRun run;
    const auto t0 = std::chrono::steady_clock::now();
    run.basis = make_basis(model, settings.degree);
    run.program.emplace(project_model(model, run.basis, settings.projection));
    run.report = run.program->report();
    const auto problem = assemble(*run.program);
    run.project_seconds = seconds_since(t0);

    const auto t1 = std::chrono::steady_clock::now();
    run.result = solve(problem, settings.solver);
    run.solve_seconds = seconds_since(t1);
    if (run.result.optimal()) {
        run.policy.emplace(RecoursePolicy::from_solution(model, *run.program, run.result.x));
    }
    return run;
}

StochModel load_model_or_instance(const std::filesystem::path& path) {
    if (path.extension() == ".json") return vpp::build_instance(vpp::load_config(path));
    return load_model(path);
}

void write_solution(std::ostream& out, const RecoursePolicy& policy, double objective) {
    const auto& basis = policy.basis();
    const std::size_t size = basis.size();
    const auto& coef = policy.coefficients();
    const std::size_t recourse = size ? coef.size() / size : 0;
    out << "spectral-solution 1\n";
    out << "degree " << basis.max_degree() << '\n';
    out << "objective " << format_double(objective) << '\n';
    out << "first " << policy.first_stage().size() << '\n';
    for (double v : policy.first_stage()) out << format_double(v) << '\n';
    out << "coefficients " << recourse << ' ' << size << '\n';
    for (std::size_t r = 0; r < recourse; ++r) {
        for (std::size_t k = 0; k < size; ++k) {
            if (k) out << ' ';
            out << format_double(coef[r * size + k]);
        }
        out << '\n';
    }
    out << "end\n";
}

StoredSolution read_solution(std::istream& in) {
    StoredSolution s;
    std::string line = next_line(in, "header");
    auto t = expect(line, "spectral-solution", 2);
    if (t[1] != "1") throw InputError("solution file: unsupported version '" + std::string(t[1]) + "'");
    line = next_line(in, "degree");
    t = expect(line, "degree", 2);
    s.degree = static_cast<int>(parse_integer(t[1], "degree"));
    line = next_line(in, "objective");
    t = expect(line, "objective", 2);
    s.objective = parse_double(t[1], "objective");
    line = next_line(in, "first-stage values");
    t = expect(line, "first", 2);
    const std::size_t first = parse_count(t[1], "first-stage count");
    for (std::size_t i = 0; i < first; ++i) {
        line = next_line(in, "first-stage values");
        t = split_tokens(line);
        if (t.size() != 1) throw InputError("solution file: expected one first-stage value, got '" + line + "'");
        s.first_stage.push_back(parse_double(t[0], "first-stage value"));
    }
    line = next_line(in, "coefficients");
    t = expect(line, "coefficients", 3);
    const std::size_t rows = parse_count(t[1], "recourse count");
    const std::size_t cols = parse_count(t[2], "basis size");
    for (std::size_t r = 0; r < rows; ++r) {
        line = next_line(in, "coefficient rows");
        t = split_tokens(line);
        if (t.size() != cols) {
            throw InputError("solution file: coefficient row " + std::to_string(r) + " has " +
                             std::to_string(t.size()) + " values, expected " + std::to_string(cols));
        }
        for (auto tok : t) s.coefficients.push_back(parse_double(tok, "coefficient"));
    }
    line = next_line(in, "end");
    expect(line, "end", 1);
    return s;
}

RecoursePolicy restore_policy(const StochModel& model, const StoredSolution& solution) {
    if (solution.degree < 0) throw InputError("solution file: negative degree");
    auto basis = make_basis(model, solution.degree);
    if (solution.first_stage.size() != model.first_stage_scalars().size()) {
        throw InputError("solution has " + std::to_string(solution.first_stage.size()) +
                         " first-stage values, the model has " +
                         std::to_string(model.first_stage_scalars().size()));
    }
    const std::size_t expected = model.second_stage_scalars().size() * basis->size();
    if (solution.coefficients.size() != expected) {
        throw InputError("solution has " + std::to_string(solution.coefficients.size()) +
                         " recourse coefficients, the model needs " + std::to_string(expected));
    }
    return RecoursePolicy(model, std::move(basis), solution.first_stage, solution.coefficients);
}

void write_first_stage_csv(std::ostream& out, const StochModel& model, const std::vector<double>& first_stage) {
    out << "name,step,value\n";
    const auto& scalars = model.first_stage_scalars();
    for (std::size_t i = 0; i < scalars.size() && i < first_stage.size(); ++i) {
        const auto& block = model.block_of(scalars[i]);
        out << block.name << ',' << (scalars[i] - block.offset) << ',' << format_double(first_stage[i]) << '\n';
    }
}

void write_coefficients_csv(std::ostream& out, const StochModel& model, const RecoursePolicy& policy) {
    out << "variable,mode,multi_index,value\n";
    const auto& basis = policy.basis();
    const auto& scalars = model.second_stage_scalars();
    for (std::size_t r = 0; r < scalars.size(); ++r) {
        const auto coef = policy.coefficients_of(r);
        const std::string name = model.scalar_name(scalars[r]);
        for (std::size_t k = 0; k < basis.size(); ++k) {
            std::string idx;
            for (int d : basis.index(k)) idx += (idx.empty() ? "" : " ") + std::to_string(d);
            out << '"' << name << "\"," << k << ',' << idx << ',' << format_double(coef[k]) << '\n';
        }
    }
}

} // namespace spectral
