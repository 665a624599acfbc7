#include "spectral/model_io.hpp"

#include "spectral/error.hpp"
#include "spectral/text.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace spectral {

namespace {

constexpr std::string_view kMagic = "spectral-model";
constexpr int kVersion = 1;

void write_terms(std::ostream& out, const StochModel& model, const std::vector<Term>& terms) {
    for (const auto& t : terms) out << ' ' << model.describe(t);
}

[[noreturn]] void fail(std::size_t line, const std::string& message) {
    throw InputError("model file line " + std::to_string(line) + ": " + message);
}

ScalarVar parse_variable_ref(const StochModel& model, std::string_view token, std::size_t line) {
    const auto bracket = token.find('[');
    const std::string name(token.substr(0, bracket));
    auto block = model.find_variable(name);
    if (!block) fail(line, "unknown symbol '" + std::string(token) + "'");
    const auto& var = model.variables()[block->id];
    std::vector<std::size_t> idx;
    if (bracket != std::string_view::npos) {
        if (token.back() != ']') fail(line, "malformed index in '" + std::string(token) + "'");
        auto inner = token.substr(bracket + 1, token.size() - bracket - 2);
        std::size_t start = 0;
        while (start <= inner.size()) {
            auto comma = inner.find(',', start);
            if (comma == std::string_view::npos) comma = inner.size();
            const auto v = parse_integer(inner.substr(start, comma - start), "index");
            if (v < 0) fail(line, "negative index in '" + std::string(token) + "'");
            idx.push_back(static_cast<std::size_t>(v));
            start = comma + 1;
        }
    }
    if (idx.size() != var.shape.size()) {
        fail(line, "'" + std::string(token) + "' needs " + std::to_string(var.shape.size()) + " indices");
    }
    std::size_t flat = 0;
    for (std::size_t d = 0; d < idx.size(); ++d) {
        if (idx[d] >= var.shape[d]) fail(line, "index out of range in '" + std::string(token) + "'");
        flat = flat * var.shape[d] + idx[d];
    }
    return (*block)[flat];
}

Expression parse_terms(const StochModel& model, const std::vector<std::string_view>& tokens, std::size_t first,
                       std::size_t line) {
    Expression expr;
    for (std::size_t i = first; i < tokens.size(); ++i) {
        const auto tok = tokens[i];
        std::vector<std::string_view> factors;
        std::size_t start = 0;
        while (true) {
            auto star = tok.find('*', start);
            factors.push_back(tok.substr(start, star == std::string_view::npos ? std::string_view::npos : star - start));
            if (star == std::string_view::npos) break;
            start = star + 1;
        }
        Expression term(parse_double(factors[0], "coefficient"));
        for (std::size_t f = 1; f < factors.size(); ++f) {
            if (auto g = model.find_germ(std::string(factors[f]))) {
                term = term * Expression(*g);
            } else {
                term = term * Expression(parse_variable_ref(model, factors[f], line));
            }
        }
        expr += term;
    }
    return expr;
}

} // namespace

void write_model(std::ostream& out, const StochModel& model) {
    out << kMagic << ' ' << kVersion << '\n';
    for (const auto& g : model.germs()) {
        out << "germ " << g.name << ' ' << to_string(g.distribution.kind());
        for (double p : g.distribution.parameters()) out << ' ' << format_double(p);
        if (g.declared_unused) out << " unused";
        out << '\n';
    }
    for (const auto& v : model.variables()) {
        out << "var " << v.name << ' ' << to_string(v.stage);
        for (auto d : v.shape) out << ' ' << d;
        out << '\n';
    }
    for (const auto& c : model.constraints()) {
        out << to_string(c.sense) << ' ' << c.name;
        if (c.epsilon) out << " eps=" << format_double(*c.epsilon);
        out << " :";
        write_terms(out, model, c.terms);
        out << '\n';
    }
    if (model.has_objective()) {
        out << "objective :";
        write_terms(out, model, model.objective());
        out << '\n';
    }
    out << "end\n";
}

std::string write_model(const StochModel& model) {
    std::ostringstream out;
    write_model(out, model);
    return out.str();
}

StochModel read_model(std::istream& in) {
    StochModel model;
    std::string raw;
    std::size_t line = 0;
    bool header = false;
    bool ended = false;
    while (std::getline(in, raw)) {
        ++line;
        const auto tokens = split_tokens(raw);
        if (tokens.empty() || tokens[0].front() == '#') continue;
        if (ended) fail(line, "content after 'end'");
        if (!header) {
            if (tokens.size() != 2 || tokens[0] != kMagic) fail(line, "missing 'spectral-model' header");
            if (parse_integer(tokens[1], "version") != kVersion) {
                fail(line, "unsupported format version " + std::string(tokens[1]));
            }
            header = true;
            continue;
        }
        const auto kw = tokens[0];
        try {
            if (kw == "germ") {
                if (tokens.size() < 3) fail(line, "germ needs a name and a distribution");
                std::size_t n = tokens.size();
                bool unused = tokens.back() == "unused";
                if (unused) --n;
                std::vector<double> params;
                for (std::size_t i = 3; i < n; ++i) params.push_back(parse_double(tokens[i], "parameter"));
                model.add_germ(std::string(tokens[1]), Distribution::from_parameters(tokens[2], params), unused);
            } else if (kw == "var") {
                if (tokens.size() < 3) fail(line, "var needs a name and a stage");
                Stage stage;
                if (tokens[2] == "first") {
                    stage = Stage::first;
                } else if (tokens[2] == "second") {
                    stage = Stage::second;
                } else {
                    fail(line, "unknown stage '" + std::string(tokens[2]) + "'");
                }
                std::vector<std::size_t> shape;
                for (std::size_t i = 3; i < tokens.size(); ++i) {
                    const auto d = parse_integer(tokens[i], "dimension");
                    if (d <= 0) fail(line, "dimensions must be positive");
                    shape.push_back(static_cast<std::size_t>(d));
                }
                model.add_variable(std::string(tokens[1]), stage, std::move(shape));
            } else if (kw == "eq" || kw == "le") {
                if (tokens.size() < 3) fail(line, "constraint needs a name and ':'");
                std::size_t pos = 2;
                std::optional<double> eps;
                if (tokens[pos].starts_with("eps=")) {
                    eps = parse_double(tokens[pos].substr(4), "violation probability");
                    ++pos;
                }
                if (pos >= tokens.size() || tokens[pos] != ":") fail(line, "expected ':' before the terms");
                auto expr = parse_terms(model, tokens, pos + 1, line);
                model.add_constraint(expr, kw == "eq" ? Sense::equal : Sense::less_equal, eps, std::string(tokens[1]));
            } else if (kw == "objective") {
                if (tokens.size() < 2 || tokens[1] != ":") fail(line, "expected 'objective :'");
                model.set_objective(parse_terms(model, tokens, 2, line));
            } else if (kw == "end") {
                ended = true;
            } else {
                fail(line, "unknown keyword '" + std::string(kw) + "'");
            }
        } catch (const InputError& e) {
            const std::string what = e.what();
            if (what.starts_with("model file line")) throw;
            fail(line, what);
        }
    }
    if (!header) throw InputError("model file is empty");
    if (!ended) throw InputError("model file ends without 'end'");
    model.finalize();
    return model;
}

StochModel read_model_string(const std::string& text) {
    std::istringstream in(text);
    return read_model(in);
}

void save_model(const std::filesystem::path& path, const StochModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    write_model(out, model);
    if (!out) throw InputError("failed writing " + path.string());
}

StochModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    return read_model(in);
}

} // namespace spectral
