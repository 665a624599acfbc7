#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int exit_code = -1;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch() {
    const auto dir = fs::temp_directory_path() / ("spectral_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir;
}

Outcome run(const std::string& args) {
    const auto err = scratch() / "stderr.txt";
    const std::string cmd = std::string(SPECTRAL_CLI) + " " + args + " >/dev/null 2>" + err.string();
    const int status = std::system(cmd.c_str());
    Outcome o;
    o.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    o.err = slurp(err);
    return o;
}

} // namespace

TEST(Cli, SolveValidateAndReproducibleOutputs) {
    const auto dir = scratch();
    const auto config = dir / "micro.json";
    ASSERT_EQ(run("instance micro --out " + config.string()).exit_code, 0);
    ASSERT_EQ(run("solve " + config.string() + " --out " + (dir / "a").string()).exit_code, 0);
    ASSERT_EQ(run("solve " + config.string() + " --out " + (dir / "b").string()).exit_code, 0);
    for (const char* f : {"first_stage.csv", "coefficients.csv", "objective.csv", "solution.txt"}) {
        const auto a = slurp(dir / "a" / f);
        EXPECT_FALSE(a.empty()) << f;
        EXPECT_EQ(a, slurp(dir / "b" / f)) << f;
    }
    std::istringstream objective(slurp(dir / "a" / "objective.csv"));
    std::string header, row;
    std::getline(objective, header);
    std::getline(objective, row);
    EXPECT_EQ(header, "objective,basis_size");
    EXPECT_NEAR(std::stod(row.substr(0, row.find(','))), -61.0, 1e-5);
    const auto v = run("validate " + config.string() + " --solution " + (dir / "a" / "solution.txt").string() +
                       " --mc-samples 200 --out " + (dir / "v").string());
    EXPECT_EQ(v.exit_code, 0) << v.err;
    EXPECT_TRUE(fs::exists(dir / "v" / "violations.csv"));
    EXPECT_TRUE(fs::exists(dir / "v" / "manifest.json"));
}

TEST(Cli, MissingInputIsAnInputError) {
    const auto o = run("solve /nonexistent/model.txt --out " + (scratch() / "x").string());
    EXPECT_EQ(o.exit_code, 1);
    EXPECT_NE(o.err.find("\"error\""), std::string::npos);
    EXPECT_NE(o.err.find("\"exit_code\":1"), std::string::npos);
}

TEST(Cli, MalformedModelNamesTheProblem) {
    const auto dir = scratch();
    {
        std::ofstream f(dir / "bad.txt");
        f << "spectral-model 1\ngerm g weird 0 1\nend\n";
    }
    const auto o = run("project " + (dir / "bad.txt").string() + " --out " + (dir / "p").string());
    EXPECT_EQ(o.exit_code, 1);
    EXPECT_NE(o.err.find("weird"), std::string::npos);
}

TEST(Cli, UsageErrorsExitWithOne) {
    EXPECT_EQ(run("frobnicate").exit_code, 1);
    EXPECT_EQ(run("solve").exit_code, 1);
}

TEST(Cli, MismatchedSolutionIsRejected) {
    const auto dir = scratch();
    const auto config = dir / "micro2.json";
    ASSERT_EQ(run("instance micro --out " + config.string()).exit_code, 0);
    {
        std::ofstream f(dir / "short.txt");
        f << "spectral-solution 1\ndegree 1\nobjective 0\nfirst 1\n0\ncoefficients 0 1\nend\n";
    }
    const auto o = run("validate " + config.string() + " --solution " + (dir / "short.txt").string() +
                       " --out " + (dir / "w").string());
    EXPECT_EQ(o.exit_code, 1);
    EXPECT_NE(o.err.find("first-stage"), std::string::npos);
}
