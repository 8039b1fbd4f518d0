// End-to-end checks of the command-line surface, driven through the built
// binary. MSPEU_CLI_PATH is injected by the build.

#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mspeu/milp/lp_format.hpp"
#include "mspeu/milp/model.hpp"
#include "mspeu/milp/solver.hpp"
#include "mspeu/problem_io.hpp"
#include "support/random_instances.hpp"

namespace fs = std::filesystem;

namespace {

std::string cli() { return MSPEU_CLI_PATH; }

int run(const std::string& args) {
    const std::string cmd = cli() + " " + args + " > cli_test_stdout.txt 2> cli_test_stderr.txt";
    return std::system(cmd.c_str());
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::path("cli_test_tmp") / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

} // namespace

TEST_CASE("unknown flags exit 1 with usage on stderr") {
    const int rc = run("solve --no-such-flag");
    CHECK(WEXITSTATUS(rc) == 1);
    CHECK(slurp("cli_test_stderr.txt").size() > 0);
}

TEST_CASE("generate and solve round trip through files") {
    TempDir dir("roundtrip");
    REQUIRE(WEXITSTATUS(run("generate --teams 1 --compositions 2 --samples 1 --stages 3 --seed 5 "
                            "--out " + dir.str())) == 0);
    const std::string inst = dir.str() + "/t01_I2_S1.json";
    REQUIRE(fs::exists(inst));

    REQUIRE(WEXITSTATUS(run("bigm --method ftcp-fast --in " + inst + " --out " + dir.str() +
                            "/table.json")) == 0);

    REQUIRE(WEXITSTATUS(run("solve --method backward --in " + inst + " --bigm " + dir.str() +
                            "/table.json --out " + dir.str() + "/back.json")) == 0);
    const std::string back_out = slurp("cli_test_stdout.txt");
    REQUIRE(WEXITSTATUS(run("solve --method monolithic --in " + inst + " --bigm " + dir.str() +
                            "/table.json --out " + dir.str() + "/mono.json")) == 0);
    const std::string mono_out = slurp("cli_test_stdout.txt");

    auto objective_of = [](const std::string& text) {
        auto pos = text.find("objective=");
        REQUIRE(pos != std::string::npos);
        return std::stod(text.substr(pos + 10));
    };
    CHECK(objective_of(back_out) == doctest::Approx(objective_of(mono_out)).epsilon(1e-6));
}

TEST_CASE("deterministic outputs for fixed seeds") {
    TempDir a("det_a"), b("det_b");
    const std::string gen_args = "generate --teams 1 --compositions 2 --samples 2 --stages 3 "
                                 "--seed 11 --out ";
    REQUIRE(WEXITSTATUS(run(gen_args + a.str())) == 0);
    REQUIRE(WEXITSTATUS(run(gen_args + b.str())) == 0);
    CHECK(slurp(a.str() + "/t01_I2_S2.json") == slurp(b.str() + "/t01_I2_S2.json"));

    REQUIRE(WEXITSTATUS(run("bench --in " + a.str() + " --out " + a.str() +
                            "/r.csv --timing-mode none")) == 0);
    REQUIRE(WEXITSTATUS(run("bench --in " + b.str() + " --out " + b.str() +
                            "/r.csv --timing-mode none")) == 0);
    CHECK(slurp(a.str() + "/r.csv") == slurp(b.str() + "/r.csv"));
}

TEST_CASE("bench on an empty directory writes a bare header and exits 0") {
    TempDir dir("empty");
    REQUIRE(WEXITSTATUS(run("bench --in " + dir.str() + " --out " + dir.str() + "/r.csv")) == 0);
    const std::string text = slurp(dir.str() + "/r.csv");
    CHECK(text.rfind("case,", 0) == 0);
    CHECK(text.find('\n') == text.size() - 1);
}

TEST_CASE("export then import preserves model counts") {
    TempDir dir("export");
    REQUIRE(WEXITSTATUS(run("generate --teams 1 --compositions 2 --samples 1 --stages 2 --seed 3 "
                            "--out " + dir.str())) == 0);
    REQUIRE(WEXITSTATUS(run("export --in " + dir.str() + "/t01_I2_S1.json --format lp --out " +
                            dir.str() + "/m.lp")) == 0);
    const std::string report = slurp("cli_test_stdout.txt");
    auto model = mspeu::milp::import_lp(dir.str() + "/m.lp");
    std::ostringstream expect;
    expect << "exported vars=" << model.counts().vars << " bins=" << model.counts().bins
           << " cons=" << model.counts().cons;
    CHECK(report.find(expect.str()) != std::string::npos);
}

TEST_CASE("generic problem files solve through the CLI") {
    TempDir dir("generic");
    testutil::Rng rng(303);
    testutil::GenericSpec spec;
    spec.stages = 3;
    spec.dists = 2;
    spec.samples = 1;
    auto p = testutil::random_problem(rng, spec);
    const std::string path = dir.str() + "/problem.json";
    mspeu::save_problem(p, path);
    REQUIRE(WEXITSTATUS(run("solve --method backward --in " + path + " --phi-out " + dir.str() +
                            "/phi.json")) == 0);
    const std::string back_out = slurp("cli_test_stdout.txt");
    CHECK(back_out.find("status=optimal") != std::string::npos);
    CHECK(slurp(dir.str() + "/phi.json").find("phi-table/1") != std::string::npos);
    REQUIRE(WEXITSTATUS(run("solve --method monolithic --in " + path)) == 0);
    const std::string mono_out = slurp("cli_test_stdout.txt");
    auto objective_of = [](const std::string& text) {
        auto pos = text.find("objective=");
        REQUIRE(pos != std::string::npos);
        return std::stod(text.substr(pos + 10));
    };
    CHECK(objective_of(back_out) == doctest::Approx(objective_of(mono_out)).epsilon(1e-6));
}

TEST_CASE("four-stage generation reports the reference size counts in bench") {
    TempDir dir("fullscale");
    REQUIRE(WEXITSTATUS(run("generate --compositions 3 --samples 4 --stages 4 --seed 7 --out " +
                            dir.str())) == 0);
    REQUIRE(WEXITSTATUS(run("bench --in " + dir.str() + " --out " + dir.str() +
                            "/results.csv --timing-mode none")) == 0);
    const std::string csv = slurp(dir.str() + "/results.csv");
    // Table-convention counts for (|I|, S) = (3, 4); the monolithic model is
    // beyond the internal engine (capacity), the backward method solves it.
    CHECK(csv.find("t01_I3_S4,3,4,24505,16965,22620,") != std::string::npos);
    CHECK(csv.find("capacity") != std::string::npos);
    CHECK(csv.find("optimal") != std::string::npos);
}

TEST_CASE("external solver routing through the reference adapter") {
    using namespace mspeu::milp;
    MilpModel m;
    int x = m.add_var("x", 0.0, 3.7, true);
    int y = m.add_var("y", 0.0, 2.0, false);
    m.set_obj(x, 2.0);
    m.set_obj(y, 1.0);
    m.set_sense(Sense::Max);
    m.add_row("r", {{x, 1.0}, {y, 1.0}}, Rel::Le, 4.5);
    SolveParams internal;
    auto direct = solve(m, internal);
    SolveParams routed;
    routed.solver_override = "external:" + cli() + " solve-lp";
    auto external = solve(m, routed);
    REQUIRE(direct.status == Status::Optimal);
    REQUIRE(external.status == Status::Optimal);
    CHECK(external.objective == doctest::Approx(direct.objective));
    CHECK(external.values == direct.values);
}
