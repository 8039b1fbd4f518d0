#include "doctest.h"

#include <cmath>

#include "mspeu/errors.hpp"
#include "mspeu/milp/solver.hpp"
#include "mspeu/mspeu_model.hpp"
#include "support/random_instances.hpp"

using namespace mspeu;

namespace {

// T=2 tree: root with two distributions, one child each; every node has one
// x variable and one linking row; leaves carry one distribution.
MspeuProblem tiny_two_stage(double child_reward_a, double child_reward_b) {
    MspeuProblem p;
    p.tree.num_stages = 2;
    p.tree.stage = {1, 2, 2};
    p.tree.parent = {-1, 0, 0};
    p.tree.prob = {1.0, 1.0, 1.0};
    p.tree.children = {{{1}, {2}}, {{}}, {{}}};
    p.c_is_zero = true;
    p.blocks.resize(3);
    for (NodeId n = 0; n < 3; ++n) {
        NodeBlock& b = p.blocks[n];
        b.r = {n == 1 ? child_reward_a : (n == 2 ? child_reward_b : 0.0)};
        b.domains = {{0.0, 1.0, false}};
        const int nd = p.tree.num_dists(n);
        b.q.assign(nd, 0.0);
        b.A = {{1.0}};
        b.B = {std::vector<double>(nd, 0.0)};
        b.h = {1.0}; // forces x = 1
        if (!p.tree.is_leaf(n)) {
            b.C_to_children = {{0.0}};
            b.D_to_children = {std::vector<double>(nd, 0.0)};
        } else {
            b.theta_terminal = 0.0;
        }
    }
    return p;
}

BigMTable crude_bigm(const MspeuProblem& p) { return testutil::interval_bigm(p); }

} // namespace

TEST_CASE("hand-counted model size for the minimal two-stage problem") {
    MspeuProblem p = tiny_two_stage(3.0, 4.5);
    auto model = build_node_formulation(p, crude_bigm(p));
    // 3 x + 4 delta + 3 theta variables; 3 choice + 3 linking + 2 theta bound
    // + 2 leaf fixing rows.
    CHECK(model.num_vars() == 10);
    CHECK(model.num_rows() == 10);
}

TEST_CASE("two-branch expectation: the better distribution wins") {
    MspeuProblem p = tiny_two_stage(3.0, 4.5);
    auto model = build_node_formulation(p, crude_bigm(p));
    auto sol = milp::solve(model);
    REQUIRE(sol.status == milp::Status::Optimal);
    CHECK(sol.objective == doctest::Approx(4.5));

    auto oracle = enumerate_oracle(p);
    REQUIRE(oracle.status == SolStatus::Optimal);
    CHECK(oracle.objective == doctest::Approx(4.5));
    CHECK(oracle.chosen(0) == 1);
}

TEST_CASE("zero objective stays zero for any big-M") {
    MspeuProblem p = tiny_two_stage(0.0, 0.0);
    for (NodeId n = 0; n < 3; ++n) p.blocks[n].r = {0.0};
    BigMTable table;
    table.set(0, 0, 123.0);
    table.set(0, 1, 777.0);
    auto sol = milp::solve(build_node_formulation(p, table));
    REQUIRE(sol.status == milp::Status::Optimal);
    CHECK(sol.objective == doctest::Approx(0.0));
}

TEST_CASE("missing big-M entry is a construction error") {
    MspeuProblem p = tiny_two_stage(1.0, 2.0);
    BigMTable incomplete;
    incomplete.set(0, 0, 10.0);
    CHECK_THROWS_AS(build_node_formulation(p, incomplete), Error);
}

TEST_CASE("evaluate_solution flags a double delta") {
    MspeuProblem p = tiny_two_stage(3.0, 4.5);
    auto oracle = enumerate_oracle(p);
    REQUIRE(oracle.status == SolStatus::Optimal);
    MspeuSolution bad = oracle;
    bad.delta[0] = {1.0, 1.0};
    auto rep = evaluate_solution(p, bad);
    CHECK_FALSE(rep.feasible);
    bool named = false;
    for (const auto& v : rep.violations)
        if (v.find("eq 1b") != std::string::npos) named = true;
    CHECK(named);
}

TEST_CASE("evaluate_solution matches the solver objective") {
    MspeuProblem p = tiny_two_stage(3.0, 4.5);
    auto oracle = enumerate_oracle(p);
    auto rep = evaluate_solution(p, oracle);
    CHECK(rep.feasible);
    CHECK(rep.objective == doctest::Approx(oracle.objective));
}

TEST_CASE("all-zero solution on an all-zero problem is feasible") {
    MspeuProblem p = tiny_two_stage(0.0, 0.0);
    for (NodeId n = 0; n < 3; ++n) p.blocks[n].h = {0.0};
    MspeuSolution zero;
    zero.x = {{0.0}, {0.0}, {0.0}};
    zero.delta = {{1.0, 0.0}, {1.0}, {1.0}};
    zero.theta = {0.0, 0.0, 0.0};
    zero.on_policy.assign(3, 1);
    auto rep = evaluate_solution(p, zero);
    CHECK(rep.feasible);
    CHECK(rep.objective == doctest::Approx(0.0));
}

TEST_CASE("oracle equals monolithic on a random battery") {
    int agreements = 0;
    for (int i = 0; i < 12; ++i) {
        testutil::Rng rng(500 + i);
        testutil::GenericSpec spec;
        spec.stages = 3;
        spec.dists = 1 + i % 3;
        spec.samples = 1 + i % 2;
        spec.integer_x = i % 4 == 0;
        auto p = testutil::random_problem(rng, spec);
        auto table = testutil::interval_bigm(p);
        auto oracle = enumerate_oracle(p);
        auto sol = milp::solve(build_node_formulation(p, table));
        if (oracle.status == SolStatus::Optimal) {
            REQUIRE(sol.status == milp::Status::Optimal);
            CHECK(std::abs(sol.objective - oracle.objective) <=
                  1e-6 * std::max(1.0, std::abs(oracle.objective)));
            auto rep = evaluate_solution(p, oracle);
            CHECK(rep.feasible);
            CHECK(rep.objective == doctest::Approx(oracle.objective));
            ++agreements;
        } else {
            CHECK(sol.status == milp::Status::Infeasible);
        }
    }
    CHECK(agreements >= 8);
}

TEST_CASE("monolithic solutions evaluate back to the solver objective") {
    for (int i = 0; i < 5; ++i) {
        testutil::Rng rng(620 + i);
        testutil::GenericSpec spec;
        spec.stages = 3;
        spec.dists = 1 + i % 2;
        spec.samples = 1 + i % 2;
        auto p = testutil::random_problem(rng, spec);
        auto table = testutil::interval_bigm(p);
        auto model = build_node_formulation(p, table);
        auto milp_sol = milp::solve(model);
        REQUIRE(milp_sol.status == milp::Status::Optimal);
        auto sol = solution_from_milp(p, model, milp_sol);
        auto rep = evaluate_solution(p, sol);
        CHECK(rep.feasible);
        CHECK(std::abs(rep.objective - milp_sol.objective) <=
              1e-6 * std::max(1.0, std::abs(milp_sol.objective)));
    }
}

TEST_CASE("big-M inflation leaves the optimum unchanged") {
    testutil::Rng rng(321);
    testutil::GenericSpec spec;
    spec.stages = 3;
    spec.dists = 2;
    spec.samples = 2;
    auto p = testutil::random_problem(rng, spec);
    auto table = testutil::interval_bigm(p);
    auto a = milp::solve(build_node_formulation(p, table));
    auto b = milp::solve(build_node_formulation(p, table.scaled(10.0)));
    REQUIRE(a.status == milp::Status::Optimal);
    REQUIRE(b.status == milp::Status::Optimal);
    CHECK(std::abs(a.objective - b.objective) <=
          1e-6 * std::max(1.0, std::abs(a.objective)));
}

TEST_CASE("table convention reproduces all six reference triples") {
    struct Config {
        int I, S;
        std::int64_t vars, bins, cons;
    };
    const Config configs[] = {
        {3, 4, 24505, 16965, 22620},  {3, 5, 47008, 32544, 43392},
        {4, 4, 91749, 69904, 65535},  {4, 5, 176841, 134736, 126315},
        {5, 4, 261051, 210525, 151578}, {5, 5, 504556, 406900, 292968},
    };
    for (const auto& cfg : configs) {
        MspeuProblem p;
        p.tree = build_uniform_tree(4, cfg.I, cfg.S);
        // Leaves carry delta variables too under this shape.
        for (NodeId n = 0; n < p.tree.num_nodes(); ++n)
            if (p.tree.is_leaf(n)) p.tree.children[n].assign(cfg.I, {});
        p.blocks.resize(p.tree.num_nodes());
        p.c_is_zero = true;
        auto counts = count_model(p, CountConvention::TableConvention);
        CHECK(counts.vars == cfg.vars);
        CHECK(counts.bins == cfg.bins);
        CHECK(counts.cons == cfg.cons);
    }
}

TEST_CASE("table convention rejects non-uniform distribution counts") {
    MspeuProblem p = tiny_two_stage(1.0, 1.0);
    // Root has 2 distributions, leaves 1: not table-shaped.
    CHECK_THROWS_AS(count_model(p, CountConvention::TableConvention), ConventionError);
}

TEST_CASE("all-vars counting matches the built model") {
    MspeuProblem p = tiny_two_stage(3.0, 4.5);
    auto counts = count_model(p, CountConvention::AllVars);
    auto model = build_node_formulation(p, crude_bigm(p));
    CHECK(counts.vars == model.num_vars());
    CHECK(counts.cons == model.num_rows());
    CHECK(counts.bins == model.counts().bins);
}
