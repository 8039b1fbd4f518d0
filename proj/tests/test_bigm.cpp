#include "doctest.h"

#include <cmath>

#include "mspeu/bigm.hpp"
#include "mspeu/milp/solver.hpp"
#include "support/random_instances.hpp"

using namespace mspeu;

TEST_CASE("pairwise constants on a three-distribution example") {
    auto m = pairwise_bigm({{10.0, 5.0}, {9.0, 4.0}, {8.0, 3.0}});
    REQUIRE(m.size() == 3);
    CHECK(m[0] == doctest::Approx(4.0));
    CHECK(m[1] == doctest::Approx(6.0));
    CHECK(m[2] == doctest::Approx(7.0));
}

TEST_CASE("pairwise single distribution needs no constant") {
    auto m = pairwise_bigm({{7.0, 2.0}});
    REQUIRE(m.size() == 1);
    CHECK(m[0] == 0.0);
}

TEST_CASE("pairwise identical pairs give max minus min") {
    auto m = pairwise_bigm({{5.0, 1.0}, {5.0, 1.0}, {5.0, 1.0}});
    for (double v : m) CHECK(v == doctest::Approx(4.0));
}

TEST_CASE("pairwise clamps below at zero") {
    auto m = pairwise_bigm({{10.0, 9.0}, {2.0, 1.0}});
    CHECK(m[0] == 0.0);              // competitor max 2 < own min 9
    CHECK(m[1] == doctest::Approx(9.0)); // 10 - 1
}

namespace {

// T = 2, two distributions at the root, leaves with constant terminal values
// and no x influence: expectations are (hi, lo) exactly.
MspeuProblem two_branch_constant(double hi, double lo) {
    MspeuProblem p;
    p.tree.num_stages = 2;
    p.tree.stage = {1, 2, 2};
    p.tree.parent = {-1, 0, 0};
    p.tree.prob = {1.0, 1.0, 1.0};
    p.tree.children = {{{1}, {2}}, {}, {}};
    p.c_is_zero = true;
    p.blocks.resize(3);
    for (NodeId n = 0; n < 3; ++n) {
        NodeBlock& b = p.blocks[n];
        b.r = {};
        b.domains = {};
        b.q.assign(p.tree.num_dists(n), 0.0);
        b.A = {};
        b.B = {};
        b.h = {};
        if (n == 0) {
            b.C_to_children = {};
            b.D_to_children = {};
        }
    }
    p.blocks[1].theta_terminal = hi;
    p.blocks[2].theta_terminal = lo;
    return p;
}

} // namespace

TEST_CASE("second-last-stage constants from constant leaf values") {
    SUBCASE("equal expectations give zero constants") {
        auto p = two_branch_constant(4.0, 4.0);
        auto comp = compute_bigm_T1(p);
        CHECK(comp.table.at(0, 0) == doctest::Approx(0.0));
        CHECK(comp.table.at(0, 1) == doctest::Approx(0.0));
    }
    SUBCASE("hand expectations 10 vs 4") {
        auto p = two_branch_constant(10.0, 4.0);
        auto comp = compute_bigm_T1(p);
        // Low branch must be able to release theta up to 10: M = 10 - 4.
        CHECK(comp.table.at(0, 1) == doctest::Approx(6.0));
        CHECK(comp.table.at(0, 0) == doctest::Approx(0.0)); // clamped from 4 - 10
    }
}

TEST_CASE("T=2 general equals the second-last-stage computation") {
    testutil::Rng rng(11);
    testutil::GenericSpec spec;
    spec.stages = 2;
    spec.dists = 2;
    spec.samples = 2;
    auto p = testutil::random_problem(rng, spec);
    auto a = compute_bigm_T1(p);
    auto b = compute_bigm_general(p);
    REQUIRE(a.table.entries().size() == b.table.entries().size());
    for (const auto& [key, v] : a.table.entries())
        CHECK(b.table.at(key.first, key.second) == doctest::Approx(v));
}

TEST_CASE("single-distribution problems get all-zero tables") {
    testutil::Rng rng(12);
    testutil::GenericSpec spec;
    spec.stages = 3;
    spec.dists = 1;
    spec.samples = 2;
    auto p = testutil::random_problem(rng, spec);
    auto comp = compute_bigm_general(p);
    for (const auto& [key, v] : comp.table.entries()) CHECK(v == 0.0);
    auto rep = validate_bigm(p, comp.table);
    CHECK(rep.ok());
}

TEST_CASE("general tables pass validation on a random battery") {
    for (int i = 0; i < 6; ++i) {
        testutil::Rng rng(8800 + i);
        testutil::GenericSpec spec;
        spec.stages = 3;
        spec.dists = 1 + i % 3;
        spec.samples = 1 + i % 2;
        auto p = testutil::random_problem(rng, spec);
        auto comp = compute_bigm_general(p);
        auto rep = validate_bigm(p, comp.table, i % 2);
        for (const auto& issue : rep.issues) MESSAGE(issue);
        CHECK(rep.ok());
    }
}

TEST_CASE("stagewise-drop relaxation also yields valid tables") {
    for (int i = 0; i < 3; ++i) {
        testutil::Rng rng(9900 + i);
        testutil::GenericSpec spec;
        spec.stages = 3;
        spec.dists = 2;
        spec.samples = 1 + i % 2;
        auto p = testutil::random_problem(rng, spec);
        BigMOptions opt;
        opt.relaxation = BigMRelaxation::StagewiseDrop;
        auto comp = compute_bigm_general(p, opt);
        auto rep = validate_bigm(p, comp.table);
        for (const auto& issue : rep.issues) MESSAGE(issue);
        CHECK(rep.ok());
        // The stagewise relaxation is weaker, so its constants dominate the
        // LP-relaxation ones.
        auto lp = compute_bigm_general(p);
        for (const auto& [key, v] : comp.table.entries())
            CHECK(v >= lp.table.at(key.first, key.second) - 1e-6);
    }
}

TEST_CASE("zeroing a binding entry is caught by validation") {
    auto p = two_branch_constant(10.0, 4.0);
    auto comp = compute_bigm_general(p);
    BigMTable broken = comp.table;
    broken.set(0, 1, 0.0); // the low branch's row now pins theta at 4
    auto rep = validate_bigm(p, broken);
    REQUIRE_FALSE(rep.ok());
    bool drop = false;
    for (const auto& issue : rep.issues)
        if (issue.find("objective drop") != std::string::npos) drop = true;
    CHECK(drop);
}

TEST_CASE("all-zero table is fine when only one distribution exists") {
    testutil::Rng rng(13);
    testutil::GenericSpec spec;
    spec.stages = 2;
    spec.dists = 1;
    spec.samples = 2;
    auto p = testutil::random_problem(rng, spec);
    BigMTable zeros;
    zeros.set(0, 0, 0.0);
    auto rep = validate_bigm(p, zeros);
    CHECK(rep.ok());
}

TEST_CASE("exact MILP bounding gives valid, no-looser constants") {
    testutil::Rng rng(14);
    testutil::GenericSpec spec;
    spec.stages = 2;
    spec.dists = 2;
    spec.samples = 2;
    auto p = testutil::random_problem(rng, spec);
    BigMOptions exact;
    exact.exact_milp = true;
    auto tight = compute_bigm_general(p, exact);
    auto relaxed = compute_bigm_general(p);
    for (const auto& [key, v] : tight.table.entries())
        CHECK(v <= relaxed.table.at(key.first, key.second) + 1e-6);
    CHECK(validate_bigm(p, tight.table).ok());
}
