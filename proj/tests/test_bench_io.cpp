#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "mspeu/bench.hpp"
#include "mspeu/problem_io.hpp"
#include "support/random_instances.hpp"

using namespace mspeu;

TEST_CASE("problem JSON round trip") {
    testutil::Rng rng(55);
    testutil::GenericSpec spec;
    spec.stages = 3;
    spec.dists = 2;
    spec.samples = 2;
    spec.integer_x = true;
    auto p = testutil::random_problem(rng, spec);
    const std::string path = "test_problem_roundtrip.json";
    save_problem(p, path);
    auto loaded = load_problem(path);
    CHECK(problem_to_json(p) == problem_to_json(loaded));
    CHECK(loaded.c_is_zero == p.c_is_zero);
    CHECK(loaded.tree.num_nodes() == p.tree.num_nodes());
    std::remove(path.c_str());
}

TEST_CASE("big-M table JSON round trip") {
    BigMTable table;
    table.set(0, 0, 1.25);
    table.set(0, 1, 0.0);
    table.set(3, 2, 1e-17);
    const std::string path = "test_bigm_roundtrip.json";
    save_bigm(table, "mspeu", "general", path);
    auto loaded = load_bigm(path);
    CHECK(loaded.space == "mspeu");
    CHECK(loaded.method == "general");
    CHECK(loaded.table.entries() == table.entries());
    std::remove(path.c_str());
}

TEST_CASE("single-record table carries an Avg row equal to the record") {
    BenchRecord r;
    r.instance_id = "t01";
    r.num_compositions = 3;
    r.samples = 4;
    r.vars = 100;
    r.bins = 50;
    r.cons = 80;
    r.bigm_method = "ftcp-fast";
    r.bigm_time_s = 0.5;
    r.tau_monolithic_s = 100.0;
    r.obj_monolithic = 12.5;
    r.status_monolithic = "optimal";
    r.tau_backward_s = 80.0;
    r.obj_backward = 12.5;
    r.status_backward = "optimal";
    r.delta_tau_pct = 100.0 * (80.0 - 100.0) / 100.0;
    r.has_delta = true;
    auto text = emit_table({r}, TableFormat::Csv);
    std::istringstream is(text);
    std::string header, row, avg;
    std::getline(is, header);
    std::getline(is, row);
    std::getline(is, avg);
    CHECK(header.rfind("case,I,S,", 0) == 0);
    CHECK(row.find("t01,3,4,100,50,80") == 0);
    CHECK(row.find("-20.000") != std::string::npos);
    CHECK(avg.rfind("Avg,", 0) == 0);
    CHECK(avg.find("-20.000") != std::string::npos);
}

TEST_CASE("delta formula and column means") {
    std::vector<BenchRecord> records;
    for (int i = 0; i < 4; ++i) {
        BenchRecord r;
        r.instance_id = "t0" + std::to_string(i);
        r.num_compositions = 3;
        r.samples = 4;
        r.vars = 10 + i;
        r.bins = 5;
        r.cons = 7;
        r.bigm_method = "general";
        r.bigm_time_s = 0.1;
        r.tau_monolithic_s = 100.0;
        r.obj_monolithic = 1.0 * i;
        r.status_monolithic = "optimal";
        r.tau_backward_s = 80.0 + i;
        r.obj_backward = 1.0 * i;
        r.status_backward = "optimal";
        r.delta_tau_pct = 100.0 * (r.tau_backward_s - 100.0) / 100.0;
        r.has_delta = true;
        records.push_back(r);
    }
    auto text = emit_table(records, TableFormat::Csv);
    // Mean of vars 10..13 = 11.5; mean of delta = 100*(81.5-100)/100 = -18.5.
    CHECK(text.find("Avg,3.000000,4.000000,11.500000") != std::string::npos);
    CHECK(text.find("-18.500") != std::string::npos);
}

TEST_CASE("markdown table renders header separators") {
    BenchRecord r;
    r.instance_id = "x";
    r.samples = 1;
    r.status_monolithic = "optimal";
    r.status_backward = "optimal";
    auto text = emit_table({r}, TableFormat::Markdown, false);
    CHECK(text.find("| case |") != std::string::npos);
    CHECK(text.find("| --- |") != std::string::npos);
}

TEST_CASE("empty record set renders a bare header") {
    auto text = emit_table({}, TableFormat::Csv);
    std::istringstream is(text);
    std::string header, rest;
    std::getline(is, header);
    CHECK(header.rfind("case,", 0) == 0);
    CHECK_FALSE(std::getline(is, rest));
}
