// Command-line front end: instance generation, big-M computation, the two
// solve paths, model export, and the benchmark table.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "CLI11.hpp"
#include "json.hpp"

#include "mspeu/backward.hpp"
#include "mspeu/bench.hpp"
#include "mspeu/bigm.hpp"
#include "mspeu/errors.hpp"
#include "mspeu/ftcp.hpp"
#include "mspeu/milp/lp_format.hpp"
#include "mspeu/milp/solver.hpp"
#include "mspeu/problem_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string sniff_format(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw mspeu::Error("cannot open " + path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw mspeu::SchemaError(path + ": not valid JSON: " + e.what());
    }
    return j.value("format", "");
}

struct LoadedInput {
    bool is_ftcp = false;
    mspeu::FtcpInstance instance; // valid when is_ftcp
    mspeu::MspeuProblem problem;  // always valid (mapped for instances)
};

LoadedInput load_input(const std::string& path) {
    LoadedInput in;
    const std::string format = sniff_format(path);
    if (format == "ftcp-mdst/1") {
        in.is_ftcp = true;
        in.instance = mspeu::load_instance(path);
        in.problem = mspeu::to_mspeu(in.instance);
    } else if (format == "mspeu/1") {
        in.problem = mspeu::load_problem(path);
    } else {
        throw mspeu::SchemaError(path + ": unknown format \"" + format + "\"");
    }
    return in;
}

// Computes (or loads) a big-M table in the mapped problem's space.
mspeu::BigMTable resolve_bigm(const LoadedInput& in, const std::string& bigm_path,
                              const std::string& method, bool exact, double* bigm_time) {
    const auto t0 = std::chrono::steady_clock::now();
    mspeu::BigMTable table;
    if (!bigm_path.empty()) {
        auto loaded = mspeu::load_bigm(bigm_path);
        if (loaded.space == "mspeu") {
            table = loaded.table;
        } else if (loaded.space == "ftcp") {
            if (!in.is_ftcp)
                throw mspeu::Error("ftcp-space big-M table supplied for a generic problem");
            table = mspeu::ftcp_bigm_to_mspeu(in.instance, loaded.table);
        } else {
            throw mspeu::Error("unknown big-M table space: " + loaded.space);
        }
    } else {
        std::string m = method;
        if (m.empty()) m = in.is_ftcp ? "ftcp-fast" : "general";
        if (m == "ftcp-fast") {
            if (!in.is_ftcp) throw mspeu::Error("ftcp-fast requires an ftcp instance");
            table = mspeu::ftcp_bigm_to_mspeu(in.instance, mspeu::ftcp_fast_bigm(in.instance).table);
        } else if (m == "general" || m == "general-stagewise") {
            mspeu::BigMOptions opt;
            if (m == "general-stagewise") opt.relaxation = mspeu::BigMRelaxation::StagewiseDrop;
            opt.exact_milp = exact;
            table = mspeu::compute_bigm_general(in.problem, opt).table;
        } else {
            throw mspeu::Error("unknown big-M method: " + m);
        }
    }
    if (bigm_time)
        *bigm_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return table;
}

json solution_to_json(const mspeu::MspeuProblem& problem, const mspeu::MspeuSolution& sol,
                      const std::string& method) {
    json j;
    j["format"] = "solution/1";
    j["method"] = method;
    j["status"] = sol.status == mspeu::SolStatus::Optimal
                      ? "optimal"
                      : (sol.status == mspeu::SolStatus::Infeasible ? "infeasible" : "unbounded");
    j["objective"] = sol.objective;
    json nodes = json::object();
    for (mspeu::NodeId n = 0; n < problem.tree.num_nodes(); ++n) {
        json nd;
        nd["x"] = sol.x[n];
        nd["delta"] = sol.delta[n];
        nd["theta"] = sol.theta[n];
        nd["on_policy"] = static_cast<bool>(sol.on_policy[n]);
        nodes[std::to_string(n)] = std::move(nd);
    }
    j["nodes"] = std::move(nodes);
    return j;
}

int cmd_generate(int teams, int compositions, int samples, int stages, std::uint64_t seed,
                 const std::string& out_dir, double budget, double rho, double correlation,
                 int players, const std::string& discount_mode, bool audit_players) {
    fs::create_directories(out_dir);
    std::mt19937_64 meta(seed);
    for (int t = 0; t < teams; ++t) {
        mspeu::GeneratorParams params;
        params.num_compositions = compositions;
        params.samples = samples;
        params.stages = stages;
        params.seed = seed + 1000003ULL * static_cast<std::uint64_t>(t);
        params.budget = budget;
        params.rho = rho;
        params.correlation = correlation;
        params.players_per_composition = players;
        params.discount_mode = mspeu::discount_mode_from_string(discount_mode);
        params.audit_players = audit_players;
        // Per-team spread of composition means and volatilities.
        params.value_means.resize(compositions);
        params.value_vols.resize(compositions);
        for (int i = 0; i < compositions; ++i) {
            const double u1 = (meta() >> 11) * 0x1.0p-53;
            const double u2 = (meta() >> 11) * 0x1.0p-53;
            params.value_means[i] = 80.0 + 60.0 * u1;
            params.value_vols[i] = 0.1 + 0.2 * u2;
        }
        auto inst = mspeu::generate_instance(params);
        char name[64];
        std::snprintf(name, sizeof(name), "t%02d_I%d_S%d.json", t + 1, compositions, samples);
        const fs::path path = fs::path(out_dir) / name;
        mspeu::save_instance(inst, path.string());
        std::cout << path.string() << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Solver toolkit for multistage stochastic programs with decision-dependent "
                 "uncertainty"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Generate seeded instances");
    int g_teams = 1, g_comps = 3, g_samples = 4, g_stages = 4, g_players = 11;
    std::uint64_t g_seed = 0;
    std::string g_out = "instances", g_mode = "paper_literal";
    double g_budget = 100.0, g_rho = 0.0, g_corr = 0.8;
    bool g_audit = false;
    gen->add_option("--teams", g_teams, "Number of instances (focal teams)");
    gen->add_option("--compositions", g_comps, "Team compositions |I|");
    gen->add_option("--samples", g_samples, "Realizations per distribution S");
    gen->add_option("--stages", g_stages, "Stages T");
    gen->add_option("--seed", g_seed, "Base seed");
    gen->add_option("--out", g_out, "Output directory");
    gen->add_option("--budget", g_budget, "Transfer budget B");
    gen->add_option("--rho", g_rho, "Discount rate");
    gen->add_option("--correlation", g_corr, "Within-team player correlation");
    gen->add_option("--players", g_players, "Players per composition");
    gen->add_option("--discount-mode", g_mode, "paper_literal | compound");
    gen->add_flag("--audit-players", g_audit, "Embed player-level values in the audit");

    // bigm
    auto* bigm = app.add_subcommand("bigm", "Compute a big-M table");
    std::string b_in, b_out, b_method = "ftcp-fast";
    bool b_exact = false;
    bigm->add_option("--in", b_in, "Instance or problem file")->required();
    bigm->add_option("--out", b_out, "Output table file")->required();
    bigm->add_option("--method", b_method, "general | general-stagewise | ftcp-fast");
    bigm->add_flag("--exact", b_exact, "Solve the bounding problems as MILPs");

    // solve
    auto* solve_cmd = app.add_subcommand("solve", "Solve an instance");
    std::string s_in, s_bigm, s_method = "monolithic", s_out, s_csv, s_solver;
    double s_time_limit = -1.0;
    solve_cmd->add_option("--in", s_in, "Instance or problem file")->required();
    solve_cmd->add_option("--method", s_method, "monolithic | backward");
    solve_cmd->add_option("--bigm", s_bigm, "Big-M table file (computed when omitted)");
    solve_cmd->add_option("--out", s_out, "Solution JSON output");
    solve_cmd->add_option("--solution-csv", s_csv, "Per-node CSV output (ftcp instances)");
    std::string s_phi_out;
    solve_cmd->add_option("--phi-out", s_phi_out,
                          "Dump the backward child-set optima as JSON for inspection");
    solve_cmd->add_option("--solver", s_solver, "external:<command> routes the monolithic solve");
    solve_cmd->add_option("--time-limit", s_time_limit, "Engine time limit in seconds");

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "Benchmark both methods over a directory");
    std::string be_in, be_out = "results.csv", be_bigm = "ftcp-fast", be_timing = "wall";
    bool be_markdown = false;
    int be_jobs = 1;
    double be_time_limit = -1.0;
    bench_cmd->add_option("--in", be_in, "Directory of instance files")->required();
    bench_cmd->add_option("--out", be_out, "CSV output path");
    bench_cmd->add_flag("--markdown", be_markdown, "Also print a Markdown table to stdout");
    bench_cmd->add_option("--bigm-method", be_bigm, "general | general-stagewise | ftcp-fast");
    bench_cmd->add_option("--timing-mode", be_timing,
                          "wall | none (none leaves timing cells empty for byte-stable output)");
    bench_cmd->add_option("--jobs", be_jobs, "Run instances in parallel");
    bench_cmd->add_option("--time-limit", be_time_limit, "Per-solve time limit in seconds");

    // export
    auto* export_cmd = app.add_subcommand("export", "Export a model file");
    std::string e_in, e_out, e_format = "lp", e_bigm;
    bool e_direct = false;
    export_cmd->add_option("--in", e_in, "Instance or problem file")->required();
    export_cmd->add_option("--out", e_out, "Output path")->required();
    export_cmd->add_option("--format", e_format, "lp");
    export_cmd->add_option("--bigm", e_bigm, "Big-M table file (computed when omitted)");
    export_cmd->add_flag("--direct", e_direct,
                         "Export the direct case-study model instead of the mapped one");

    // solve-lp: the reference adapter for MSPEU_SOLVER=external:<cmd>.
    auto* solve_lp_cmd =
        app.add_subcommand("solve-lp", "Solve an LP-format file and write a solution file");
    std::string sl_in, sl_out;
    solve_lp_cmd->add_option("input", sl_in, "LP file")->required();
    solve_lp_cmd->add_option("output", sl_out, "Solution file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1; // usage errors exit 1, help exits 0
    }

    try {
        if (*gen)
            return cmd_generate(g_teams, g_comps, g_samples, g_stages, g_seed, g_out, g_budget,
                                g_rho, g_corr, g_players, g_mode, g_audit);

        if (*bigm) {
            auto in = load_input(b_in);
            double bigm_time = 0.0;
            auto table = resolve_bigm(in, "", b_method, b_exact, &bigm_time);
            mspeu::save_bigm(table, "mspeu", b_method, b_out);
            std::printf("bigm method=%s entries=%zu time=%.3fs\n", b_method.c_str(),
                        table.entries().size(), bigm_time);
            return 0;
        }

        if (*solve_cmd) {
            auto in = load_input(s_in);
            double bigm_time = 0.0;
            auto table = resolve_bigm(in, s_bigm, "", false, &bigm_time);
            mspeu::milp::SolveParams params;
            params.time_limit_s = s_time_limit;
            if (!s_solver.empty()) params.solver_override = s_solver;
            std::printf("bigm time=%.3fs (reported separately from solve time)\n", bigm_time);

            mspeu::MspeuSolution sol;
            std::string status;
            double objective = 0.0;
            const auto t0 = std::chrono::steady_clock::now();
            if (s_method == "monolithic") {
                auto model = mspeu::build_node_formulation(in.problem, table);
                auto counts = model.counts();
                std::printf("model vars=%lld bins=%lld cons=%lld\n",
                            static_cast<long long>(counts.vars),
                            static_cast<long long>(counts.bins),
                            static_cast<long long>(counts.cons));
                auto milp_sol = mspeu::milp::solve(model, params);
                status = mspeu::milp::to_string(milp_sol.status);
                objective = milp_sol.objective;
                if (milp_sol.status == mspeu::milp::Status::Optimal)
                    sol = mspeu::solution_from_milp(in.problem, model, milp_sol);
            } else if (s_method == "backward") {
                auto result = mspeu::solve_backward(in.problem, table, params);
                for (const auto& [stage, seconds] : result.stage_time_s)
                    std::printf("stage %d: %.3fs\n", stage, seconds);
                std::printf("subproblems=%lld\n",
                            static_cast<long long>(result.subproblem_count));
                if (!s_phi_out.empty()) {
                    json phi = json::object();
                    for (const auto& [key, v] : result.phi)
                        phi[std::to_string(key.first) + ":" + std::to_string(key.second)] =
                            std::isfinite(v) ? json(v) : json(v > 0 ? "+inf" : "-inf");
                    std::ofstream os(s_phi_out, std::ios::binary);
                    os << json{{"format", "phi-table/1"}, {"entries", phi}}.dump(1) << "\n";
                }
                objective = result.z;
                status = result.status == mspeu::SolStatus::Optimal
                             ? "optimal"
                             : (result.status == mspeu::SolStatus::Infeasible ? "infeasible"
                                                                              : "unbounded");
                if (result.status == mspeu::SolStatus::Optimal)
                    sol = mspeu::extract_policy(in.problem, result, params);
            } else {
                throw mspeu::Error("unknown method: " + s_method);
            }
            const double solve_time =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            std::printf("method=%s status=%s objective=%.9f solve_time=%.3fs\n", s_method.c_str(),
                        status.c_str(), objective, solve_time);
            if (!s_out.empty() && status == "optimal") {
                std::ofstream os(s_out, std::ios::binary);
                os << solution_to_json(in.problem, sol, s_method).dump(1) << "\n";
            }
            if (!s_csv.empty() && status == "optimal") {
                if (!in.is_ftcp)
                    throw mspeu::Error("--solution-csv requires an ftcp instance");
                mspeu::write_solution_csv(in.instance, sol, s_csv);
            }
            return status == "optimal" ? 0 : 2;
        }

        if (*bench_cmd) {
            mspeu::BenchOptions options;
            options.bigm_method = be_bigm;
            options.include_timing = be_timing != "none";
            options.jobs = be_jobs;
            options.solve.time_limit_s = be_time_limit;
            auto records = mspeu::run_bench(be_in, options);
            std::ofstream os(be_out, std::ios::binary);
            if (!os) throw mspeu::Error("cannot open " + be_out);
            os << mspeu::emit_table(records, mspeu::TableFormat::Csv, options.include_timing);
            if (be_markdown)
                std::cout << mspeu::emit_table(records, mspeu::TableFormat::Markdown,
                                               options.include_timing);
            return 0;
        }

        if (*export_cmd) {
            if (e_format != "lp") throw mspeu::Error("unknown export format: " + e_format);
            auto in = load_input(e_in);
            mspeu::milp::MilpModel model;
            if (e_direct) {
                if (!in.is_ftcp) throw mspeu::Error("--direct requires an ftcp instance");
                mspeu::BigMTable table;
                if (!e_bigm.empty()) {
                    auto loaded = mspeu::load_bigm(e_bigm);
                    if (loaded.space != "ftcp")
                        throw mspeu::Error("--direct export needs an ftcp-space table");
                    table = loaded.table;
                } else {
                    table = mspeu::ftcp_fast_bigm(in.instance).table;
                }
                model = mspeu::build_ftcp_milp(in.instance, table);
            } else {
                auto table = resolve_bigm(in, e_bigm, "", false, nullptr);
                model = mspeu::build_node_formulation(in.problem, table);
            }
            mspeu::milp::export_lp(model, e_out);
            auto counts = model.counts();
            std::printf("exported vars=%lld bins=%lld cons=%lld to %s\n",
                        static_cast<long long>(counts.vars), static_cast<long long>(counts.bins),
                        static_cast<long long>(counts.cons), e_out.c_str());
            return 0;
        }

        if (*solve_lp_cmd) {
            auto model = mspeu::milp::import_lp(sl_in);
            mspeu::milp::SolveParams params;
            params.solver_override = "internal"; // never recurse into MSPEU_SOLVER
            auto sol = mspeu::milp::solve(model, params);
            mspeu::milp::write_solution_file(model, sol, sl_out);
            return 0;
        }
    } catch (const mspeu::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 1;
}
