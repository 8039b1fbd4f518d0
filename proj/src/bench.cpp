#include "mspeu/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

#include "json.hpp"

#include "mspeu/backward.hpp"
#include "mspeu/bigm.hpp"
#include "mspeu/errors.hpp"
#include "mspeu/ftcp.hpp"
#include "mspeu/milp/solver.hpp"
#include "mspeu/mspeu_model.hpp"

namespace mspeu {

namespace {

using Clock = std::chrono::steady_clock;

double secs(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt_num(double v, int decimals = 6) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

struct Cell {
    std::string text;
    bool numeric = false;
    double value = 0.0;
};

Cell num_cell(double v, int decimals = 6) { return {fmt_num(v, decimals), true, v}; }
Cell int_cell(std::int64_t v) { return {std::to_string(v), true, static_cast<double>(v)}; }
Cell text_cell(std::string s) { return {std::move(s), false, 0.0}; }

} // namespace

std::string emit_table(const std::vector<BenchRecord>& records, TableFormat format,
                       bool include_timing) {
    const std::vector<std::string> header = {
        "case",       "I",        "S",           "vars",       "bins",
        "cons",       "bigm_method", "bigm_time_s", "tau_mono_s", "obj_mono",
        "status_mono", "tau_back_s", "obj_back",   "status_back", "delta_tau_pct"};

    std::vector<std::vector<Cell>> rows;
    for (const auto& r : records) {
        std::vector<Cell> row;
        row.push_back(text_cell(r.instance_id));
        row.push_back(int_cell(r.num_compositions));
        row.push_back(int_cell(r.samples));
        row.push_back(int_cell(r.vars));
        row.push_back(int_cell(r.bins));
        row.push_back(int_cell(r.cons));
        row.push_back(text_cell(r.bigm_method));
        row.push_back(include_timing ? num_cell(r.bigm_time_s) : text_cell(""));
        row.push_back(include_timing ? num_cell(r.tau_monolithic_s) : text_cell(""));
        row.push_back(num_cell(r.obj_monolithic));
        row.push_back(text_cell(r.status_monolithic));
        row.push_back(include_timing ? num_cell(r.tau_backward_s) : text_cell(""));
        row.push_back(num_cell(r.obj_backward));
        row.push_back(text_cell(r.status_backward));
        row.push_back(include_timing && r.has_delta ? num_cell(r.delta_tau_pct, 3)
                                                    : text_cell(""));
        rows.push_back(std::move(row));
    }

    // Trailing average row over the numeric cells of each column.
    std::vector<Cell> avg(header.size(), text_cell(""));
    avg[0] = text_cell("Avg");
    if (!rows.empty()) {
        for (std::size_t c = 1; c < header.size(); ++c) {
            double sum = 0.0;
            int count = 0;
            for (const auto& row : rows)
                if (row[c].numeric) {
                    sum += row[c].value;
                    ++count;
                }
            if (count == static_cast<int>(rows.size()) && count > 0)
                avg[c] = num_cell(sum / count, c == header.size() - 1 ? 3 : 6);
        }
        rows.push_back(avg);
    }

    std::ostringstream os;
    if (format == TableFormat::Csv) {
        for (std::size_t c = 0; c < header.size(); ++c)
            os << (c ? "," : "") << header[c];
        os << '\n';
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < row.size(); ++c)
                os << (c ? "," : "") << csv_quote(row[c].text);
            os << '\n';
        }
    } else {
        os << '|';
        for (const auto& h : header) os << ' ' << h << " |";
        os << "\n|";
        for (std::size_t c = 0; c < header.size(); ++c) os << " --- |";
        os << '\n';
        for (const auto& row : rows) {
            os << '|';
            for (const auto& cell : row) os << ' ' << (cell.text.empty() ? " " : cell.text) << " |";
            os << '\n';
        }
    }
    return os.str();
}

namespace {

BenchRecord bench_one(const std::string& path, const std::string& id,
                      const BenchOptions& options) {
    BenchRecord rec;
    rec.instance_id = id;
    FtcpInstance inst = load_instance(path);
    rec.num_compositions = inst.num_comps();
    // Uniform sample count per distribution (generated instances).
    rec.samples = inst.tree.num_dists(0) > 0 && !inst.tree.kids(0, 0).empty()
                      ? static_cast<int>(inst.tree.kids(0, 0).size())
                      : 0;
    MspeuProblem problem = to_mspeu(inst);
    auto counts = count_model(problem, CountConvention::TableConvention);
    rec.vars = counts.vars;
    rec.bins = counts.bins;
    rec.cons = counts.cons;

    rec.bigm_method = options.bigm_method;
    auto t0 = Clock::now();
    BigMTable table;
    if (options.bigm_method == "ftcp-fast") {
        table = ftcp_bigm_to_mspeu(inst, ftcp_fast_bigm(inst).table);
    } else if (options.bigm_method == "general") {
        table = compute_bigm_general(problem).table;
    } else if (options.bigm_method == "general-stagewise") {
        BigMOptions opt;
        opt.relaxation = BigMRelaxation::StagewiseDrop;
        table = compute_bigm_general(problem, opt).table;
    } else {
        throw Error("unknown big-M method: " + options.bigm_method);
    }
    rec.bigm_time_s = secs(t0);

    t0 = Clock::now();
    auto model = build_node_formulation(problem, table);
    milp::MilpSolution mono;
    try {
        mono = milp::solve(model, options.solve);
        rec.obj_monolithic = mono.objective;
        rec.status_monolithic = milp::to_string(mono.status);
    } catch (const CapacityError&) {
        // Beyond the internal engine; the row records that instead of a time.
        rec.status_monolithic = "capacity";
    }
    rec.tau_monolithic_s = secs(t0);

    t0 = Clock::now();
    auto back = solve_backward(problem, table, options.solve);
    rec.tau_backward_s = secs(t0);
    rec.obj_backward = back.z;
    rec.status_backward = back.status == SolStatus::Optimal
                              ? "optimal"
                              : (back.status == SolStatus::Infeasible ? "infeasible" : "unbounded");

    if (rec.status_monolithic == "optimal" && back.status == SolStatus::Optimal &&
        rec.tau_monolithic_s > 0.0) {
        rec.delta_tau_pct = 100.0 * (rec.tau_backward_s - rec.tau_monolithic_s) /
                            rec.tau_monolithic_s;
        rec.has_delta = true;
    }
    return rec;
}

} // namespace

std::vector<BenchRecord> run_bench(const std::string& dir, const BenchOptions& options) {
    namespace fs = std::filesystem;
    std::vector<std::pair<std::string, std::string>> inputs; // (path, id)
    if (!fs::exists(dir)) throw Error("bench: no such directory: " + dir);
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
        std::ifstream is(entry.path());
        nlohmann::json j;
        try {
            is >> j;
        } catch (...) {
            continue;
        }
        if (j.value("format", "") != "ftcp-mdst/1") continue;
        inputs.push_back({entry.path().string(), entry.path().stem().string()});
    }
    std::sort(inputs.begin(), inputs.end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });

    std::vector<BenchRecord> records(inputs.size());
    const int jobs = std::max(1, options.jobs);
    if (jobs == 1) {
        for (std::size_t i = 0; i < inputs.size(); ++i)
            records[i] = bench_one(inputs[i].first, inputs[i].second, options);
    } else {
        // Instances are independent; results land in input order regardless of
        // completion order.
        std::size_t next = 0;
        while (next < inputs.size()) {
            const std::size_t batch = std::min<std::size_t>(jobs, inputs.size() - next);
            std::vector<std::future<BenchRecord>> futs;
            for (std::size_t k = 0; k < batch; ++k) {
                const auto& in = inputs[next + k];
                futs.push_back(std::async(std::launch::async, bench_one, in.first, in.second,
                                          options));
            }
            for (std::size_t k = 0; k < batch; ++k) records[next + k] = futs[k].get();
            next += batch;
        }
    }
    return records;
}

} // namespace mspeu
