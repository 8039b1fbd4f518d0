#pragma once

// Benchmark harness: runs both solve paths over a directory of instances and
// renders the comparison table (CSV or Markdown) with a trailing average row.

#include <cstdint>
#include <string>
#include <vector>

#include "mspeu/milp/model.hpp"

namespace mspeu {

struct BenchRecord {
    std::string instance_id;
    int num_compositions = 0;
    int samples = 0;
    std::int64_t vars = 0, bins = 0, cons = 0; // table-convention counts
    std::string bigm_method;
    double bigm_time_s = 0.0;
    double tau_monolithic_s = 0.0;
    double obj_monolithic = 0.0;
    std::string status_monolithic;
    double tau_backward_s = 0.0;
    double obj_backward = 0.0;
    std::string status_backward;
    double delta_tau_pct = 0.0; // 100 (tau_backward - tau_monolithic)/tau_monolithic
    bool has_delta = false;
};

enum class TableFormat { Csv, Markdown };

/// Renders records in the canonical column order (case, S, sizes, times,
/// objectives, delta) plus an "Avg" row of column means. With
/// `include_timing` off, timing and delta cells are left empty so the output
/// is byte-deterministic.
std::string emit_table(const std::vector<BenchRecord>& records, TableFormat format,
                       bool include_timing = true);

struct BenchOptions {
    std::string bigm_method = "ftcp-fast"; // general | general-stagewise | ftcp-fast
    bool include_timing = true;
    int jobs = 1;
    milp::SolveParams solve;
};

/// Runs both methods on every ftcp-mdst instance in `dir` (sorted by name).
std::vector<BenchRecord> run_bench(const std::string& dir, const BenchOptions& options);

} // namespace mspeu
