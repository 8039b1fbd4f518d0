#pragma once

// Valid big-M constants for the linearized expectation rows, by the general
// relaxation-based procedures (pairwise bounds, second-last stage, then all
// shallower stages embedding the deeper constants) and by validity checking
// against the enumeration oracle.

#include <string>
#include <vector>

#include "mspeu/milp/model.hpp"
#include "mspeu/mspeu_model.hpp"

namespace mspeu {

/// Highest/lowest attainable next-stage expectation for one distribution.
struct BoundPair {
    double phi_max = 0.0;
    double phi_min = 0.0;
};

/// M(d) = max_{d' != d} phi_max(d') - phi_min(d), clamped at zero; a single
/// distribution needs no constant at all (M = 0).
std::vector<double> pairwise_bigm(const std::vector<BoundPair>& bounds);

enum class BigMRelaxation {
    Lp,            // LP relaxation of the full-tree bounding problems
    StagewiseDrop, // additionally drop linking rows above the target stage
};

struct BigMOptions {
    BigMRelaxation relaxation = BigMRelaxation::Lp;
    bool exact_milp = false;  // solve the bounding problems as MILPs (tightest M's)
    milp::SolveParams solve;
};

struct BigMComputation {
    BigMTable table;
    std::vector<std::string> warnings; // vacuous rows, excluded distributions
};

/// Constants for the second-last stage: per (node, distribution), the highest
/// next-stage expectation of each competitor bounds theta from above while the
/// target distribution's expectation is minimized with its delta fixed to 0.
BigMComputation compute_bigm_T1(const MspeuProblem& problem, const BigMOptions& options = {});

/// Full table: second-last stage first, then stages T-2 down to 1, where each
/// stage's bounding problems embed the already-computed deeper constants in
/// their theta rows.
BigMComputation compute_bigm_general(const MspeuProblem& problem, const BigMOptions& options = {});

struct FtcpInstance;

/// Fast backward recursion for the case study (valid when composition values
/// are nonnegative): leaves take the best discounted sunset value, internal
/// nodes the best distribution's discounted sum of child constants plus best
/// child values. One constant per node, replicated across compositions.
/// A warning is appended for negative values; the computation proceeds.
BigMComputation ftcp_fast_bigm(const FtcpInstance& instance);

struct BigMReport {
    std::vector<std::string> issues;
    bool ok() const { return issues.empty(); }
};

/// Checks that (a) the monolithic optimum under `table` equals the enumeration
/// oracle, (b) inflating the table tenfold leaves the optimum unchanged,
/// (c) every entry is finite and nonnegative. `trials` adds seeded random
/// entrywise inflations (factors in [1,10]) re-checking (b).
BigMReport validate_bigm(const MspeuProblem& problem, const BigMTable& table, int trials = 0,
                         const OracleParams& oracle_params = {});

} // namespace mspeu
