#pragma once

// Bounded-variable primal simplex over a MilpModel with integrality dropped.
// Two phases with artificial variables, Dantzig pricing with a Bland's-rule
// fallback after a degenerate-pivot budget, dense explicit basis inverse with
// periodic refactorization. Deterministic: all ties break on lowest index.

#include <cstdint>
#include <memory>
#include <vector>

#include "mspeu/milp/model.hpp"

namespace mspeu::milp {

enum class LpStatus { Optimal, Infeasible, Unbounded };

/// Basis snapshot for warm starts. `basic` holds one internal column index per
/// row; `at_upper[j]` marks nonbasic columns resting at their upper bound.
/// Internal columns are structurals 0..n-1 followed by one logical per row.
struct LpBasis {
    std::vector<int> basic;
    std::vector<std::uint8_t> at_upper;
};

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    double objective = 0.0;        // model sense
    std::vector<double> x;         // structural variable values
    std::int64_t iterations = 0;
    std::shared_ptr<LpBasis> basis; // only set when status == Optimal
};

/// Solves the LP relaxation with `lb`/`ub` replacing the model's bounds
/// (callers pass the model bounds possibly tightened by branching).
/// A warm basis is attempted when supplied and silently discarded when it no
/// longer yields a primal-feasible starting point.
LpResult solve_lp(const MilpModel& model,
                  const std::vector<double>& lb,
                  const std::vector<double>& ub,
                  const SolveParams& params,
                  const LpBasis* warm = nullptr);

} // namespace mspeu::milp
