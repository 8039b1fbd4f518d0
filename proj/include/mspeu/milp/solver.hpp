#pragma once

// Exact branch-and-bound over the bounded-variable simplex. Branching picks
// the most fractional integer variable (ties: lowest index); node selection is
// best-bound (ties: greater depth, then insertion order). Deterministic for
// fixed inputs.

#include "mspeu/milp/model.hpp"

namespace mspeu::milp {

/// Solves to proven optimality within the configured gap. Routes through an
/// external solver instead when params.solver_override (or the MSPEU_SOLVER
/// environment variable) is set to "external:<command>".
MilpSolution solve(const MilpModel& model, const SolveParams& params = {});

/// Solves the LP relaxation (integrality dropped).
MilpSolution lp_relax_solve(const MilpModel& model, const SolveParams& params = {});

} // namespace mspeu::milp
