#pragma once

// Exact backward algorithm for the C = 0 special case: per-(node,
// distribution) group subproblems from the second-last stage down to the
// root, then a forward pass that extracts a full per-node policy.

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "mspeu/milp/model.hpp"
#include "mspeu/mspeu_model.hpp"

namespace mspeu {

/// Optimal child-set expectations Phi_{nd}. Infeasible branches carry -inf,
/// unbounded ones +inf.
using PhiTable = std::map<std::pair<NodeId, DistId>, double>;

struct BackwardResult {
    SolStatus status = SolStatus::Infeasible;
    double z = 0.0;
    PhiTable phi;
    BigMTable bigm;                         // echo of the table used, for re-solves
    std::vector<double> root_x;
    int root_dist = -1;
    double root_theta = 0.0;
    std::int64_t subproblem_count = 0;      // always sum |D_n| over non-leaf nodes, plus 1
    double subproblem_time_s = 0.0;
    std::vector<std::pair<int, double>> stage_time_s; // (stage, seconds), backward order
};

/// Requires problem.c_is_zero. The big-M table feeds the theta rows of every
/// group subproblem above the second-last stage and of the root problem.
BackwardResult solve_backward(const MspeuProblem& problem, const BigMTable& bigm,
                              const milp::SolveParams& params = {});

/// Forward pass: re-solves the group subproblems along the chosen
/// distributions, records every reached node's decisions, and fills nodes off
/// the policy with a feasible completion (marked on_policy = 0). Throws when a
/// re-solve disagrees with the stored Phi beyond tolerance.
MspeuSolution extract_policy(const MspeuProblem& problem, const BackwardResult& result,
                             const milp::SolveParams& params = {});

} // namespace mspeu
