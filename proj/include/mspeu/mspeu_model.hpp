#pragma once

// Generic multistage stochastic program with endogenous uncertainty over an
// MDST: per-node coefficient blocks, the linearized monolithic MILP builder,
// an independent solution evaluator, and a brute-force enumeration oracle.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mspeu/mdst.hpp"
#include "mspeu/milp/model.hpp"

namespace mspeu {

struct VarDomain {
    double lb = 0.0;
    double ub = milp::kInf;
    bool integral = false;
};

/// Per-node data of the generic form. Row/column dimensions are per stage:
/// every node at one stage carries the same number of decision variables and
/// linking rows. Parent-to-child coupling matrices are stored on the parent
/// (they apply in every child's rows).
struct NodeBlock {
    std::vector<double> r;                       // objective coeffs of x_n
    std::vector<double> q;                       // objective coeffs of delta_{nd}
    std::vector<std::vector<double>> A;          // rows x n_x
    std::vector<std::vector<double>> B;          // rows x |D_n|
    std::vector<std::vector<double>> C_to_children; // child rows x n_x
    std::vector<std::vector<double>> D_to_children; // child rows x |D_n|
    std::vector<double> h;                       // rhs, length rows
    double theta_terminal = 0.0;                 // leaves only
    std::vector<VarDomain> domains;              // length n_x

    int num_x() const { return static_cast<int>(r.size()); }
    int num_rows() const { return static_cast<int>(h.size()); }
};

struct MspeuProblem {
    Mdst tree;
    std::vector<NodeBlock> blocks; // by node id
    bool c_is_zero = false;

    const NodeBlock& block(NodeId n) const { return blocks[n]; }
};

/// Structural and dimensional consistency report; empty = valid. Also checks
/// that c_is_zero matches the stored coupling matrices.
std::vector<std::string> validate_problem(const MspeuProblem& problem);

/// Big-M constants keyed by (node, distribution).
class BigMTable {
public:
    void set(NodeId n, DistId d, double value) { entries_[{n, d}] = value; }
    bool has(NodeId n, DistId d) const { return entries_.count({n, d}) > 0; }
    double at(NodeId n, DistId d) const;
    const std::map<std::pair<NodeId, DistId>, double>& entries() const { return entries_; }
    std::map<std::pair<NodeId, DistId>, double>& entries() { return entries_; }

    BigMTable scaled(double factor) const;

private:
    std::map<std::pair<NodeId, DistId>, double> entries_;
};

enum class SolStatus { Optimal, Infeasible, Unbounded, Limit };

struct MspeuSolution {
    SolStatus status = SolStatus::Infeasible;
    std::vector<std::vector<double>> x;      // per node
    std::vector<std::vector<double>> delta;  // per node, length |D_n|
    std::vector<double> theta;               // per node
    std::vector<char> on_policy;             // per node; always 1 for full solves
    double objective = 0.0;

    /// Index of the unique distribution with delta = 1, or -1 when |D_n| = 0.
    int chosen(NodeId n) const;
};

/// Builds the linearized monolithic MILP: one binary delta per (node,
/// distribution), per-node x vectors and free theta, choice rows, linking
/// rows with parent coupling, big-M bound rows at non-leaf nodes and fixed
/// theta at leaves. Variable names follow x_<n>_<j>, delta_<n>_<d>, theta_<n>.
milp::MilpModel build_node_formulation(const MspeuProblem& problem, const BigMTable& bigm);

struct EvalReport {
    double objective = 0.0;
    bool feasible = false;
    std::vector<std::string> violations;
};

/// Independent oracle: recomputes the objective by the direct expectation
/// recursion (no big-M anywhere) and checks choice rows, linking rows and
/// domains within `tol`. The objective is reported even when infeasible.
EvalReport evaluate_solution(const MspeuProblem& problem, const MspeuSolution& sol,
                             double tol = 1e-6);

struct OracleParams {
    std::int64_t assignment_cap = 100'000;   // max product of |D_n| over non-leaf nodes
    int max_node_int_vars = 12;              // per-node MILP size guard
};

/// Ground truth for C = 0 problems: exhaustively enumerates one distribution
/// choice per non-leaf node; per assignment the node subproblems decouple and
/// are solved independently, and the expectation recursion composes the total.
/// Provably optimal, independent of any big-M value.
MspeuSolution enumerate_oracle(const MspeuProblem& problem, const OracleParams& params = {});

/// Unpacks a monolithic solve of build_node_formulation's model back into
/// per-node vectors via the stable variable names.
MspeuSolution solution_from_milp(const MspeuProblem& problem, const milp::MilpModel& model,
                                 const milp::MilpSolution& milp_sol);

struct NodeSubResult {
    bool feasible = false;
    double value = 0.0;             // r'x plus q'delta when delta is local
    std::vector<double> x;
    std::vector<double> delta;      // filled when delta was optimized locally
};

/// Solves one node's decoupled subproblem (valid for C = 0 problems): the
/// node's linking rows with the parent's distribution fixed to parent_choice
/// (-1 at the root). own_choice >= 0 pins this node's delta and moves its B
/// column to the rhs; own_choice = -1 leaves delta as local binary variables.
NodeSubResult solve_node_subproblem(const MspeuProblem& problem, NodeId n, DistId parent_choice,
                                    DistId own_choice, const milp::SolveParams& params = {});

enum class CountConvention { AllVars, TableConvention };

struct ModelCounts {
    std::int64_t vars = 0;
    std::int64_t bins = 0;
    std::int64_t cons = 0;
    bool operator==(const ModelCounts&) const = default;
};

/// AllVars counts every variable and row of the linearized model. The table
/// convention instead counts, per node, |I|^2 binaries, |I|^2+|I|+1 variables
/// and 3|I|+3 constraints; it requires a uniform distribution count |I| at
/// every node and throws ConventionError otherwise.
ModelCounts count_model(const MspeuProblem& problem, CountConvention convention);

} // namespace mspeu
