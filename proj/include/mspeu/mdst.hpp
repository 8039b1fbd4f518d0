#pragma once

// Multi-distribution scenario trees: every non-leaf node carries a finite set
// of candidate child distributions; decisions made at the node select which
// one governs the next stage.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mspeu {

using NodeId = int;
using DistId = int;

/// Absolute tolerance for probability-conservation checks. Instance
/// probabilities are short products of rationals, so this is generous.
inline constexpr double kProbTol = 1e-9;

/// A multi-distribution scenario tree.
///
/// Node ids are dense 0..num_nodes()-1 in breadth-first order (root = 0),
/// so all per-node data lives in flat arrays. Probabilities are
/// unconditional: prob[0] = 1 and, for every node n and distribution d with
/// a nonempty child set, the child probabilities sum to prob[n].
///
/// Leaves normally carry zero distributions, but a leaf may declare |D_n| >= 1
/// with empty child lists when the attached problem places delta variables at
/// the last stage. Immutable by convention once built.
struct Mdst {
    int num_stages = 0;                                // T >= 1
    std::vector<int> stage;                            // t(n), in 1..T
    std::vector<NodeId> parent;                        // a(n); -1 at the root
    std::vector<double> prob;                          // pi_n, in (0,1]
    std::vector<std::vector<std::vector<NodeId>>> children; // [n][d] -> N_{nd}

    int num_nodes() const { return static_cast<int>(stage.size()); }
    int num_dists(NodeId n) const { return static_cast<int>(children[n].size()); }
    bool is_leaf(NodeId n) const { return stage[n] == num_stages; }
    const std::vector<NodeId>& kids(NodeId n, DistId d) const { return children[n][d]; }

    /// Nodes at a given stage, in id order.
    std::vector<NodeId> nodes_at_stage(int t) const;

    /// Leaf count (nodes at stage T).
    int num_leaves() const;
};

struct TreeViolation {
    std::string code;      // e.g. "probability_conservation", "stage_consistency"
    NodeId node = -1;
    DistId dist = -1;
    double magnitude = 0.0;
    std::string message;
};

struct ValidationReport {
    std::vector<TreeViolation> violations;
    bool valid() const { return violations.empty(); }
};

struct SizeReport {
    std::int64_t node_form_vars = 0;
    std::int64_t node_form_cons = 0;
    std::int64_t scenario_count = 0;
    std::int64_t scenario_form_vars = 0;
    std::int64_t scenario_form_cons = 0;
    std::int64_t nac_count_estimate = 0;
};

/// Builds the uniform tree with `dists_per_node` distributions at every
/// non-leaf node and `realizations_per_dist` children per distribution, so
/// stage t holds (D*S)^(t-1) nodes. Child probabilities follow `child_probs`
/// (length S, summing to 1) when given, else the uniform rule pi_parent / S.
/// Throws CapacityError when the node count would exceed `node_cap`.
Mdst build_uniform_tree(int num_stages, int dists_per_node, int realizations_per_dist,
                        const std::optional<std::vector<double>>& child_probs = std::nullopt,
                        std::int64_t node_cap = 10'000'000);

/// Checks every structural invariant; violations are data, not failures.
ValidationReport validate(const Mdst& tree);

/// Node-formulation vs scenario-formulation size comparison for a tree whose
/// nodes each carry `vars_per_node` decision variables and `cons_per_node`
/// constraints. The NAC estimate uses one pairwise-to-representative chain
/// per information set.
SizeReport size_report(const Mdst& tree, int vars_per_node, int cons_per_node);

/// Root-to-leaf paths, one per leaf, ordered by leaf id.
std::vector<std::vector<NodeId>> scenarios(const Mdst& tree);

} // namespace mspeu
