#include "mspeu/mdst.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mspeu/errors.hpp"

namespace mspeu {

std::vector<NodeId> Mdst::nodes_at_stage(int t) const {
    std::vector<NodeId> out;
    for (NodeId n = 0; n < num_nodes(); ++n)
        if (stage[n] == t) out.push_back(n);
    return out;
}

int Mdst::num_leaves() const {
    int c = 0;
    for (NodeId n = 0; n < num_nodes(); ++n)
        if (is_leaf(n)) ++c;
    return c;
}

Mdst build_uniform_tree(int num_stages, int dists_per_node, int realizations_per_dist,
                        const std::optional<std::vector<double>>& child_probs,
                        std::int64_t node_cap) {
    if (num_stages < 1) throw Error("build_uniform_tree: num_stages must be >= 1");
    if (dists_per_node < 1) throw Error("build_uniform_tree: dists_per_node must be >= 1");
    if (realizations_per_dist < 1) throw Error("build_uniform_tree: realizations_per_dist must be >= 1");
    if (child_probs) {
        if (static_cast<int>(child_probs->size()) != realizations_per_dist)
            throw Error("build_uniform_tree: child_probs length must equal realizations_per_dist");
        double s = std::accumulate(child_probs->begin(), child_probs->end(), 0.0);
        if (std::abs(s - 1.0) > kProbTol)
            throw Error("build_uniform_tree: child_probs must sum to 1");
        for (double p : *child_probs)
            if (p <= 0.0) throw Error("build_uniform_tree: child_probs must be positive");
    }

    // |N| = sum_{t=1..T} (D*S)^(t-1); overflow-checked against the cap.
    const std::int64_t branch = static_cast<std::int64_t>(dists_per_node) * realizations_per_dist;
    std::int64_t total = 0, level = 1;
    for (int t = 1; t <= num_stages; ++t) {
        total += level;
        if (total > node_cap)
            throw CapacityError("build_uniform_tree: node count exceeds cap of " +
                                std::to_string(node_cap));
        if (t < num_stages) {
            if (level > node_cap / branch + 1)
                throw CapacityError("build_uniform_tree: node count exceeds cap of " +
                                    std::to_string(node_cap));
            level *= branch;
        }
    }

    Mdst tree;
    tree.num_stages = num_stages;
    tree.stage.reserve(total);
    tree.parent.reserve(total);
    tree.prob.reserve(total);
    tree.children.reserve(total);

    tree.stage.push_back(1);
    tree.parent.push_back(-1);
    tree.prob.push_back(1.0);
    tree.children.emplace_back();

    // Breadth-first: children of node n get consecutive ids.
    for (NodeId n = 0; n < static_cast<NodeId>(tree.stage.size()); ++n) {
        if (tree.stage[n] == num_stages) continue;
        tree.children[n].resize(dists_per_node);
        for (DistId d = 0; d < dists_per_node; ++d) {
            for (int s = 0; s < realizations_per_dist; ++s) {
                NodeId child = static_cast<NodeId>(tree.stage.size());
                tree.stage.push_back(tree.stage[n] + 1);
                tree.parent.push_back(n);
                double p = child_probs ? tree.prob[n] * (*child_probs)[s]
                                       : tree.prob[n] / realizations_per_dist;
                tree.prob.push_back(p);
                tree.children.emplace_back();
                tree.children[n][d].push_back(child);
            }
        }
    }
    return tree;
}

namespace {

void add_violation(ValidationReport& rep, std::string code, NodeId n, DistId d,
                   double mag, std::string msg) {
    rep.violations.push_back({std::move(code), n, d, mag, std::move(msg)});
}

} // namespace

ValidationReport validate(const Mdst& tree) {
    ValidationReport rep;
    const int N = tree.num_nodes();
    if (N == 0) {
        add_violation(rep, "empty_tree", -1, -1, 0.0, "tree has no nodes");
        return rep;
    }
    if (tree.num_stages < 1)
        add_violation(rep, "bad_stage_count", -1, -1, tree.num_stages, "num_stages must be >= 1");
    if (static_cast<int>(tree.parent.size()) != N ||
        static_cast<int>(tree.prob.size()) != N ||
        static_cast<int>(tree.children.size()) != N) {
        add_violation(rep, "ragged_arrays", -1, -1, 0.0, "per-node arrays have inconsistent lengths");
        return rep;
    }

    if (tree.parent[0] != -1)
        add_violation(rep, "root_parent", 0, -1, tree.parent[0], "root must have no parent");
    if (std::abs(tree.prob[0] - 1.0) > kProbTol)
        add_violation(rep, "root_probability", 0, -1, tree.prob[0] - 1.0, "pi_0 must equal 1");
    if (tree.stage[0] != 1)
        add_violation(rep, "root_stage", 0, -1, tree.stage[0], "root must be at stage 1");

    for (NodeId n = 0; n < N; ++n) {
        if (tree.stage[n] < 1 || tree.stage[n] > tree.num_stages)
            add_violation(rep, "stage_range", n, -1, tree.stage[n],
                          "stage outside 1..T at node " + std::to_string(n));
        if (tree.prob[n] <= 0.0 || tree.prob[n] > 1.0 + kProbTol)
            add_violation(rep, "probability_range", n, -1, tree.prob[n],
                          "pi_n outside (0,1] at node " + std::to_string(n));
    }

    // Child bookkeeping: membership counts, stage steps, conservation.
    std::vector<int> times_child(N, 0);
    for (NodeId n = 0; n < N; ++n) {
        const bool leaf = tree.stage[n] == tree.num_stages;
        if (!leaf && tree.num_dists(n) == 0)
            add_violation(rep, "missing_distributions", n, -1, 0.0,
                          "non-leaf node " + std::to_string(n) + " has no distributions");
        for (DistId d = 0; d < tree.num_dists(n); ++d) {
            const auto& kids = tree.children[n][d];
            if (leaf) {
                if (!kids.empty())
                    add_violation(rep, "leaf_with_children", n, d, static_cast<double>(kids.size()),
                                  "stage-T node " + std::to_string(n) + " has children");
                continue;
            }
            if (kids.empty()) {
                add_violation(rep, "empty_distribution", n, d, 0.0,
                              "non-leaf node " + std::to_string(n) + " distribution " +
                                  std::to_string(d) + " has no realizations");
                continue;
            }
            double sum = 0.0;
            for (NodeId m : kids) {
                if (m < 0 || m >= N) {
                    add_violation(rep, "child_out_of_range", n, d, m, "child id out of range");
                    continue;
                }
                ++times_child[m];
                sum += tree.prob[m];
                if (tree.parent[m] != n)
                    add_violation(rep, "parent_mismatch", m, d, tree.parent[m],
                                  "node " + std::to_string(m) + " is listed as a child of " +
                                      std::to_string(n) + " but points to parent " +
                                      std::to_string(tree.parent[m]));
                if (tree.stage[m] != tree.stage[n] + 1)
                    add_violation(rep, "stage_consistency", m, d,
                                  tree.stage[m] - tree.stage[n],
                                  "stage(child) != stage(parent)+1 at node " + std::to_string(m));
            }
            if (std::abs(sum - tree.prob[n]) > kProbTol)
                add_violation(rep, "probability_conservation", n, d, sum - tree.prob[n],
                              "children of node " + std::to_string(n) + " under distribution " +
                                  std::to_string(d) + " sum to " + std::to_string(sum) +
                                  " instead of " + std::to_string(tree.prob[n]));
        }
    }
    for (NodeId n = 1; n < N; ++n)
        if (times_child[n] != 1)
            add_violation(rep, "child_multiplicity", n, -1, times_child[n],
                          "non-root node " + std::to_string(n) + " appears in " +
                              std::to_string(times_child[n]) + " child lists");

    // Reachability from the root; combined with child multiplicity this also
    // rules out cycles.
    std::vector<char> seen(N, 0);
    std::vector<NodeId> queue{0};
    seen[0] = 1;
    for (std::size_t q = 0; q < queue.size(); ++q) {
        NodeId n = queue[q];
        for (DistId d = 0; d < tree.num_dists(n); ++d)
            for (NodeId m : tree.children[n][d])
                if (m >= 0 && m < N && !seen[m]) {
                    seen[m] = 1;
                    queue.push_back(m);
                }
    }
    for (NodeId n = 0; n < N; ++n)
        if (!seen[n])
            add_violation(rep, "unreachable", n, -1, 0.0,
                          "node " + std::to_string(n) + " is not reachable from the root");
    return rep;
}

SizeReport size_report(const Mdst& tree, int vars_per_node, int cons_per_node) {
    SizeReport rep;
    const int N = tree.num_nodes();
    const int T = tree.num_stages;
    rep.node_form_vars = static_cast<std::int64_t>(vars_per_node) * N;
    rep.node_form_cons = static_cast<std::int64_t>(cons_per_node) * N;

    // Leaf multiplicity per node = number of scenarios passing through it.
    std::vector<std::int64_t> mult(N, 0);
    for (NodeId n = N - 1; n >= 0; --n) {
        if (tree.is_leaf(n)) {
            mult[n] = 1;
            continue;
        }
        for (DistId d = 0; d < tree.num_dists(n); ++d)
            for (NodeId m : tree.children[n][d]) mult[n] += mult[m];
    }
    rep.scenario_count = tree.num_leaves();
    rep.scenario_form_vars = static_cast<std::int64_t>(vars_per_node) * rep.scenario_count * T;
    rep.scenario_form_cons = static_cast<std::int64_t>(cons_per_node) * rep.scenario_count * T;

    // One pairwise-to-representative NAC chain per information set: a stage-t
    // node traversed by k scenarios contributes k-1 equalities per variable.
    std::int64_t chains = 0;
    for (NodeId n = 0; n < N; ++n)
        if (tree.stage[n] < T && mult[n] > 0) chains += mult[n] - 1;
    rep.nac_count_estimate = static_cast<std::int64_t>(vars_per_node) * chains;
    return rep;
}

std::vector<std::vector<NodeId>> scenarios(const Mdst& tree) {
    std::vector<std::vector<NodeId>> paths;
    for (NodeId n = 0; n < tree.num_nodes(); ++n) {
        if (!tree.is_leaf(n)) continue;
        std::vector<NodeId> path;
        for (NodeId m = n; m != -1; m = tree.parent[m]) path.push_back(m);
        std::reverse(path.begin(), path.end());
        paths.push_back(std::move(path));
    }
    return paths;
}

} // namespace mspeu
