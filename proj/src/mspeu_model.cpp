#include "mspeu/mspeu_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mspeu/errors.hpp"
#include "mspeu/milp/solver.hpp"

namespace mspeu {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string node_tag(NodeId n) { return "node " + std::to_string(n); }

} // namespace

double BigMTable::at(NodeId n, DistId d) const {
    auto it = entries_.find({n, d});
    if (it == entries_.end())
        throw Error("big-M table has no entry for node " + std::to_string(n) +
                    " distribution " + std::to_string(d));
    return it->second;
}

BigMTable BigMTable::scaled(double factor) const {
    BigMTable out;
    for (const auto& [key, v] : entries_) out.entries()[key] = v * factor;
    return out;
}

int MspeuSolution::chosen(NodeId n) const {
    const auto& d = delta[n];
    if (d.empty()) return -1;
    int arg = 0;
    for (int k = 1; k < static_cast<int>(d.size()); ++k)
        if (d[k] > d[arg]) arg = k;
    return arg;
}

std::vector<std::string> validate_problem(const MspeuProblem& problem) {
    std::vector<std::string> issues;
    const Mdst& tree = problem.tree;
    auto tree_rep = validate(tree);
    for (const auto& v : tree_rep.violations) issues.push_back("tree: " + v.message);
    if (static_cast<int>(problem.blocks.size()) != tree.num_nodes()) {
        issues.push_back("blocks count differs from node count");
        return issues;
    }

    // Per-stage dimensions must agree.
    std::vector<int> stage_nx(tree.num_stages + 1, -1), stage_rows(tree.num_stages + 1, -1);
    for (NodeId n = 0; n < tree.num_nodes(); ++n) {
        const NodeBlock& b = problem.blocks[n];
        const int t = tree.stage[n];
        if (stage_nx[t] < 0) stage_nx[t] = b.num_x();
        else if (stage_nx[t] != b.num_x())
            issues.push_back(node_tag(n) + ": x dimension differs from others at its stage");
        if (stage_rows[t] < 0) stage_rows[t] = b.num_rows();
        else if (stage_rows[t] != b.num_rows())
            issues.push_back(node_tag(n) + ": row count differs from others at its stage");

        if (static_cast<int>(b.domains.size()) != b.num_x())
            issues.push_back(node_tag(n) + ": domains length != x dimension");
        for (const auto& dom : b.domains)
            if (dom.lb > dom.ub) issues.push_back(node_tag(n) + ": domain lower > upper");
        if (static_cast<int>(b.q.size()) != tree.num_dists(n))
            issues.push_back(node_tag(n) + ": q length != |D_n|");
        if (static_cast<int>(b.A.size()) != b.num_rows())
            issues.push_back(node_tag(n) + ": A row count != h length");
        for (const auto& row : b.A)
            if (static_cast<int>(row.size()) != b.num_x())
                issues.push_back(node_tag(n) + ": A column count != x dimension");
        if (static_cast<int>(b.B.size()) != b.num_rows())
            issues.push_back(node_tag(n) + ": B row count != h length");
        for (const auto& row : b.B)
            if (static_cast<int>(row.size()) != tree.num_dists(n))
                issues.push_back(node_tag(n) + ": B column count != |D_n|");
    }

    // Edge consistency of the coupling matrices, and the c_is_zero flag.
    bool any_c = false;
    for (NodeId n = 0; n < tree.num_nodes(); ++n) {
        const NodeBlock& b = problem.blocks[n];
        if (tree.is_leaf(n)) {
            if (!b.C_to_children.empty() || !b.D_to_children.empty())
                issues.push_back(node_tag(n) + ": leaf carries coupling matrices");
            continue;
        }
        int child_rows = -1;
        for (DistId d = 0; d < tree.num_dists(n); ++d)
            for (NodeId m : tree.kids(n, d)) child_rows = problem.blocks[m].num_rows();
        if (child_rows < 0) continue;
        if (!b.C_to_children.empty()) {
            if (static_cast<int>(b.C_to_children.size()) != child_rows)
                issues.push_back(node_tag(n) + ": C_to_children row count != child rows");
            for (const auto& row : b.C_to_children) {
                if (static_cast<int>(row.size()) != b.num_x())
                    issues.push_back(node_tag(n) + ": C_to_children column count != x dimension");
                for (double v : row)
                    if (v != 0.0) any_c = true;
            }
        }
        if (!b.D_to_children.empty()) {
            if (static_cast<int>(b.D_to_children.size()) != child_rows)
                issues.push_back(node_tag(n) + ": D_to_children row count != child rows");
            for (const auto& row : b.D_to_children)
                if (static_cast<int>(row.size()) != tree.num_dists(n))
                    issues.push_back(node_tag(n) + ": D_to_children column count != |D_n|");
        }
    }
    if (problem.c_is_zero && any_c)
        issues.push_back("c_is_zero is set but a nonzero C_to_children entry exists");
    if (!problem.c_is_zero && !any_c)
        issues.push_back("c_is_zero is unset but every C_to_children entry is zero");
    return issues;
}

milp::MilpModel build_node_formulation(const MspeuProblem& problem, const BigMTable& bigm) {
    using namespace milp;
    const Mdst& tree = problem.tree;
    const int N = tree.num_nodes();

    auto issues = validate_problem(problem);
    if (!issues.empty())
        throw DimensionError("build_node_formulation: " + issues.front());

    MilpModel model;
    model.set_sense(Sense::Max);
    std::vector<int> x0(N), d0(N), th(N);
    for (NodeId n = 0; n < N; ++n) {
        const NodeBlock& b = problem.blocks[n];
        x0[n] = model.num_vars();
        for (int j = 0; j < b.num_x(); ++j) {
            const VarDomain& dom = b.domains[j];
            model.add_var("x_" + std::to_string(n) + "_" + std::to_string(j), dom.lb, dom.ub,
                          dom.integral);
        }
        d0[n] = model.num_vars();
        for (DistId d = 0; d < tree.num_dists(n); ++d)
            model.add_var("delta_" + std::to_string(n) + "_" + std::to_string(d), 0.0, 1.0, true);
        th[n] = model.add_var("theta_" + std::to_string(n), -kInf, kInf, false);
    }

    // Objective: root reward plus the root expectation variable.
    {
        const NodeBlock& b = problem.blocks[0];
        for (int j = 0; j < b.num_x(); ++j) model.set_obj(x0[0] + j, b.r[j]);
        for (DistId d = 0; d < tree.num_dists(0); ++d) model.set_obj(d0[0] + d, b.q[d]);
        model.set_obj(th[0], 1.0);
    }

    for (NodeId n = 0; n < N; ++n) {
        const NodeBlock& b = problem.blocks[n];
        // Choice row.
        if (tree.num_dists(n) >= 1) {
            std::vector<std::pair<int, double>> coeffs;
            for (DistId d = 0; d < tree.num_dists(n); ++d) coeffs.push_back({d0[n] + d, 1.0});
            model.add_row("choice_" + std::to_string(n), std::move(coeffs), Rel::Eq, 1.0);
        }
        // Linking rows with parent coupling.
        const NodeId p = tree.parent[n];
        const NodeBlock* pb = p >= 0 ? &problem.blocks[p] : nullptr;
        for (int i = 0; i < b.num_rows(); ++i) {
            std::vector<std::pair<int, double>> coeffs;
            for (int j = 0; j < b.num_x(); ++j)
                if (b.A[i][j] != 0.0) coeffs.push_back({x0[n] + j, b.A[i][j]});
            for (DistId d = 0; d < tree.num_dists(n); ++d)
                if (b.B[i][d] != 0.0) coeffs.push_back({d0[n] + d, b.B[i][d]});
            if (pb) {
                if (!pb->C_to_children.empty())
                    for (int j = 0; j < pb->num_x(); ++j)
                        if (pb->C_to_children[i][j] != 0.0)
                            coeffs.push_back({x0[p] + j, pb->C_to_children[i][j]});
                if (!pb->D_to_children.empty())
                    for (DistId d = 0; d < tree.num_dists(p); ++d)
                        if (pb->D_to_children[i][d] != 0.0)
                            coeffs.push_back({d0[p] + d, pb->D_to_children[i][d]});
            }
            model.add_row("link_" + std::to_string(n) + "_" + std::to_string(i), std::move(coeffs),
                          Rel::Eq, b.h[i]);
        }
        // Expectation bounds at non-leaf nodes, fixed theta at leaves.
        if (!tree.is_leaf(n)) {
            for (DistId d = 0; d < tree.num_dists(n); ++d) {
                const double m_val = bigm.at(n, d);
                std::vector<std::pair<int, double>> coeffs;
                coeffs.push_back({th[n], 1.0});
                for (NodeId m : tree.kids(n, d)) {
                    const NodeBlock& cb = problem.blocks[m];
                    const double pi = tree.prob[m];
                    for (int j = 0; j < cb.num_x(); ++j)
                        if (cb.r[j] != 0.0) coeffs.push_back({x0[m] + j, -pi * cb.r[j]});
                    for (DistId dd = 0; dd < tree.num_dists(m); ++dd)
                        if (cb.q[dd] != 0.0) coeffs.push_back({d0[m] + dd, -pi * cb.q[dd]});
                    coeffs.push_back({th[m], -pi});
                }
                coeffs.push_back({d0[n] + d, m_val});
                model.add_row("thetabound_" + std::to_string(n) + "_" + std::to_string(d),
                              std::move(coeffs), Rel::Le, m_val);
            }
        } else {
            model.add_row("thetafix_" + std::to_string(n), {{th[n], 1.0}}, Rel::Eq,
                          b.theta_terminal);
        }
    }
    return model;
}

EvalReport evaluate_solution(const MspeuProblem& problem, const MspeuSolution& sol, double tol) {
    EvalReport rep;
    const Mdst& tree = problem.tree;
    const int N = tree.num_nodes();
    if (static_cast<int>(sol.x.size()) != N || static_cast<int>(sol.delta.size()) != N) {
        rep.violations.push_back("solution arrays do not match node count");
        return rep;
    }

    for (NodeId n = 0; n < N; ++n) {
        const NodeBlock& b = problem.blocks[n];
        if (static_cast<int>(sol.x[n].size()) != b.num_x()) {
            rep.violations.push_back(node_tag(n) + ": x dimension mismatch");
            return rep;
        }
        if (static_cast<int>(sol.delta[n].size()) != tree.num_dists(n)) {
            rep.violations.push_back(node_tag(n) + ": delta dimension mismatch");
            return rep;
        }
        // Choice row (1b) plus binarity.
        if (tree.num_dists(n) >= 1) {
            double s = 0.0;
            for (double v : sol.delta[n]) {
                s += v;
                if (std::min(std::abs(v), std::abs(v - 1.0)) > tol)
                    rep.violations.push_back(node_tag(n) + ": delta not binary (eq 1f)");
            }
            if (std::abs(s - 1.0) > tol)
                rep.violations.push_back(node_tag(n) + ": delta sum != 1 (eq 1b)");
        }
        // Domains (1e).
        for (int j = 0; j < b.num_x(); ++j) {
            const VarDomain& dom = b.domains[j];
            const double v = sol.x[n][j];
            if (v < dom.lb - tol || v > dom.ub + tol)
                rep.violations.push_back(node_tag(n) + ": x[" + std::to_string(j) +
                                         "] outside bounds");
            if (dom.integral && std::abs(v - std::round(v)) > tol)
                rep.violations.push_back(node_tag(n) + ": x[" + std::to_string(j) +
                                         "] not integral");
        }
        // Linking rows.
        const NodeId p = tree.parent[n];
        for (int i = 0; i < b.num_rows(); ++i) {
            double act = 0.0;
            for (int j = 0; j < b.num_x(); ++j) act += b.A[i][j] * sol.x[n][j];
            for (DistId d = 0; d < tree.num_dists(n); ++d) act += b.B[i][d] * sol.delta[n][d];
            if (p >= 0) {
                const NodeBlock& pb = problem.blocks[p];
                if (!pb.C_to_children.empty())
                    for (int j = 0; j < pb.num_x(); ++j)
                        act += pb.C_to_children[i][j] * sol.x[p][j];
                if (!pb.D_to_children.empty())
                    for (DistId d = 0; d < tree.num_dists(p); ++d)
                        act += pb.D_to_children[i][d] * sol.delta[p][d];
            }
            if (std::abs(act - b.h[i]) > tol * (1.0 + std::abs(b.h[i])))
                rep.violations.push_back(node_tag(n) + ": linking row " + std::to_string(i) +
                                         " violated by " + std::to_string(act - b.h[i]));
        }
    }

    // Objective by the direct expectation recursion, leaves upward.
    std::vector<double> theta_eval(N, 0.0);
    for (int t = tree.num_stages; t >= 1; --t) {
        for (NodeId n : tree.nodes_at_stage(t)) {
            if (tree.is_leaf(n)) {
                theta_eval[n] = problem.blocks[n].theta_terminal;
                continue;
            }
            double v = 0.0;
            for (DistId d = 0; d < tree.num_dists(n); ++d) {
                const double w = sol.delta[n][d];
                if (w == 0.0) continue;
                double inner = 0.0;
                for (NodeId m : tree.kids(n, d)) {
                    const NodeBlock& cb = problem.blocks[m];
                    double node_term = 0.0;
                    for (int j = 0; j < cb.num_x(); ++j) node_term += cb.r[j] * sol.x[m][j];
                    for (DistId dd = 0; dd < tree.num_dists(m); ++dd)
                        node_term += cb.q[dd] * sol.delta[m][dd];
                    inner += tree.prob[m] * (node_term + theta_eval[m]);
                }
                v += w * inner;
            }
            theta_eval[n] = v;
        }
    }
    const NodeBlock& rb = problem.blocks[0];
    double z = theta_eval[0];
    for (int j = 0; j < rb.num_x(); ++j) z += rb.r[j] * sol.x[0][j];
    for (DistId d = 0; d < tree.num_dists(0); ++d) z += rb.q[d] * sol.delta[0][d];
    rep.objective = z;
    rep.feasible = rep.violations.empty();
    return rep;
}

NodeSubResult solve_node_subproblem(const MspeuProblem& problem, NodeId n, DistId parent_choice,
                                    DistId own_choice, const milp::SolveParams& params) {
    using namespace milp;
    const Mdst& tree = problem.tree;
    const NodeBlock& b = problem.blocks[n];
    const bool local_delta = own_choice < 0 && tree.num_dists(n) >= 1;

    MilpModel model;
    model.set_sense(Sense::Max);
    for (int j = 0; j < b.num_x(); ++j) {
        const VarDomain& dom = b.domains[j];
        model.add_var("x" + std::to_string(j), dom.lb, dom.ub, dom.integral);
        model.set_obj(j, b.r[j]);
    }
    int dvar0 = -1;
    if (local_delta) {
        dvar0 = model.num_vars();
        for (DistId d = 0; d < tree.num_dists(n); ++d) {
            int idx = model.add_var("d" + std::to_string(d), 0.0, 1.0, true);
            model.set_obj(idx, b.q[d]);
        }
        std::vector<std::pair<int, double>> coeffs;
        for (DistId d = 0; d < tree.num_dists(n); ++d) coeffs.push_back({dvar0 + d, 1.0});
        model.add_row("choice", std::move(coeffs), Rel::Eq, 1.0);
    }
    const NodeId p = tree.parent[n];
    for (int i = 0; i < b.num_rows(); ++i) {
        double rhs = b.h[i];
        if (own_choice >= 0) rhs -= b.B[i][own_choice];
        if (p >= 0 && parent_choice >= 0) {
            const NodeBlock& pb = problem.blocks[p];
            if (!pb.D_to_children.empty()) rhs -= pb.D_to_children[i][parent_choice];
        }
        std::vector<std::pair<int, double>> coeffs;
        for (int j = 0; j < b.num_x(); ++j)
            if (b.A[i][j] != 0.0) coeffs.push_back({j, b.A[i][j]});
        if (local_delta)
            for (DistId d = 0; d < tree.num_dists(n); ++d)
                if (b.B[i][d] != 0.0) coeffs.push_back({dvar0 + d, b.B[i][d]});
        model.add_row("link" + std::to_string(i), std::move(coeffs), Rel::Eq, rhs);
    }

    NodeSubResult sub;
    MilpSolution sol = milp::solve(model, params);
    if (sol.status != Status::Optimal) return sub;
    sub.feasible = true;
    sub.value = sol.objective;
    sub.x.assign(sol.values.begin(), sol.values.begin() + b.num_x());
    if (local_delta) {
        sub.delta.resize(tree.num_dists(n));
        for (DistId d = 0; d < tree.num_dists(n); ++d)
            sub.delta[d] = std::round(sol.values[dvar0 + d]);
    }
    return sub;
}

MspeuSolution enumerate_oracle(const MspeuProblem& problem, const OracleParams& params) {
    const Mdst& tree = problem.tree;
    const int N = tree.num_nodes();
    if (!problem.c_is_zero)
        throw Error("enumerate_oracle requires c_is_zero");

    std::vector<NodeId> choosers; // non-leaf nodes, id order
    std::int64_t combos = 1;
    for (NodeId n = 0; n < N; ++n) {
        if (tree.is_leaf(n)) continue;
        choosers.push_back(n);
        if (combos > params.assignment_cap / std::max(1, tree.num_dists(n)) + 1)
            throw CapacityError("enumerate_oracle: assignment count exceeds cap");
        combos *= std::max(1, tree.num_dists(n));
        int ints = 0;
        for (const auto& dom : problem.blocks[n].domains) ints += dom.integral ? 1 : 0;
        if (ints > params.max_node_int_vars)
            throw CapacityError("enumerate_oracle: node MILP too large at " + node_tag(n));
    }
    if (combos > params.assignment_cap)
        throw CapacityError("enumerate_oracle: assignment count exceeds cap");

    // Memoized node subproblems per (parent choice, own choice). Parent choice
    // index -1 (the root) maps to slot 0 of a single-slot dimension.
    std::vector<std::vector<std::vector<NodeSubResult>>> memo(N);
    for (NodeId n = 0; n < N; ++n) {
        const NodeId p = tree.parent[n];
        const int pk = p >= 0 ? tree.num_dists(p) : 1;
        const int dk = tree.is_leaf(n) ? 1 : tree.num_dists(n);
        memo[n].assign(pk, std::vector<NodeSubResult>(dk));
        for (int k = 0; k < pk; ++k)
            for (int d = 0; d < dk; ++d)
                memo[n][k][d] = solve_node_subproblem(problem, n, p >= 0 ? k : -1,
                                               tree.is_leaf(n) ? -1 : d);
    }

    auto sub_of = [&](NodeId n, const std::vector<int>& choice) -> const NodeSubResult& {
        const NodeId p = tree.parent[n];
        const int k = p >= 0 ? choice[p] : 0;
        const int d = tree.is_leaf(n) ? 0 : choice[n];
        return memo[n][k][d];
    };

    MspeuSolution best;
    best.status = SolStatus::Infeasible;
    double best_z = kNegInf;
    std::vector<int> best_choice;

    std::vector<std::vector<NodeId>> by_stage(tree.num_stages + 1);
    for (NodeId n = 0; n < N; ++n) by_stage[tree.stage[n]].push_back(n);

    std::vector<int> choice(N, 0);
    std::vector<double> theta(N, 0.0);
    for (std::int64_t iter = 0; iter < combos; ++iter) {
        // Feasibility of every node (including off-path nodes).
        bool feasible = true;
        for (NodeId n = 0; n < N && feasible; ++n)
            feasible = sub_of(n, choice).feasible;
        if (feasible) {
            // Compose the expectation recursion over chosen child sets.
            for (int t = tree.num_stages; t >= 1; --t) {
                for (NodeId n : by_stage[t]) {
                    if (tree.is_leaf(n)) {
                        theta[n] = problem.blocks[n].theta_terminal;
                        continue;
                    }
                    double v = 0.0;
                    for (NodeId m : tree.kids(n, choice[n])) {
                        double node_term = sub_of(m, choice).value;
                        if (!tree.is_leaf(m) && tree.num_dists(m) >= 1)
                            node_term += problem.blocks[m].q[choice[m]];
                        v += tree.prob[m] * (node_term + theta[m]);
                    }
                    theta[n] = v;
                }
            }
            double z = sub_of(0, choice).value + theta[0];
            if (!tree.is_leaf(0) && tree.num_dists(0) >= 1)
                z += problem.blocks[0].q[choice[0]];
            if (z > best_z + 1e-12 || best_choice.empty()) {
                best_z = z;
                best_choice = choice;
            }
        }
        // Next assignment in lexicographic order over the chooser nodes.
        int pos = static_cast<int>(choosers.size()) - 1;
        while (pos >= 0) {
            NodeId n = choosers[pos];
            if (++choice[n] < tree.num_dists(n)) break;
            choice[n] = 0;
            --pos;
        }
        if (pos < 0) break;
    }

    if (best_choice.empty()) return best; // infeasible

    best.status = SolStatus::Optimal;
    best.objective = best_z;
    best.x.resize(N);
    best.delta.resize(N);
    best.theta.assign(N, 0.0);
    best.on_policy.assign(N, 1);
    for (NodeId n = 0; n < N; ++n) {
        const NodeSubResult& sub = sub_of(n, best_choice);
        best.x[n] = sub.x;
        best.delta[n].assign(tree.num_dists(n), 0.0);
        if (tree.is_leaf(n)) {
            if (tree.num_dists(n) >= 1) best.delta[n] = sub.delta;
        } else if (tree.num_dists(n) >= 1) {
            best.delta[n][best_choice[n]] = 1.0;
        }
    }
    for (int t = tree.num_stages; t >= 1; --t) {
        for (NodeId n : by_stage[t]) {
            if (tree.is_leaf(n)) {
                best.theta[n] = problem.blocks[n].theta_terminal;
                continue;
            }
            double v = 0.0;
            for (NodeId m : tree.kids(n, best_choice[n])) {
                double node_term = sub_of(m, best_choice).value;
                if (!tree.is_leaf(m) && tree.num_dists(m) >= 1)
                    node_term += problem.blocks[m].q[best_choice[m]];
                v += tree.prob[m] * (node_term + best.theta[m]);
            }
            best.theta[n] = v;
        }
    }
    return best;
}

MspeuSolution solution_from_milp(const MspeuProblem& problem, const milp::MilpModel& model,
                                 const milp::MilpSolution& milp_sol) {
    const Mdst& tree = problem.tree;
    MspeuSolution sol;
    sol.status = milp_sol.status == milp::Status::Optimal ? SolStatus::Optimal
                                                          : SolStatus::Infeasible;
    sol.objective = milp_sol.objective;
    sol.x.resize(tree.num_nodes());
    sol.delta.resize(tree.num_nodes());
    sol.theta.assign(tree.num_nodes(), 0.0);
    sol.on_policy.assign(tree.num_nodes(), 1);
    if (milp_sol.values.empty()) return sol;
    auto value_of = [&](const std::string& name) {
        const int idx = model.find_var(name);
        if (idx < 0) throw Error("solution_from_milp: model lacks variable " + name);
        return milp_sol.values[idx];
    };
    for (NodeId n = 0; n < tree.num_nodes(); ++n) {
        const NodeBlock& b = problem.blocks[n];
        sol.x[n].resize(b.num_x());
        for (int j = 0; j < b.num_x(); ++j)
            sol.x[n][j] = value_of("x_" + std::to_string(n) + "_" + std::to_string(j));
        sol.delta[n].resize(tree.num_dists(n));
        for (DistId d = 0; d < tree.num_dists(n); ++d)
            sol.delta[n][d] = value_of("delta_" + std::to_string(n) + "_" + std::to_string(d));
        sol.theta[n] = value_of("theta_" + std::to_string(n));
    }
    return sol;
}

ModelCounts count_model(const MspeuProblem& problem, CountConvention convention) {
    const Mdst& tree = problem.tree;
    const int N = tree.num_nodes();
    ModelCounts counts;
    if (convention == CountConvention::AllVars) {
        for (NodeId n = 0; n < N; ++n) {
            const NodeBlock& b = problem.blocks[n];
            const int nd = tree.num_dists(n);
            counts.vars += b.num_x() + nd + 1;
            counts.bins += nd;
            for (const auto& dom : b.domains)
                if (dom.integral && dom.lb >= 0.0 && dom.ub <= 1.0) ++counts.bins;
            counts.cons += (nd >= 1 ? 1 : 0) + b.num_rows() + (tree.is_leaf(n) ? 1 : nd);
        }
        return counts;
    }
    // Table convention: requires |D_n| = |I| uniformly across all nodes.
    const int I = tree.num_dists(0);
    if (I < 1)
        throw ConventionError("table convention requires distributions at the root");
    for (NodeId n = 0; n < N; ++n)
        if (tree.num_dists(n) != I)
            throw ConventionError("table convention requires a uniform distribution count; " +
                                  node_tag(n) + " differs");
    const std::int64_t I64 = I;
    counts.vars = (I64 * I64 + I64 + 1) * N;
    counts.bins = I64 * I64 * N;
    counts.cons = (3 * I64 + 3) * N;
    return counts;
}

} // namespace mspeu
