#include "mspeu/backward.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "mspeu/errors.hpp"
#include "mspeu/milp/solver.hpp"

namespace mspeu {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPosInf = std::numeric_limits<double>::infinity();

struct GroupSolution {
    milp::Status status = milp::Status::Infeasible;
    double objective = 0.0;
    // Per child of the group, in child-list order.
    std::vector<std::vector<double>> x;
    std::vector<std::vector<double>> delta;
    std::vector<double> theta;
};

// The group subproblem for (parent m, distribution k): all children of m under
// k jointly, with the parent's delta column moved to the rhs. Children at the
// last stage contribute their terminal value as a constant; elsewhere their
// theta is a variable bounded by Phi rows with the supplied big-M constants.
GroupSolution solve_group(const MspeuProblem& problem, NodeId parent, DistId k,
                          const PhiTable& phi, const BigMTable& bigm,
                          const milp::SolveParams& params) {
    using namespace milp;
    const Mdst& tree = problem.tree;
    const auto& kids = tree.kids(parent, k);
    const NodeBlock& pb = problem.blocks[parent];

    MilpModel model;
    model.set_sense(Sense::Max);
    double const_offset = 0.0;
    std::vector<int> x0(kids.size()), d0(kids.size()), th(kids.size(), -1);
    for (std::size_t c = 0; c < kids.size(); ++c) {
        const NodeId n = kids[c];
        const NodeBlock& b = problem.blocks[n];
        const double pi = tree.prob[n];
        x0[c] = model.num_vars();
        for (int j = 0; j < b.num_x(); ++j) {
            const VarDomain& dom = b.domains[j];
            int idx = model.add_var("x_" + std::to_string(n) + "_" + std::to_string(j), dom.lb,
                                    dom.ub, dom.integral);
            model.set_obj(idx, pi * b.r[j]);
        }
        d0[c] = model.num_vars();
        for (DistId d = 0; d < tree.num_dists(n); ++d) {
            double ub = 1.0;
            if (!tree.is_leaf(n)) {
                auto it = phi.find({n, d});
                if (it != phi.end() && it->second == kNegInf) ub = 0.0; // excluded branch
            }
            int idx = model.add_var("delta_" + std::to_string(n) + "_" + std::to_string(d), 0.0,
                                    ub, true);
            model.set_obj(idx, pi * b.q[d]);
        }
        if (tree.is_leaf(n)) {
            const_offset += pi * b.theta_terminal;
        } else {
            th[c] = model.add_var("theta_" + std::to_string(n), -kInf, kInf, false);
            model.set_obj(th[c], pi);
        }
    }

    for (std::size_t c = 0; c < kids.size(); ++c) {
        const NodeId n = kids[c];
        const NodeBlock& b = problem.blocks[n];
        if (tree.num_dists(n) >= 1) {
            std::vector<std::pair<int, double>> coeffs;
            for (DistId d = 0; d < tree.num_dists(n); ++d) coeffs.push_back({d0[c] + d, 1.0});
            model.add_row("choice_" + std::to_string(n), std::move(coeffs), Rel::Eq, 1.0);
        }
        for (int i = 0; i < b.num_rows(); ++i) {
            double rhs = b.h[i];
            if (!pb.D_to_children.empty()) rhs -= pb.D_to_children[i][k];
            std::vector<std::pair<int, double>> coeffs;
            for (int j = 0; j < b.num_x(); ++j)
                if (b.A[i][j] != 0.0) coeffs.push_back({x0[c] + j, b.A[i][j]});
            for (DistId d = 0; d < tree.num_dists(n); ++d)
                if (b.B[i][d] != 0.0) coeffs.push_back({d0[c] + d, b.B[i][d]});
            model.add_row("link_" + std::to_string(n) + "_" + std::to_string(i),
                          std::move(coeffs), Rel::Eq, rhs);
        }
        if (!tree.is_leaf(n)) {
            // theta_n must stay reachable up to the best competitor when some
            // delta is off, so the supplied constant is floored at the exact
            // pairwise gap of the already-computed child-set optima.
            double phi_best = kNegInf;
            for (DistId d = 0; d < tree.num_dists(n); ++d)
                phi_best = std::max(phi_best, phi.at({n, d}));
            for (DistId d = 0; d < tree.num_dists(n); ++d) {
                const double phi_nd = phi.at({n, d});
                if (phi_nd == kNegInf) continue;  // delta already fixed to 0
                if (phi_best == kPosInf) continue; // no cap: unboundedness propagates
                const double m_val = std::max(bigm.at(n, d), phi_best - phi_nd);
                model.add_row("thetabound_" + std::to_string(n) + "_" + std::to_string(d),
                              {{th[c], 1.0}, {d0[c] + d, m_val}}, Rel::Le, phi_nd + m_val);
            }
        }
    }

    GroupSolution out;
    MilpSolution sol = milp::solve(model, params);
    out.status = sol.status;
    if (sol.status != Status::Optimal) return out;
    out.objective = sol.objective + const_offset;
    out.x.resize(kids.size());
    out.delta.resize(kids.size());
    out.theta.assign(kids.size(), 0.0);
    for (std::size_t c = 0; c < kids.size(); ++c) {
        const NodeId n = kids[c];
        const NodeBlock& b = problem.blocks[n];
        out.x[c].assign(sol.values.begin() + x0[c], sol.values.begin() + x0[c] + b.num_x());
        out.delta[c].resize(tree.num_dists(n));
        for (DistId d = 0; d < tree.num_dists(n); ++d)
            out.delta[c][d] = std::round(sol.values[d0[c] + d]);
        out.theta[c] = tree.is_leaf(n) ? b.theta_terminal : sol.values[th[c]];
    }
    return out;
}

struct RootSolution {
    milp::Status status = milp::Status::Infeasible;
    double z = 0.0;
    std::vector<double> x;
    std::vector<double> delta;
    double theta = 0.0;
};

RootSolution solve_root(const MspeuProblem& problem, const PhiTable& phi, const BigMTable& bigm,
                        const milp::SolveParams& params) {
    using namespace milp;
    const Mdst& tree = problem.tree;
    const NodeBlock& b = problem.blocks[0];

    MilpModel model;
    model.set_sense(Sense::Max);
    for (int j = 0; j < b.num_x(); ++j) {
        const VarDomain& dom = b.domains[j];
        int idx = model.add_var("x_0_" + std::to_string(j), dom.lb, dom.ub, dom.integral);
        model.set_obj(idx, b.r[j]);
    }
    const int d0 = model.num_vars();
    for (DistId d = 0; d < tree.num_dists(0); ++d) {
        double ub = 1.0;
        if (!tree.is_leaf(0) && phi.at({0, d}) == kNegInf) ub = 0.0;
        int idx = model.add_var("delta_0_" + std::to_string(d), 0.0, ub, true);
        model.set_obj(idx, b.q[d]);
    }
    const int th = model.add_var("theta_0", -kInf, kInf, false);
    model.set_obj(th, 1.0);

    if (tree.num_dists(0) >= 1) {
        std::vector<std::pair<int, double>> coeffs;
        for (DistId d = 0; d < tree.num_dists(0); ++d) coeffs.push_back({d0 + d, 1.0});
        model.add_row("choice_0", std::move(coeffs), Rel::Eq, 1.0);
    }
    for (int i = 0; i < b.num_rows(); ++i) {
        std::vector<std::pair<int, double>> coeffs;
        for (int j = 0; j < b.num_x(); ++j)
            if (b.A[i][j] != 0.0) coeffs.push_back({j, b.A[i][j]});
        for (DistId d = 0; d < tree.num_dists(0); ++d)
            if (b.B[i][d] != 0.0) coeffs.push_back({d0 + d, b.B[i][d]});
        model.add_row("link_0_" + std::to_string(i), std::move(coeffs), Rel::Eq, b.h[i]);
    }
    if (tree.is_leaf(0)) {
        model.add_row("thetafix_0", {{th, 1.0}}, Rel::Eq, b.theta_terminal);
    } else {
        double phi_best = kNegInf;
        for (DistId d = 0; d < tree.num_dists(0); ++d)
            phi_best = std::max(phi_best, phi.at({0, d}));
        for (DistId d = 0; d < tree.num_dists(0); ++d) {
            const double phi_0d = phi.at({0, d});
            if (phi_0d == kNegInf || phi_best == kPosInf) continue;
            const double m_val = std::max(bigm.at(0, d), phi_best - phi_0d);
            model.add_row("thetabound_0_" + std::to_string(d), {{th, 1.0}, {d0 + d, m_val}},
                          Rel::Le, phi_0d + m_val);
        }
    }

    RootSolution out;
    MilpSolution sol = milp::solve(model, params);
    out.status = sol.status;
    if (sol.status != Status::Optimal) return out;
    out.z = sol.objective;
    out.x.assign(sol.values.begin(), sol.values.begin() + b.num_x());
    out.delta.resize(tree.num_dists(0));
    for (DistId d = 0; d < tree.num_dists(0); ++d)
        out.delta[d] = std::round(sol.values[d0 + d]);
    out.theta = sol.values[th];
    return out;
}

} // namespace

BackwardResult solve_backward(const MspeuProblem& problem, const BigMTable& bigm,
                              const milp::SolveParams& params) {
    if (!problem.c_is_zero)
        throw Error("solve_backward requires c_is_zero (the C != 0 case needs the monolithic path)");
    auto issues = validate_problem(problem);
    if (!issues.empty()) throw Error("solve_backward: " + issues.front());

    const Mdst& tree = problem.tree;
    const int T = tree.num_stages;
    BackwardResult result;
    result.bigm = bigm;
    // Stage values compose across solves, so each subproblem is held to a
    // tighter gap than the outward-facing tolerance.
    milp::SolveParams sub_params = params;
    sub_params.rel_gap = params.rel_gap * 1e-2;
    const auto t_total0 = Clock::now();

    // Stages T-1 down to 1: one group subproblem per (node, distribution).
    for (int t = T - 1; t >= 1; --t) {
        const auto t_stage0 = Clock::now();
        for (NodeId m = 0; m < tree.num_nodes(); ++m) {
            if (tree.stage[m] != t || tree.is_leaf(m)) continue;
            for (DistId k = 0; k < tree.num_dists(m); ++k) {
                GroupSolution group = solve_group(problem, m, k, result.phi, bigm, sub_params);
                ++result.subproblem_count;
                double value;
                switch (group.status) {
                    case milp::Status::Optimal: value = group.objective; break;
                    case milp::Status::Infeasible: value = kNegInf; break;
                    case milp::Status::Unbounded: value = kPosInf; break;
                    default:
                        throw Error("backward subproblem hit a solver limit at node " +
                                    std::to_string(m));
                }
                result.phi[{m, k}] = value;
            }
        }
        result.stage_time_s.push_back(
            {t, std::chrono::duration<double>(Clock::now() - t_stage0).count()});
    }

    RootSolution root = solve_root(problem, result.phi, bigm, sub_params);
    ++result.subproblem_count;
    result.subproblem_time_s = std::chrono::duration<double>(Clock::now() - t_total0).count();
    switch (root.status) {
        case milp::Status::Optimal: break;
        case milp::Status::Infeasible: result.status = SolStatus::Infeasible; return result;
        case milp::Status::Unbounded: result.status = SolStatus::Unbounded; return result;
        default: throw Error("backward root problem hit a solver limit");
    }
    result.status = SolStatus::Optimal;
    result.z = root.z;
    result.root_x = root.x;
    result.root_theta = root.theta;
    result.root_dist = -1;
    for (DistId d = 0; d < static_cast<DistId>(root.delta.size()); ++d)
        if (root.delta[d] > 0.5) result.root_dist = d;
    return result;
}

MspeuSolution extract_policy(const MspeuProblem& problem, const BackwardResult& result,
                             const milp::SolveParams& params) {
    if (result.status != SolStatus::Optimal)
        throw Error("extract_policy requires an optimal backward result");
    const Mdst& tree = problem.tree;
    const int N = tree.num_nodes();
    // Mirror the backward pass exactly so group re-solves reproduce Phi.
    milp::SolveParams sub_params = params;
    sub_params.rel_gap = params.rel_gap * 1e-2;

    MspeuSolution sol;
    sol.status = SolStatus::Optimal;
    sol.objective = result.z;
    sol.x.resize(N);
    sol.delta.resize(N);
    sol.theta.assign(N, 0.0);
    sol.on_policy.assign(N, 0);
    std::vector<int> chosen(N, -1);

    sol.x[0] = result.root_x;
    sol.delta[0].assign(tree.num_dists(0), 0.0);
    if (result.root_dist >= 0) sol.delta[0][result.root_dist] = 1.0;
    chosen[0] = result.root_dist;
    sol.on_policy[0] = 1;

    // Forward pass along chosen distributions; group re-solves must agree
    // with the stored Phi values.
    std::vector<NodeId> frontier{0};
    while (!frontier.empty()) {
        std::vector<NodeId> next;
        for (NodeId m : frontier) {
            if (tree.is_leaf(m) || chosen[m] < 0) continue;
            const DistId k = chosen[m];
            GroupSolution group = solve_group(problem, m, k, result.phi, result.bigm, sub_params);
            if (group.status != milp::Status::Optimal)
                throw Error("extract_policy: group re-solve failed at node " + std::to_string(m));
            const double stored = result.phi.at({m, k});
            if (std::abs(group.objective - stored) >
                1e-6 * std::max(1.0, std::abs(stored)))
                throw Error("extract_policy: re-solve disagrees with stored Phi at node " +
                            std::to_string(m));
            const auto& kids = tree.kids(m, k);
            for (std::size_t c = 0; c < kids.size(); ++c) {
                const NodeId n = kids[c];
                sol.x[n] = group.x[c];
                sol.delta[n] = group.delta[c];
                sol.theta[n] = group.theta[c];
                sol.on_policy[n] = 1;
                chosen[n] = -1;
                for (DistId d = 0; d < tree.num_dists(n); ++d)
                    if (group.delta[c][d] > 0.5) chosen[n] = d;
                next.push_back(n);
            }
        }
        frontier = std::move(next);
    }

    // Feasible completion for nodes off the policy, stage by stage so parents
    // are always assigned first.
    std::vector<std::vector<NodeId>> by_stage(tree.num_stages + 1);
    for (NodeId n = 0; n < N; ++n) by_stage[tree.stage[n]].push_back(n);
    for (int t = 2; t <= tree.num_stages; ++t) {
        for (NodeId n : by_stage[t]) {
            if (sol.on_policy[n]) continue;
            const NodeId p = tree.parent[n];
            NodeSubResult sub = solve_node_subproblem(problem, n, chosen[p], -1, sub_params);
            if (!sub.feasible)
                throw Error("extract_policy: no feasible completion at off-policy node " +
                            std::to_string(n));
            sol.x[n] = sub.x;
            sol.delta[n].assign(tree.num_dists(n), 0.0);
            chosen[n] = -1;
            if (!sub.delta.empty()) {
                sol.delta[n] = sub.delta;
                for (DistId d = 0; d < tree.num_dists(n); ++d)
                    if (sub.delta[d] > 0.5) chosen[n] = d;
            }
        }
    }

    // Uniform theta values from the expectation recursion, so evaluation
    // reproduces z exactly.
    for (int t = tree.num_stages; t >= 1; --t) {
        for (NodeId n : by_stage[t]) {
            if (tree.is_leaf(n)) {
                sol.theta[n] = problem.blocks[n].theta_terminal;
                continue;
            }
            double v = 0.0;
            if (chosen[n] >= 0) {
                for (NodeId m : tree.kids(n, chosen[n])) {
                    const NodeBlock& cb = problem.blocks[m];
                    double term = 0.0;
                    for (int j = 0; j < cb.num_x(); ++j) term += cb.r[j] * sol.x[m][j];
                    for (DistId dd = 0; dd < tree.num_dists(m); ++dd)
                        term += cb.q[dd] * sol.delta[m][dd];
                    v += tree.prob[m] * (term + sol.theta[m]);
                }
            }
            sol.theta[n] = v;
        }
    }
    {
        const NodeBlock& rb = problem.blocks[0];
        double z = sol.theta[0];
        for (int j = 0; j < rb.num_x(); ++j) z += rb.r[j] * sol.x[0][j];
        for (DistId d = 0; d < tree.num_dists(0); ++d) z += rb.q[d] * sol.delta[0][d];
        if (std::abs(z - result.z) > 1e-6 * std::max(1.0, std::abs(result.z)))
            throw Error("extract_policy: recursion value " + std::to_string(z) +
                        " disagrees with the backward optimum " + std::to_string(result.z));
    }
    return sol;
}

} // namespace mspeu
