#include "mspeu/bigm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "mspeu/errors.hpp"
#include "mspeu/ftcp.hpp"
#include "mspeu/milp/solver.hpp"

namespace mspeu {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string nd_tag(NodeId n, DistId d) {
    return "(" + std::to_string(n) + "," + std::to_string(d) + ")";
}

// One bounding problem: either the highest competitor expectation (the Phi
// form, target delta fixed to 1) or the highest difference theta - phi (the M
// form, target delta fixed to 0 and theta capped by the competitors' best).
struct BoundingSpec {
    NodeId target = 0;
    int t_bar = 1;
    DistId target_dist = 0;
    bool m_form = false;
    double theta_star = 0.0;     // M form only
    bool theta_vars = false;     // general-stage form: theta variables below t_bar
    const BigMTable* deeper = nullptr;
    BigMRelaxation relaxation = BigMRelaxation::Lp;
    bool exact = false;
};

struct BuiltBounding {
    milp::MilpModel model;
    double const_offset = 0.0;
};

BuiltBounding build_bounding(const MspeuProblem& problem, const BoundingSpec& spec) {
    using namespace milp;
    const Mdst& tree = problem.tree;
    const int N = tree.num_nodes();
    const int var_stage_lo =
        spec.relaxation == BigMRelaxation::StagewiseDrop ? std::max(1, spec.t_bar - 1) : 1;
    const int row_stage_lo = spec.relaxation == BigMRelaxation::StagewiseDrop ? spec.t_bar : 1;

    BuiltBounding built;
    MilpModel& model = built.model;
    model.set_sense(Sense::Max);

    std::vector<int> x0(N, -1), d0(N, -1), th(N, -1);
    for (NodeId n = 0; n < N; ++n) {
        if (tree.stage[n] < var_stage_lo) continue;
        const NodeBlock& b = problem.blocks[n];
        x0[n] = model.num_vars();
        for (int j = 0; j < b.num_x(); ++j) {
            const VarDomain& dom = b.domains[j];
            model.add_var("x_" + std::to_string(n) + "_" + std::to_string(j), dom.lb, dom.ub,
                          spec.exact && dom.integral);
        }
        d0[n] = model.num_vars();
        for (DistId d = 0; d < tree.num_dists(n); ++d) {
            double lb = 0.0, ub = 1.0;
            if (n == spec.target && d == spec.target_dist) {
                if (spec.m_form) ub = 0.0; // delta fixed to 0
                else lb = 1.0;             // delta fixed to 1
            }
            model.add_var("delta_" + std::to_string(n) + "_" + std::to_string(d), lb, ub,
                          spec.exact);
        }
        // Theta variables: the target's own (M form), plus every node strictly
        // below the target stage when the general form is in effect.
        const bool own_theta = spec.m_form && n == spec.target;
        const bool deep_theta = spec.theta_vars && tree.stage[n] > spec.t_bar;
        if (own_theta || deep_theta) {
            const double ub = own_theta ? spec.theta_star : kInf;
            th[n] = model.add_var("theta_" + std::to_string(n), -kInf, ub, false);
        }
    }

    for (NodeId n = 0; n < N; ++n) {
        if (tree.stage[n] < row_stage_lo) continue;
        const NodeBlock& b = problem.blocks[n];
        if (tree.num_dists(n) >= 1) {
            std::vector<std::pair<int, double>> coeffs;
            for (DistId d = 0; d < tree.num_dists(n); ++d) coeffs.push_back({d0[n] + d, 1.0});
            model.add_row("choice_" + std::to_string(n), std::move(coeffs), Rel::Eq, 1.0);
        }
        const NodeId p = tree.parent[n];
        const NodeBlock* pb = p >= 0 && x0[p] >= 0 ? &problem.blocks[p] : nullptr;
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
            model.add_row("link_" + std::to_string(n) + "_" + std::to_string(i),
                          std::move(coeffs), Rel::Eq, b.h[i]);
        }
    }

    if (spec.theta_vars) {
        // Theta rows for stages t_bar+1 .. T-1 embed the deeper constants; the
        // Phi form bounds theta from above, the M form from below.
        for (NodeId n = 0; n < N; ++n) {
            const int t = tree.stage[n];
            if (t <= spec.t_bar || tree.is_leaf(n)) continue;
            for (DistId d = 0; d < tree.num_dists(n); ++d) {
                const double m_val = spec.deeper->at(n, d);
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
                if (spec.m_form) {
                    // theta_n >= expectation - M (1 - delta): lower-bounding rows.
                    coeffs.push_back({d0[n] + d, -m_val});
                    model.add_row("thetalow_" + std::to_string(n) + "_" + std::to_string(d),
                                  std::move(coeffs), Rel::Ge, -m_val);
                } else {
                    coeffs.push_back({d0[n] + d, m_val});
                    model.add_row("thetaup_" + std::to_string(n) + "_" + std::to_string(d),
                                  std::move(coeffs), Rel::Le, m_val);
                }
            }
        }
        for (NodeId n = 0; n < N; ++n)
            if (tree.is_leaf(n) && th[n] >= 0)
                model.add_row("thetafix_" + std::to_string(n), {{th[n], 1.0}}, Rel::Eq,
                              problem.blocks[n].theta_terminal);
    }

    // Objective over the target's child set.
    const double sign = spec.m_form ? -1.0 : 1.0;
    if (spec.m_form) model.set_obj(th[spec.target], 1.0);
    for (NodeId m : tree.kids(spec.target, spec.target_dist)) {
        const NodeBlock& cb = problem.blocks[m];
        const double pi = tree.prob[m];
        for (int j = 0; j < cb.num_x(); ++j)
            model.set_obj(x0[m] + j, sign * pi * cb.r[j]);
        for (DistId dd = 0; dd < tree.num_dists(m); ++dd)
            model.set_obj(d0[m] + dd, sign * pi * cb.q[dd]);
        if (spec.theta_vars && th[m] >= 0)
            model.set_obj(th[m], sign * pi);
        else if (!spec.theta_vars)
            built.const_offset += sign * pi * problem.blocks[m].theta_terminal;
    }
    return built;
}

double solve_bounding(const MspeuProblem& problem, const BoundingSpec& spec,
                      const BigMOptions& options, bool* infeasible) {
    BuiltBounding built = build_bounding(problem, spec);
    milp::MilpSolution sol = spec.exact ? milp::solve(built.model, options.solve)
                                        : milp::lp_relax_solve(built.model, options.solve);
    *infeasible = false;
    switch (sol.status) {
        case milp::Status::Optimal:
            return sol.objective + built.const_offset;
        case milp::Status::Infeasible:
            *infeasible = true;
            return kNegInf;
        case milp::Status::Unbounded:
            throw Error("big-M bounding problem unbounded at " +
                        nd_tag(spec.target, spec.target_dist) +
                        "; add finite domain bounds to the stage variables");
        default:
            throw Error("big-M bounding problem hit a solver limit at " +
                        nd_tag(spec.target, spec.target_dist));
    }
}

void compute_stage(const MspeuProblem& problem, int t_bar, bool theta_vars,
                   const BigMOptions& options, BigMComputation& out) {
    const Mdst& tree = problem.tree;
    for (NodeId n = 0; n < tree.num_nodes(); ++n) {
        if (tree.stage[n] != t_bar || tree.is_leaf(n)) continue;
        const int nd = tree.num_dists(n);
        if (nd == 1) {
            // A forced choice leaves the big-M term inactive.
            out.table.set(n, 0, 0.0);
            continue;
        }
        std::vector<double> phi(nd, kNegInf);
        for (DistId d = 0; d < nd; ++d) {
            BoundingSpec spec;
            spec.target = n;
            spec.t_bar = t_bar;
            spec.target_dist = d;
            spec.m_form = false;
            spec.theta_vars = theta_vars;
            spec.deeper = &out.table;
            spec.relaxation = options.relaxation;
            spec.exact = options.exact_milp;
            bool infeasible = false;
            phi[d] = solve_bounding(problem, spec, options, &infeasible);
            if (infeasible)
                out.warnings.push_back("distribution " + nd_tag(n, d) +
                                       " is never jointly feasible; excluded from bounds");
        }
        for (DistId d_bar = 0; d_bar < nd; ++d_bar) {
            double theta_star = kNegInf;
            for (DistId d = 0; d < nd; ++d)
                if (d != d_bar) theta_star = std::max(theta_star, phi[d]);
            if (theta_star == kNegInf) {
                out.table.set(n, d_bar, 0.0);
                out.warnings.push_back("no feasible competitor at " + nd_tag(n, d_bar) +
                                       "; M set to 0");
                continue;
            }
            BoundingSpec spec;
            spec.target = n;
            spec.t_bar = t_bar;
            spec.target_dist = d_bar;
            spec.m_form = true;
            spec.theta_star = theta_star;
            spec.theta_vars = theta_vars;
            spec.deeper = &out.table;
            spec.relaxation = options.relaxation;
            spec.exact = options.exact_milp;
            bool infeasible = false;
            const double m_relaxed = solve_bounding(problem, spec, options, &infeasible);
            if (infeasible) {
                out.table.set(n, d_bar, 0.0);
                out.warnings.push_back("delta " + nd_tag(n, d_bar) +
                                       " can never be 0; its theta row is vacuous, M set to 0");
                continue;
            }
            out.table.set(n, d_bar, std::max(0.0, m_relaxed));
        }
    }
}

} // namespace

std::vector<double> pairwise_bigm(const std::vector<BoundPair>& bounds) {
    if (bounds.empty()) throw Error("pairwise_bigm: at least one distribution required");
    const int nd = static_cast<int>(bounds.size());
    std::vector<double> out(nd, 0.0);
    if (nd == 1) return out;
    for (int d = 0; d < nd; ++d) {
        double competitor = kNegInf;
        for (int k = 0; k < nd; ++k)
            if (k != d) competitor = std::max(competitor, bounds[k].phi_max);
        out[d] = std::max(0.0, competitor - bounds[d].phi_min);
    }
    return out;
}

BigMComputation compute_bigm_T1(const MspeuProblem& problem, const BigMOptions& options) {
    auto issues = validate_problem(problem);
    if (!issues.empty()) throw Error("compute_bigm_T1: " + issues.front());
    BigMComputation out;
    if (problem.tree.num_stages >= 2)
        compute_stage(problem, problem.tree.num_stages - 1, false, options, out);
    return out;
}

BigMComputation compute_bigm_general(const MspeuProblem& problem, const BigMOptions& options) {
    auto issues = validate_problem(problem);
    if (!issues.empty()) throw Error("compute_bigm_general: " + issues.front());
    BigMComputation out;
    const int T = problem.tree.num_stages;
    if (T >= 2) compute_stage(problem, T - 1, false, options, out);
    for (int t_bar = T - 2; t_bar >= 1; --t_bar)
        compute_stage(problem, t_bar, true, options, out);
    return out;
}

BigMComputation ftcp_fast_bigm(const FtcpInstance& instance) {
    const Mdst& tree = instance.tree;
    const int I = instance.num_comps();
    const int N = tree.num_nodes();
    BigMComputation out;
    for (int i = 0; i < I; ++i)
        for (NodeId n = 0; n < N; ++n)
            if (instance.value[i][n] < 0.0) {
                out.warnings.push_back(
                    "negative composition values present; the nonnegativity assumption behind "
                    "the fast rule is violated");
                i = I;
                break;
            }

    std::vector<double> m_node(N, 0.0);
    for (int t = tree.num_stages; t >= 1; --t) {
        for (NodeId n = 0; n < N; ++n) {
            if (tree.stage[n] != t) continue;
            if (tree.is_leaf(n)) {
                double best = 0.0;
                for (int i = 0; i < I; ++i)
                    best = std::max(best, instance.disc(t + 1) * instance.value[i][n]);
                m_node[n] = best;
                continue;
            }
            double best = kNegInf;
            for (DistId i = 0; i < tree.num_dists(n); ++i) {
                double sum = 0.0;
                for (NodeId m : tree.kids(n, i)) {
                    double best_value = 0.0;
                    for (int j = 0; j < I; ++j)
                        best_value = std::max(best_value, instance.value[j][m]);
                    sum += instance.disc(tree.stage[m]) * tree.prob[m] * (m_node[m] + best_value);
                }
                best = std::max(best, sum);
            }
            m_node[n] = best;
            for (DistId i = 0; i < tree.num_dists(n); ++i) out.table.set(n, i, best);
        }
    }
    return out;
}

BigMReport validate_bigm(const MspeuProblem& problem, const BigMTable& table, int trials,
                         const OracleParams& oracle_params) {
    BigMReport rep;
    const Mdst& tree = problem.tree;
    for (NodeId n = 0; n < tree.num_nodes(); ++n) {
        if (tree.is_leaf(n)) continue;
        for (DistId d = 0; d < tree.num_dists(n); ++d) {
            if (!table.has(n, d)) {
                rep.issues.push_back("missing entry at " + nd_tag(n, d));
                continue;
            }
            const double v = table.at(n, d);
            if (!std::isfinite(v) || v < 0.0)
                rep.issues.push_back("entry at " + nd_tag(n, d) + " is " + std::to_string(v));
        }
    }
    if (!rep.issues.empty()) return rep;

    MspeuSolution oracle = enumerate_oracle(problem, oracle_params);
    auto mono = [&](const BigMTable& t) {
        return milp::solve(build_node_formulation(problem, t));
    };
    milp::MilpSolution base = mono(table);
    if (oracle.status == SolStatus::Infeasible) {
        if (base.status != milp::Status::Infeasible)
            rep.issues.push_back("oracle infeasible but monolithic solve is not");
        return rep;
    }
    if (base.status != milp::Status::Optimal) {
        rep.issues.push_back("monolithic solve failed with status " +
                             std::string(milp::to_string(base.status)));
        return rep;
    }
    const double scale = std::max(1.0, std::abs(oracle.objective));
    if (std::abs(base.objective - oracle.objective) > 1e-6 * scale)
        rep.issues.push_back("objective drop: monolithic " + std::to_string(base.objective) +
                             " vs oracle " + std::to_string(oracle.objective));

    milp::MilpSolution inflated = mono(table.scaled(10.0));
    if (inflated.status != milp::Status::Optimal ||
        std::abs(inflated.objective - base.objective) > 1e-6 * scale)
        rep.issues.push_back("objective changed under 10x inflation");

    std::mt19937_64 rng(0x51CB1Cu);
    for (int t = 0; t < trials; ++t) {
        BigMTable jittered = table;
        for (auto& [key, v] : jittered.entries()) {
            const double factor = 1.0 + 9.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
            v *= factor;
        }
        milp::MilpSolution js = mono(jittered);
        if (js.status != milp::Status::Optimal ||
            std::abs(js.objective - base.objective) > 1e-6 * scale)
            rep.issues.push_back("objective changed under random inflation trial " +
                                 std::to_string(t));
    }
    return rep;
}

} // namespace mspeu
