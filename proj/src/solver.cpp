#include "mspeu/milp/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <queue>

#include "mspeu/errors.hpp"
#include "mspeu/milp/lp_format.hpp"
#include "mspeu/milp/simplex.hpp"

namespace mspeu::milp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Node {
    double bound;     // parent LP objective (model sense)
    int depth;
    std::int64_t seq; // insertion order
    std::vector<std::pair<int, double>> lb_over; // accumulated tighter lower bounds
    std::vector<std::pair<int, double>> ub_over; // accumulated tighter upper bounds
    std::shared_ptr<LpBasis> warm;
};

struct NodeOrder {
    bool maximize;
    // true when b should be processed before a.
    bool operator()(const std::shared_ptr<Node>& a, const std::shared_ptr<Node>& b) const {
        if (a->bound != b->bound) return maximize ? a->bound < b->bound : a->bound > b->bound;
        if (a->depth != b->depth) return a->depth < b->depth;
        return a->seq > b->seq;
    }
};

void apply_overrides(const Node& node, std::vector<double>& lb, std::vector<double>& ub) {
    for (const auto& [j, v] : node.lb_over) lb[j] = std::max(lb[j], v);
    for (const auto& [j, v] : node.ub_over) ub[j] = std::min(ub[j], v);
}

// Tightens integer-variable bounds implied by singleton rows (the only
// presolve this engine performs).
void singleton_tighten(const MilpModel& model, std::vector<double>& lb, std::vector<double>& ub) {
    for (const auto& row : model.rows()) {
        if (row.coeffs.size() != 1) continue;
        const auto [j, a] = row.coeffs[0];
        if (a == 0.0) continue;
        const double v = row.rhs / a;
        const bool pos = a > 0.0;
        switch (row.rel) {
            case Rel::Eq:
                lb[j] = std::max(lb[j], v);
                ub[j] = std::min(ub[j], v);
                break;
            case Rel::Le:
                if (pos) ub[j] = std::min(ub[j], v);
                else lb[j] = std::max(lb[j], v);
                break;
            case Rel::Ge:
                if (pos) lb[j] = std::max(lb[j], v);
                else ub[j] = std::min(ub[j], v);
                break;
        }
        if (model.vars()[j].integral) {
            if (std::isfinite(lb[j])) lb[j] = std::ceil(lb[j] - 1e-9);
            if (std::isfinite(ub[j])) ub[j] = std::floor(ub[j] + 1e-9);
        }
    }
}

bool integral_within(const MilpModel& model, const std::vector<double>& x, double tol,
                     int* worst_var, double* worst_frac) {
    // Most fractional variable; ties broken by lowest index via strict >.
    int arg = -1;
    double best = tol;
    for (int j = 0; j < model.num_vars(); ++j) {
        if (!model.vars()[j].integral) continue;
        const double f = std::abs(x[j] - std::round(x[j]));
        if (f > best) {
            best = f;
            arg = j;
        }
    }
    if (worst_var) *worst_var = arg;
    if (worst_frac) *worst_frac = best;
    return arg < 0;
}

// Snaps integer values to the nearest in-bounds integer and re-checks
// feasibility independently of the simplex.
bool snap_and_check(const MilpModel& model, const std::vector<double>& lb,
                    const std::vector<double>& ub, std::vector<double>& x, double feas_tol) {
    for (int j = 0; j < model.num_vars(); ++j) {
        if (model.vars()[j].integral) {
            double v = std::round(x[j]);
            if (v < lb[j]) v = std::ceil(lb[j] - 1e-9);
            if (v > ub[j]) v = std::floor(ub[j] + 1e-9);
            if (v < lb[j] - 1e-9 || v > ub[j] + 1e-9) return false;
            x[j] = v;
        } else {
            x[j] = std::clamp(x[j], lb[j], ub[j]);
        }
    }
    return model.max_row_violation(x) <= feas_tol * 100.0;
}

MilpSolution solve_external(const MilpModel& model, const std::string& command);

} // namespace

MilpSolution lp_relax_solve(const MilpModel& model, const SolveParams& params) {
    if (model.num_nonzeros() > params.nonzero_cap)
        throw CapacityError(
            "model exceeds the nonzero cap of " + std::to_string(params.nonzero_cap) +
            "; use export_lp and an external solver (MSPEU_SOLVER=external:<cmd>)");
    const auto t0 = Clock::now();
    std::vector<double> lb(model.num_vars()), ub(model.num_vars());
    for (int j = 0; j < model.num_vars(); ++j) {
        lb[j] = model.vars()[j].lb;
        ub[j] = model.vars()[j].ub;
    }
    MilpSolution sol;
    LpResult lp = solve_lp(model, lb, ub, params);
    sol.simplex_iters = lp.iterations;
    sol.wall_time_s = seconds_since(t0);
    switch (lp.status) {
        case LpStatus::Infeasible: sol.status = Status::Infeasible; break;
        case LpStatus::Unbounded: sol.status = Status::Unbounded; break;
        case LpStatus::Optimal:
            sol.status = Status::Optimal;
            sol.values = lp.x;
            sol.objective = lp.objective;
            sol.best_bound = lp.objective;
            sol.gap = 0.0;
            break;
    }
    return sol;
}

MilpSolution solve(const MilpModel& model, const SolveParams& params) {
    std::string override_cmd = params.solver_override;
    if (override_cmd == "internal") {
        override_cmd.clear(); // forced internal engine, environment ignored
    } else if (override_cmd.empty()) {
        if (const char* env = std::getenv("MSPEU_SOLVER")) override_cmd = env;
    }
    if (!override_cmd.empty()) {
        const std::string prefix = "external:";
        if (override_cmd.rfind(prefix, 0) != 0)
            throw Error("unsupported solver override: " + override_cmd);
        return solve_external(model, override_cmd.substr(prefix.size()));
    }

    if (model.num_nonzeros() > params.nonzero_cap)
        throw CapacityError(
            "model exceeds the nonzero cap of " + std::to_string(params.nonzero_cap) +
            "; use export_lp and an external solver (MSPEU_SOLVER=external:<cmd>)");

    const auto t0 = Clock::now();
    const bool maximize = model.sense() == Sense::Max;
    const int n = model.num_vars();

    std::vector<double> root_lb(n), root_ub(n);
    for (int j = 0; j < n; ++j) {
        root_lb[j] = model.vars()[j].lb;
        root_ub[j] = model.vars()[j].ub;
    }
    singleton_tighten(model, root_lb, root_ub);

    MilpSolution sol;
    sol.node_count = 0;

    auto better = [&](double a, double b) { return maximize ? a > b : a < b; };
    auto gap_of = [&](double bound, double inc) {
        return std::abs(bound - inc) / std::max(1.0, std::abs(inc));
    };

    bool have_incumbent = false;
    std::vector<double> inc_x;
    double inc_obj = maximize ? -kInf : kInf;

    std::priority_queue<std::shared_ptr<Node>, std::vector<std::shared_ptr<Node>>, NodeOrder>
        open(NodeOrder{maximize});
    std::int64_t next_seq = 0;

    {
        auto root = std::make_shared<Node>();
        root->bound = maximize ? kInf : -kInf;
        root->depth = 0;
        root->seq = next_seq++;
        open.push(std::move(root));
    }

    bool hit_limit = false;
    double queue_best_bound = maximize ? -kInf : kInf;
    bool root_processed = false;

    while (!open.empty()) {
        if (params.node_limit >= 0 && sol.node_count >= params.node_limit) { hit_limit = true; break; }
        if (params.time_limit_s >= 0 && seconds_since(t0) > params.time_limit_s) { hit_limit = true; break; }

        auto node = open.top();
        // Best-bound order makes the queue head a global bound certificate.
        if (have_incumbent && root_processed) {
            const double head_bound = node->bound;
            if (!better(head_bound, inc_obj) || gap_of(head_bound, inc_obj) <= params.rel_gap) {
                queue_best_bound = inc_obj;
                break;
            }
        }
        open.pop();

        std::vector<double> lb = root_lb, ub = root_ub;
        apply_overrides(*node, lb, ub);

        LpResult lp = solve_lp(model, lb, ub, params, node->warm.get());
        ++sol.node_count;
        sol.simplex_iters += lp.iterations;

        if (lp.status == LpStatus::Infeasible) { root_processed = true; continue; }
        if (lp.status == LpStatus::Unbounded) {
            if (!root_processed) {
                sol.status = Status::Unbounded;
                sol.wall_time_s = seconds_since(t0);
                return sol;
            }
            throw NumericalError("branch-and-bound: node LP unbounded below an optimal root");
        }
        node->bound = lp.objective;

        if (!root_processed) {
            root_processed = true;
            // Rounding heuristic: snap the root relaxation for a first incumbent.
            std::vector<double> rx = lp.x;
            if (snap_and_check(model, lb, ub, rx, params.feas_tol)) {
                const double z = model.objective_value(rx);
                if (!have_incumbent || better(z, inc_obj)) {
                    have_incumbent = true;
                    inc_obj = z;
                    inc_x = rx;
                }
            }
        }

        if (have_incumbent &&
            (!better(lp.objective, inc_obj) || gap_of(lp.objective, inc_obj) <= params.rel_gap))
            continue; // dominated

        int branch_var = -1;
        double frac = 0.0;
        if (integral_within(model, lp.x, params.int_tol, &branch_var, &frac)) {
            // Prefer the snapped point; when snapping trips the row recheck
            // (possible under large row coefficients), keep the
            // simplex-feasible point rather than losing the incumbent.
            std::vector<double> cand = lp.x;
            double z;
            if (snap_and_check(model, lb, ub, cand, params.feas_tol)) {
                z = model.objective_value(cand);
            } else {
                cand = lp.x;
                z = lp.objective;
            }
            if (!have_incumbent || better(z, inc_obj)) {
                have_incumbent = true;
                inc_obj = z;
                inc_x = cand;
            }
            continue;
        }

        const double v = lp.x[branch_var];
        const double fl = std::floor(v), ce = std::ceil(v);
        // Down child first, then up child (fixed insertion order).
        for (int side = 0; side < 2; ++side) {
            auto child = std::make_shared<Node>();
            child->bound = lp.objective;
            child->depth = node->depth + 1;
            child->seq = next_seq++;
            child->lb_over = node->lb_over;
            child->ub_over = node->ub_over;
            child->warm = lp.basis;
            double new_lb = lb[branch_var], new_ub = ub[branch_var];
            if (side == 0) {
                child->ub_over.push_back({branch_var, fl});
                new_ub = fl;
            } else {
                child->lb_over.push_back({branch_var, ce});
                new_lb = ce;
            }
            if (new_lb > new_ub + 1e-9) continue; // empty domain
            open.push(std::move(child));
        }
    }

    // Remaining open nodes cap the proven bound.
    if (!open.empty())
        queue_best_bound = open.top()->bound;
    else if (!hit_limit)
        queue_best_bound = have_incumbent ? inc_obj : queue_best_bound;

    sol.wall_time_s = seconds_since(t0);
    if (have_incumbent) {
        sol.values = inc_x;
        sol.objective = inc_obj;
        if (hit_limit && !open.empty()) {
            sol.best_bound = queue_best_bound;
            sol.gap = gap_of(sol.best_bound, inc_obj);
            sol.status = sol.gap <= params.rel_gap ? Status::Optimal : Status::Limit;
        } else {
            sol.best_bound = open.empty() ? inc_obj : queue_best_bound;
            sol.gap = gap_of(sol.best_bound, inc_obj);
            sol.status = Status::Optimal;
        }
    } else {
        sol.status = hit_limit ? Status::Limit : Status::Infeasible;
        sol.best_bound = hit_limit && !open.empty() ? open.top()->bound : 0.0;
    }
    return sol;
}

namespace {

MilpSolution solve_external(const MilpModel& model, const std::string& command) {
    const auto t0 = Clock::now();
    const std::string stamp = std::to_string(
        std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now().time_since_epoch())
            .count());
    const std::string lp_path = "mspeu_ext_" + stamp + ".lp";
    const std::string sol_path = "mspeu_ext_" + stamp + ".sol";
    export_lp(model, lp_path);
    const std::string cmdline = command + " " + lp_path + " " + sol_path;
    const int rc = std::system(cmdline.c_str());
    MilpSolution sol;
    if (rc != 0) {
        std::remove(lp_path.c_str());
        throw Error("external solver failed (exit " + std::to_string(rc) + "): " + cmdline);
    }
    sol = parse_solution_file(model, sol_path);
    std::remove(lp_path.c_str());
    std::remove(sol_path.c_str());
    sol.wall_time_s = seconds_since(t0);
    return sol;
}

} // namespace

} // namespace mspeu::milp
