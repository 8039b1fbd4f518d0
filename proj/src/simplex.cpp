#include "mspeu/milp/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "mspeu/errors.hpp"

namespace mspeu::milp {

namespace {

constexpr double kPivotTol = 1e-10;   // smallest acceptable pivot magnitude
constexpr double kDualTol = 1e-9;     // reduced-cost threshold
constexpr double kDegenEps = 1e-12;   // step size below which a pivot counts as degenerate
constexpr int kRefactorEvery = 200;

enum VStat : std::uint8_t { kAtLower = 0, kAtUpper = 1, kBasic = 2, kFreeZero = 3 };

// Internal column space: structurals [0, n) then one logical per row [n, n+m).
// Everything runs in "minimize" sense. Phase 1 is artificial-free: an
// infeasible basic variable carries a composite cost of +/-1 until it returns
// to its band, so any starting basis (cold logicals or a warm snapshot from a
// parent branch-and-bound node) is usable directly.
struct Work {
    int m = 0;
    int n_cols = 0;
    std::vector<std::vector<std::pair<int, double>>> cols;
    std::vector<double> lb, ub;
    std::vector<double> cost;  // phase-2 cost (minimize)
    std::vector<double> rhs;

    std::vector<int> basic;            // per row: basic column
    std::vector<std::uint8_t> vstat;   // per column
    std::vector<double> x;             // per column value
    std::vector<double> binv;          // dense m*m row-major B^{-1}

    double feas_tol = 1e-7;

    double& bi(int i, int j) { return binv[static_cast<std::size_t>(i) * m + j]; }
};

// Rebuilds binv from the current basis by Gauss-Jordan with partial pivoting.
bool refactorize(Work& w) {
    const int m = w.m;
    if (m == 0) return true;
    std::vector<double> a(static_cast<std::size_t>(m) * m, 0.0);
    for (int r = 0; r < m; ++r)
        for (const auto& [row, val] : w.cols[w.basic[r]])
            a[static_cast<std::size_t>(row) * m + r] = val;
    std::fill(w.binv.begin(), w.binv.end(), 0.0);
    for (int i = 0; i < m; ++i) w.bi(i, i) = 1.0;

    for (int c = 0; c < m; ++c) {
        int piv = -1;
        double best = kPivotTol;
        for (int r = c; r < m; ++r) {
            double v = std::abs(a[static_cast<std::size_t>(r) * m + c]);
            if (v > best) { best = v; piv = r; }
        }
        if (piv < 0) return false;
        if (piv != c) {
            for (int j = 0; j < m; ++j) {
                std::swap(a[static_cast<std::size_t>(piv) * m + j],
                          a[static_cast<std::size_t>(c) * m + j]);
                std::swap(w.bi(piv, j), w.bi(c, j));
            }
        }
        const double d = a[static_cast<std::size_t>(c) * m + c];
        for (int j = 0; j < m; ++j) {
            a[static_cast<std::size_t>(c) * m + j] /= d;
            w.bi(c, j) /= d;
        }
        for (int r = 0; r < m; ++r) {
            if (r == c) continue;
            double f = a[static_cast<std::size_t>(r) * m + c];
            if (f == 0.0) continue;
            for (int j = 0; j < m; ++j) {
                a[static_cast<std::size_t>(r) * m + j] -= f * a[static_cast<std::size_t>(c) * m + j];
                w.bi(r, j) -= f * w.bi(c, j);
            }
        }
    }
    return true;
}

void recompute_basics(Work& w) {
    const int m = w.m;
    std::vector<double> r = w.rhs;
    for (int j = 0; j < w.n_cols; ++j) {
        if (w.vstat[j] == kBasic || w.x[j] == 0.0) continue;
        for (const auto& [row, val] : w.cols[j]) r[row] -= val * w.x[j];
    }
    for (int i = 0; i < m; ++i) {
        double v = 0.0;
        const double* bi = &w.binv[static_cast<std::size_t>(i) * m];
        for (int k = 0; k < m; ++k) v += bi[k] * r[k];
        w.x[w.basic[i]] = v;
    }
}

double nonbasic_rest_value(const Work& w, int j, std::uint8_t stat) {
    if (stat == kAtLower) return w.lb[j];
    if (stat == kAtUpper) return w.ub[j];
    return 0.0;
}

double total_infeasibility(const Work& w) {
    double s = 0.0;
    for (int i = 0; i < w.m; ++i) {
        const int j = w.basic[i];
        if (w.x[j] > w.ub[j]) s += w.x[j] - w.ub[j];
        else if (w.x[j] < w.lb[j]) s += w.lb[j] - w.x[j];
    }
    return s;
}

enum class LoopEnd { Optimal, Unbounded, Feasible };

// The simplex loop. In composite mode the cost of a basic variable is the
// sign of its bound violation and the loop returns Feasible as soon as every
// basic variable is inside its band; otherwise the fixed cost vector applies.
LoopEnd run_simplex(Work& w, bool composite, const std::vector<double>& cost, double cost_scale,
                    std::int64_t iter_budget, int degen_budget, std::int64_t& iters) {
    const int m = w.m;
    std::vector<double> y(m), wcol(m), cb(m);
    bool bland = false;
    int degen_run = 0;
    int since_refactor = 0;
    const double dual_tol = kDualTol * std::max(1.0, cost_scale);
    const double band = w.feas_tol;

    for (;;) {
        if (iters >= iter_budget)
            throw NumericalError("simplex: iteration budget exhausted (possible cycling)");

        if (composite && total_infeasibility(w) <= band * m) return LoopEnd::Feasible;

        // Basic costs.
        bool any_cb = false;
        for (int i = 0; i < m; ++i) {
            const int j = w.basic[i];
            double c;
            if (composite) {
                if (w.x[j] > w.ub[j] + band) c = 1.0;
                else if (w.x[j] < w.lb[j] - band) c = -1.0;
                else c = 0.0;
            } else {
                c = cost[j];
            }
            cb[i] = c;
            any_cb = any_cb || c != 0.0;
        }
        if (composite && !any_cb) return LoopEnd::Feasible; // violations within band

        // y^T = c_B^T B^{-1}, accumulated row-wise.
        std::fill(y.begin(), y.end(), 0.0);
        for (int i = 0; i < m; ++i) {
            const double c = cb[i];
            if (c == 0.0) continue;
            const double* bi = &w.binv[static_cast<std::size_t>(i) * m];
            for (int j = 0; j < m; ++j) y[j] += c * bi[j];
        }

        // Pricing.
        int enter = -1;
        int enter_dir = 0;
        double best_score = dual_tol;
        for (int j = 0; j < w.n_cols; ++j) {
            const std::uint8_t st = w.vstat[j];
            if (st == kBasic) continue;
            if (w.lb[j] == w.ub[j] && st != kFreeZero) continue;
            double d = composite ? 0.0 : cost[j];
            for (const auto& [row, val] : w.cols[j]) d -= y[row] * val;
            int dir = 0;
            if (st == kAtLower) {
                if (d < -dual_tol) dir = +1;
            } else if (st == kAtUpper) {
                if (d > dual_tol) dir = -1;
            } else {
                if (d < -dual_tol) dir = +1;
                else if (d > dual_tol) dir = -1;
            }
            if (dir == 0) continue;
            if (bland) { enter = j; enter_dir = dir; break; }
            const double score = std::abs(d);
            if (score > best_score + 1e-15) {
                best_score = score;
                enter = j;
                enter_dir = dir;
            }
        }
        if (enter < 0) return LoopEnd::Optimal;

        // Direction through the basis.
        std::fill(wcol.begin(), wcol.end(), 0.0);
        for (const auto& [row, val] : w.cols[enter]) {
            if (val == 0.0) continue;
            for (int i = 0; i < m; ++i)
                wcol[i] += w.binv[static_cast<std::size_t>(i) * m + row] * val;
        }

        // Ratio test. The basic value in row i changes at rate -enter_dir*wcol[i];
        // an out-of-band basic blocks at the bound it is returning to.
        double limit = kInf;
        if (std::isfinite(w.lb[enter]) && std::isfinite(w.ub[enter]))
            limit = w.ub[enter] - w.lb[enter];
        int leave_row = -1;
        double leave_pivot = 0.0;
        int leave_to = kAtLower;
        for (int i = 0; i < m; ++i) {
            const double rate = enter_dir * wcol[i];
            const int bj = w.basic[i];
            double ratio;
            int to;
            if (rate > kPivotTol) { // value decreasing
                if (w.x[bj] > w.ub[bj] + band) {
                    ratio = (w.x[bj] - w.ub[bj]) / rate; // returning to its band
                    to = kAtUpper;
                } else if (w.x[bj] < w.lb[bj] - band) {
                    continue; // already below and worsening; priced by the composite cost
                } else if (std::isfinite(w.lb[bj])) {
                    ratio = (w.x[bj] - w.lb[bj]) / rate;
                    to = kAtLower;
                } else {
                    continue;
                }
            } else if (rate < -kPivotTol) { // value increasing
                if (w.x[bj] < w.lb[bj] - band) {
                    ratio = (w.lb[bj] - w.x[bj]) / (-rate);
                    to = kAtLower;
                } else if (w.x[bj] > w.ub[bj] + band) {
                    continue;
                } else if (std::isfinite(w.ub[bj])) {
                    ratio = (w.ub[bj] - w.x[bj]) / (-rate);
                    to = kAtUpper;
                } else {
                    continue;
                }
            } else {
                continue;
            }
            if (ratio < 0.0) ratio = 0.0;
            if (ratio < limit - 1e-9 ||
                (ratio < limit + 1e-9 && leave_row >= 0 &&
                 std::abs(wcol[i]) > std::abs(leave_pivot) + 1e-12)) {
                limit = std::min(limit, ratio);
                leave_row = i;
                leave_pivot = wcol[i];
                leave_to = to;
            }
        }

        if (!std::isfinite(limit)) {
            if (composite)
                throw NumericalError("simplex: unbounded infeasibility-reduction ray");
            return LoopEnd::Unbounded;
        }

        ++iters;
        const double step = limit;
        if (step <= kDegenEps) {
            if (++degen_run > degen_budget) bland = true;
        } else {
            degen_run = 0;
        }

        if (step > 0.0) {
            for (int i = 0; i < m; ++i) {
                if (wcol[i] == 0.0) continue;
                w.x[w.basic[i]] -= enter_dir * step * wcol[i];
            }
            w.x[enter] += enter_dir * step;
        }

        if (leave_row < 0) {
            w.vstat[enter] = (enter_dir > 0) ? kAtUpper : kAtLower;
            w.x[enter] = nonbasic_rest_value(w, enter, w.vstat[enter]);
            continue;
        }

        const int leave_col = w.basic[leave_row];
        w.vstat[leave_col] = static_cast<std::uint8_t>(leave_to);
        w.x[leave_col] = nonbasic_rest_value(w, leave_col, w.vstat[leave_col]);
        w.basic[leave_row] = enter;
        w.vstat[enter] = kBasic;

        const double piv = wcol[leave_row];
        double* prow = &w.binv[static_cast<std::size_t>(leave_row) * m];
        for (int j = 0; j < m; ++j) prow[j] /= piv;
        for (int i = 0; i < m; ++i) {
            if (i == leave_row) continue;
            const double f = wcol[i];
            if (f == 0.0) continue;
            double* irow = &w.binv[static_cast<std::size_t>(i) * m];
            for (int j = 0; j < m; ++j) irow[j] -= f * prow[j];
        }

        if (++since_refactor >= kRefactorEvery) {
            since_refactor = 0;
            if (!refactorize(w))
                throw NumericalError("simplex: basis became singular");
            recompute_basics(w);
        }
    }
}

} // namespace

LpResult solve_lp(const MilpModel& model, const std::vector<double>& lb,
                  const std::vector<double>& ub, const SolveParams& params,
                  const LpBasis* warm) {
    const int n = model.num_vars();
    const int m = model.num_rows();
    LpResult res;

    for (int j = 0; j < n; ++j)
        if (lb[j] > ub[j] + params.feas_tol) {
            res.status = LpStatus::Infeasible;
            return res;
        }

    Work w;
    w.m = m;
    w.n_cols = n + m;
    w.feas_tol = params.feas_tol;
    w.cols.resize(w.n_cols);
    w.lb.assign(lb.begin(), lb.end());
    w.ub.assign(ub.begin(), ub.end());
    w.lb.resize(w.n_cols);
    w.ub.resize(w.n_cols);
    w.cost.assign(w.n_cols, 0.0);
    w.rhs.resize(m);

    const double sense_mult = model.sense() == Sense::Max ? -1.0 : 1.0;
    double cost_scale = 1.0;
    for (int j = 0; j < n; ++j) {
        w.cost[j] = sense_mult * model.obj()[j];
        cost_scale = std::max(cost_scale, std::abs(w.cost[j]));
    }
    for (int i = 0; i < m; ++i) {
        const Row& r = model.rows()[i];
        for (const auto& [j, a] : r.coeffs)
            if (a != 0.0) w.cols[j].push_back({i, a});
        const int s = n + i;
        w.cols[s].push_back({i, 1.0});
        switch (r.rel) {
            case Rel::Le: w.lb[s] = 0.0;  w.ub[s] = kInf; break;
            case Rel::Ge: w.lb[s] = -kInf; w.ub[s] = 0.0; break;
            case Rel::Eq: w.lb[s] = 0.0;  w.ub[s] = 0.0; break;
        }
        w.rhs[i] = r.rhs;
    }

    w.vstat.assign(w.n_cols, kAtLower);
    w.x.assign(w.n_cols, 0.0);
    w.basic.assign(m, -1);
    w.binv.assign(static_cast<std::size_t>(m) * m, 0.0);

    auto rest_stat = [&](int j) -> std::uint8_t {
        if (std::isfinite(w.lb[j])) return kAtLower;
        if (std::isfinite(w.ub[j])) return kAtUpper;
        return kFreeZero;
    };

    bool basis_ready = false;
    if (warm && static_cast<int>(warm->basic.size()) == m &&
        static_cast<int>(warm->at_upper.size()) == w.n_cols) {
        std::vector<char> used(w.n_cols, 0);
        bool shape_ok = true;
        for (int i = 0; i < m && shape_ok; ++i) {
            const int j = warm->basic[i];
            if (j < 0 || j >= w.n_cols || used[j]) shape_ok = false;
            else used[j] = 1;
        }
        if (shape_ok) {
            for (int i = 0; i < m; ++i) {
                w.basic[i] = warm->basic[i];
                w.vstat[warm->basic[i]] = kBasic;
            }
            for (int j = 0; j < w.n_cols; ++j) {
                if (w.vstat[j] == kBasic) continue;
                const std::uint8_t st = warm->at_upper[j] && std::isfinite(w.ub[j])
                                            ? static_cast<std::uint8_t>(kAtUpper)
                                            : rest_stat(j);
                w.vstat[j] = st;
                w.x[j] = nonbasic_rest_value(w, j, st);
            }
            if (refactorize(w)) {
                recompute_basics(w);
                basis_ready = true;
            }
        }
    }
    if (!basis_ready) {
        // Cold start: logical basis, nonbasics at their rest points. Rows whose
        // logical lands outside its band are phase-1 work.
        for (int j = 0; j < n; ++j) {
            w.vstat[j] = rest_stat(j);
            w.x[j] = nonbasic_rest_value(w, j, w.vstat[j]);
        }
        for (int i = 0; i < m; ++i) {
            const int s = n + i;
            w.basic[i] = s;
            w.vstat[s] = kBasic;
        }
        if (!refactorize(w)) throw NumericalError("simplex: logical basis singular");
        recompute_basics(w);
    }

    const std::int64_t iter_budget =
        20000 + 50LL * (static_cast<std::int64_t>(m) + w.n_cols);
    const int degen_budget = 200 + m;
    std::int64_t iters = 0;

    double rhs_scale = 1.0;
    for (int i = 0; i < m; ++i) rhs_scale = std::max(rhs_scale, std::abs(w.rhs[i]));

    if (total_infeasibility(w) > params.feas_tol * std::max(1, m)) {
        const LoopEnd end =
            run_simplex(w, true, w.cost, 1.0, iter_budget, degen_budget, iters);
        if (end == LoopEnd::Optimal) {
            // Phase-1 optimum with residual infeasibility: no feasible point.
            if (total_infeasibility(w) > params.feas_tol * 10.0 * rhs_scale) {
                res.status = LpStatus::Infeasible;
                res.iterations = iters;
                return res;
            }
        }
    }

    const LoopEnd end = run_simplex(w, false, w.cost, cost_scale, iter_budget, degen_budget, iters);
    if (end == LoopEnd::Unbounded) {
        res.status = LpStatus::Unbounded;
        res.iterations = iters;
        return res;
    }

    if (m > 0) {
        if (!refactorize(w)) throw NumericalError("simplex: final basis singular");
        recompute_basics(w);
    }

    res.status = LpStatus::Optimal;
    res.iterations = iters;
    res.x.assign(n, 0.0);
    double z = 0.0;
    for (int j = 0; j < n; ++j) {
        res.x[j] = w.x[j];
        z += w.cost[j] * w.x[j];
    }
    res.objective = sense_mult * z;
    auto basis = std::make_shared<LpBasis>();
    basis->basic.assign(w.basic.begin(), w.basic.end());
    basis->at_upper.assign(w.n_cols, 0);
    for (int j = 0; j < w.n_cols; ++j)
        if (w.vstat[j] == kAtUpper) basis->at_upper[j] = 1;
    res.basis = std::move(basis);
    return res;
}

} // namespace mspeu::milp
