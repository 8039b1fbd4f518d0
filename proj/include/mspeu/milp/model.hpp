#pragma once

// Desk-scale mixed-integer linear programming model and solution carriers.

#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace mspeu::milp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Rel { Eq, Le, Ge };
enum class Sense { Max, Min };
enum class Status { Optimal, Infeasible, Unbounded, Limit };

const char* to_string(Status s);
const char* to_string(Rel r);

struct Var {
    std::string name;
    double lb = 0.0;
    double ub = kInf;
    bool integral = false;
};

struct Row {
    std::string name;
    std::vector<std::pair<int, double>> coeffs; // (var index, coefficient)
    Rel rel = Rel::Eq;
    double rhs = 0.0;
};

class MilpModel {
public:
    /// Adds a variable; names must be unique. Returns its index.
    int add_var(std::string name, double lb, double ub, bool integral);

    /// Adds a constraint row over existing variables. Returns its index.
    int add_row(std::string name, std::vector<std::pair<int, double>> coeffs, Rel rel, double rhs);

    void set_sense(Sense s) { sense_ = s; }
    void set_obj(int var, double coeff);

    int num_vars() const { return static_cast<int>(vars_.size()); }
    int num_rows() const { return static_cast<int>(rows_.size()); }
    const std::vector<Var>& vars() const { return vars_; }
    const std::vector<Row>& rows() const { return rows_; }
    Sense sense() const { return sense_; }
    const std::vector<double>& obj() const { return obj_; }
    int find_var(const std::string& name) const; // -1 when absent

    /// A variable counts as binary when it is integral with bounds within [0,1].
    struct Counts {
        std::int64_t vars = 0;
        std::int64_t bins = 0;
        std::int64_t cons = 0;
        bool operator==(const Counts&) const = default;
    };
    Counts counts() const;

    std::int64_t num_nonzeros() const;

    /// Objective value of an assignment (model sense as stated).
    double objective_value(const std::vector<double>& x) const;

    /// Largest row violation of an assignment, each scaled by 1/(1+|rhs|).
    double max_row_violation(const std::vector<double>& x) const;

private:
    std::vector<Var> vars_;
    std::vector<Row> rows_;
    std::vector<double> obj_;
    Sense sense_ = Sense::Max;
    std::unordered_map<std::string, int> var_index_;
    std::unordered_map<std::string, int> row_index_;
};

struct SolveParams {
    double int_tol = 1e-6;       // integrality tolerance
    double rel_gap = 1e-6;       // relative optimality gap
    double feas_tol = 1e-7;      // primal feasibility tolerance
    std::int64_t node_limit = -1;   // < 0: no limit
    double time_limit_s = -1.0;     // < 0: no limit; honored at node granularity
    std::uint64_t seed = 0;      // reserved; the engine itself is deterministic
    // Desk-scale guard: the dense basis inverse needs O(rows^2) memory, so
    // models beyond this cap are rejected with a pointer to export_lp and an
    // external solver rather than ground through.
    std::int64_t nonzero_cap = 50'000;
    std::string solver_override; // "external:<command>"; empty consults MSPEU_SOLVER
};

struct MilpSolution {
    Status status = Status::Infeasible;
    std::vector<double> values;  // primal assignment, empty when none found
    double objective = 0.0;      // incumbent objective (model sense)
    double best_bound = 0.0;     // proven bound (model sense)
    double gap = 0.0;            // |best_bound - objective| / max(1, |objective|)
    std::int64_t node_count = 0;
    std::int64_t simplex_iters = 0;
    double wall_time_s = 0.0;
};

} // namespace mspeu::milp
