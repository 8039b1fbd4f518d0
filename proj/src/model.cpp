#include "mspeu/milp/model.hpp"

#include <cmath>

#include "mspeu/errors.hpp"

namespace mspeu::milp {

const char* to_string(Status s) {
    switch (s) {
        case Status::Optimal: return "optimal";
        case Status::Infeasible: return "infeasible";
        case Status::Unbounded: return "unbounded";
        case Status::Limit: return "limit";
    }
    return "?";
}

const char* to_string(Rel r) {
    switch (r) {
        case Rel::Eq: return "=";
        case Rel::Le: return "<=";
        case Rel::Ge: return ">=";
    }
    return "?";
}

int MilpModel::add_var(std::string name, double lb, double ub, bool integral) {
    if (var_index_.count(name))
        throw Error("duplicate variable name: " + name);
    if (std::isnan(lb) || std::isnan(ub) || lb > ub)
        throw Error("bad bounds for variable " + name);
    int idx = num_vars();
    var_index_.emplace(name, idx);
    vars_.push_back({std::move(name), lb, ub, integral});
    obj_.push_back(0.0);
    return idx;
}

int MilpModel::add_row(std::string name, std::vector<std::pair<int, double>> coeffs,
                       Rel rel, double rhs) {
    if (row_index_.count(name))
        throw Error("duplicate row name: " + name);
    for (const auto& [j, a] : coeffs) {
        if (j < 0 || j >= num_vars())
            throw Error("row " + name + " references unknown variable index " + std::to_string(j));
        if (!std::isfinite(a))
            throw Error("row " + name + " has a non-finite coefficient");
    }
    if (!std::isfinite(rhs))
        throw Error("row " + name + " has a non-finite rhs");
    int idx = num_rows();
    row_index_.emplace(name, idx);
    rows_.push_back({std::move(name), std::move(coeffs), rel, rhs});
    return idx;
}

void MilpModel::set_obj(int var, double coeff) {
    if (var < 0 || var >= num_vars())
        throw Error("set_obj: unknown variable index " + std::to_string(var));
    if (!std::isfinite(coeff))
        throw Error("set_obj: non-finite coefficient");
    obj_[var] = coeff;
}

int MilpModel::find_var(const std::string& name) const {
    auto it = var_index_.find(name);
    return it == var_index_.end() ? -1 : it->second;
}

MilpModel::Counts MilpModel::counts() const {
    Counts c;
    c.vars = num_vars();
    c.cons = num_rows();
    for (const auto& v : vars_)
        if (v.integral && v.lb >= 0.0 && v.ub <= 1.0) ++c.bins;
    return c;
}

std::int64_t MilpModel::num_nonzeros() const {
    std::int64_t nz = 0;
    for (const auto& r : rows_) nz += static_cast<std::int64_t>(r.coeffs.size());
    return nz;
}

double MilpModel::objective_value(const std::vector<double>& x) const {
    double z = 0.0;
    for (int j = 0; j < num_vars() && j < static_cast<int>(x.size()); ++j)
        z += obj_[j] * x[j];
    return z;
}

double MilpModel::max_row_violation(const std::vector<double>& x) const {
    double worst = 0.0;
    for (const auto& r : rows_) {
        double act = 0.0;
        for (const auto& [j, a] : r.coeffs) act += a * x[j];
        double viol = 0.0;
        switch (r.rel) {
            case Rel::Eq: viol = std::abs(act - r.rhs); break;
            case Rel::Le: viol = std::max(0.0, act - r.rhs); break;
            case Rel::Ge: viol = std::max(0.0, r.rhs - act); break;
        }
        worst = std::max(worst, viol / (1.0 + std::abs(r.rhs)));
    }
    return worst;
}

} // namespace mspeu::milp
