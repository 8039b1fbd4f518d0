#pragma once

// LP text format (CPLEX-style subset) plus the external-solver solution file.
//
// Exports list every variable in the objective, zero coefficients included,
// so that re-importing our own output reproduces the model structure exactly:
// same variable order, bounds, integrality, rows, and sense.

#include <iosfwd>
#include <string>

#include "mspeu/milp/model.hpp"

namespace mspeu::milp {

void export_lp(const MilpModel& model, std::ostream& os);
void export_lp(const MilpModel& model, const std::string& path);

MilpModel import_lp(std::istream& is);
MilpModel import_lp(const std::string& path);

/// Reads an external solver's solution file: first line "objective <value>"
/// (or "status infeasible|unbounded|limit"), then one "name value" pair per
/// line. Unknown names are an error; missing variables default to 0.
MilpSolution parse_solution_file(const MilpModel& model, const std::string& path);

/// Writes a solution in the same format (reference implementation of the
/// external-solver side of the protocol).
void write_solution_file(const MilpModel& model, const MilpSolution& sol,
                         const std::string& path);

} // namespace mspeu::milp
