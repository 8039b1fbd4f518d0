#pragma once

// JSON serialization for generic problems ("mspeu/1") and big-M tables
// ("bigm-table/1"). Formats are documented in docs/formats.md.

#include <string>

#include "mspeu/mspeu_model.hpp"

namespace mspeu {

std::string problem_to_json(const MspeuProblem& problem);
void save_problem(const MspeuProblem& problem, const std::string& path);
MspeuProblem load_problem(const std::string& path);

/// `space` records which model the constants belong to: "mspeu" for the
/// generic node formulation, "ftcp" for the direct case-study model.
std::string bigm_to_json(const BigMTable& table, const std::string& space,
                         const std::string& method);
void save_bigm(const BigMTable& table, const std::string& space, const std::string& method,
               const std::string& path);
struct LoadedBigM {
    BigMTable table;
    std::string space;
    std::string method;
};
LoadedBigM load_bigm(const std::string& path);

} // namespace mspeu
