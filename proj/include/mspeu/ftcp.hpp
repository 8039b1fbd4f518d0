#pragma once

// Football team composition case study: instance data, JSON I/O, the seeded
// generator with player-level correlated values, the direct model builder,
// and the mapping onto the generic node-formulation data.

#include <cstdint>
#include <string>
#include <vector>

#include "mspeu/mdst.hpp"
#include "mspeu/milp/model.hpp"
#include "mspeu/mspeu_model.hpp"

namespace mspeu {

/// Two readings of the stage-t discount factor: PaperLiteral raises the rate
/// to the stage power, 1/(1+rho^t); Compound uses the conventional (1+rho)^-t.
enum class DiscountMode { PaperLiteral, Compound };

const char* to_string(DiscountMode m);
DiscountMode discount_mode_from_string(const std::string& s);

struct FtcpInstance {
    std::vector<std::string> compositions;            // index = composition id
    Mdst tree;                                        // |D_n| = |I| at every node
    std::vector<std::vector<double>> value;           // [i][n]: composition value
    std::vector<std::vector<double>> salary;          // [i][n]: salary cost
    std::vector<std::vector<std::vector<double>>> transition; // [i][j][n], diag 0
    double budget = 0.0;
    std::vector<double> extra_budget;                 // [n], 0 at the root
    double rho = 0.0;
    DiscountMode discount_mode = DiscountMode::PaperLiteral;
    int initial = 0;                                  // initial composition id
    std::string generator_audit_json;                 // empty when hand-written

    int num_comps() const { return static_cast<int>(compositions.size()); }

    /// Stage-s discount factor under the configured mode.
    double disc(int s) const;

    /// Cumulative discount G_t = prod_{s=2..t} disc(s), with G_1 = 1. This is
    /// the factor that folds the stagewise discounts of the expectation rows
    /// into per-node objective coefficients of the generic form.
    double cumulative_disc(int t) const;
};

struct InstanceCheck {
    std::vector<std::string> violations; // hard errors
    std::vector<std::string> warnings;   // e.g. negative values
    bool ok() const { return violations.empty(); }
};

InstanceCheck validate_instance(const FtcpInstance& instance);

FtcpInstance load_instance(const std::string& path);
void save_instance(const FtcpInstance& instance, const std::string& path);
std::string instance_to_json(const FtcpInstance& instance); // canonical bytes

struct GeneratorParams {
    int num_compositions = 3;
    int samples = 4;
    int stages = 4;
    std::vector<double> value_means;   // per composition; defaulted when short
    std::vector<double> value_vols;    // per composition; defaulted when short
    double correlation = 0.8;          // within the enforced composition's players
    std::uint64_t seed = 0;
    double budget = 100.0;
    double rho = 0.0;
    DiscountMode discount_mode = DiscountMode::PaperLiteral;
    int initial = 0;
    int players_per_composition = 11;
    double salary_rate = 0.08;         // salary as a share of value
    double fee_rate = 0.5;             // transition fee on the value gap
    double churn_rate = 0.05;          // friction on the value scale
    double drift = 0.0;                // per-stage log drift of player values
    bool audit_players = false;        // embed player-level values in the audit
};

/// Samples a full instance: a uniform MDST whose distribution i at each node
/// correlates the players of composition i at `correlation` (others
/// independent), player values evolving by a seeded lognormal step, and the
/// extra budget tracking the reference composition's relative value growth.
FtcpInstance generate_instance(const GeneratorParams& params);

/// Deterministic constant-value instance of the same shape, with no sampling.
/// Values are flat across nodes so every extra budget is zero.
FtcpInstance make_structural_instance(int num_compositions, int samples, int stages);

/// The direct model: delta/x binaries, theta per node, phi per (composition,
/// non-leaf node), choice/transition/budget rows, big-M expectation rows, and
/// the discounted sunset row at leaves. `bigm` entries are keyed (node, i).
milp::MilpModel build_ftcp_milp(const FtcpInstance& instance, const BigMTable& bigm);

/// Maps onto the generic form: x packs the transition binaries plus two slack
/// columns, delta_{nd} is the composition choice, parent coupling enters only
/// through the delta matrices (so c_is_zero holds), stage discounts fold into
/// the objective coefficients, and the leaf sunset value folds into leaf q.
MspeuProblem to_mspeu(const FtcpInstance& instance);

/// Rescales a direct-model big-M table (keyed (node, i)) into the mapped
/// problem's space by the cumulative discount of each node's stage.
BigMTable ftcp_bigm_to_mspeu(const FtcpInstance& instance, const BigMTable& ftcp_table);

/// Per-node solution table (CSV): node, stage, parent, probability, chosen
/// composition, transition, theta, on-policy flag.
void write_solution_csv(const FtcpInstance& instance, const MspeuSolution& sol,
                        const std::string& path);

} // namespace mspeu
